//! Dual scattering channel (DSC) solver for incompressible, buoyant flow on
//! unstructured hexahedral meshes.
//!
//! Each cell carries one nodal value per field and one port value per face.
//! A step alternates a connection sweep (ports from nodes) with a reflection
//! sweep (nodes from ports); a pressure iteration keeps the port velocities
//! divergence free and periodic coarsening filters the nodal state.

// `!(x > y)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod bc;
pub mod coarsen;
pub mod connection;
pub mod error;
pub mod hexmesh;
pub mod linalg;
pub mod pressure;
pub mod reflection;
pub mod scalar;
pub mod sim;
pub mod sparse;
pub mod state;

pub use bc::{BoundaryConditions, BoundaryRule, FlowBc, PortRule, ThermalBc};
pub use error::{Error, Result};
pub use hexmesh::{build_mesh, BoundarySpec, HexCell, Mesh};
pub use linalg::{Mat3, Vec3};
pub use scalar::Real;
pub use state::{Field, FieldState, ScatteringView, Snapshot};

pub type Mesh64 = Mesh<f64>;
pub type Mesh32 = Mesh<f32>;
pub type HexCell64 = HexCell<f64>;
pub type HexCell32 = HexCell<f32>;
pub type FieldState64 = FieldState<f64>;
pub type FieldState32 = FieldState<f32>;
