//! Hexahedral cell geometry and mesh topology.

pub mod cell;
pub mod mesh;
pub mod meshfile;

pub use cell::{
    compute_edge_vectors, compute_face_vectors, compute_gamma, compute_node_vectors, compute_s_coeffs,
    compute_volume, face_axis, face_sign, opposite_face, HexCell, EDGE_TABLE, FACE_VERTICES,
};
pub use mesh::{build_mesh, BoundaryFace, BoundarySpec, FaceLink, FaceRef, InteriorFace, Mesh};
pub use meshfile::{read_mesh, read_mesh_data, write_mesh, MeshData};
