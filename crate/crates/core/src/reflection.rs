//! Reflection step: nodal temperature and velocity from the surface
//! integrals of diffusive and convective port fluxes, plus buoyancy, pressure
//! gradient and heat source.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexmesh::{HexCell, Mesh};
use crate::linalg::Vec3;
use crate::scalar::Real;
use crate::state::{Field, FieldState};

/// Boussinesq fluid constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialProps<S> {
    /// Thermal diffusivity.
    pub alpha: S,
    /// Dynamic viscosity.
    pub eta: S,
    /// Reference density.
    pub rho_inf: S,
    /// Relative density change per unit temperature, `ρ⁻¹ ∂ρ/∂T`: negative for
    /// fluids that expand when heated.
    pub beta: S,
    /// Reference temperature.
    pub t_inf: S,
    pub gravity: [S; 3],
}

impl<S: Real> MaterialProps<S> {
    /// Air near room temperature, no gravity.
    pub fn air() -> Self {
        MaterialProps {
            alpha: S::lit(2.2e-5),
            eta: S::lit(1.8e-5),
            rho_inf: S::lit(1.2),
            beta: S::lit(-1.0 / 300.0),
            t_inf: S::lit(300.0),
            gravity: [S::zero(); 3],
        }
    }

    /// Non-dimensional fluid with the given diffusivities, unit density.
    pub fn nondimensional(alpha: S, nu: S) -> Self {
        MaterialProps { alpha, eta: nu, rho_inf: S::one(), beta: S::zero(), t_inf: S::zero(), gravity: [S::zero(); 3] }
    }

    pub fn kinematic_viscosity(&self) -> S {
        self.eta / self.rho_inf
    }

    pub fn gravity(&self) -> Vec3<S> {
        Vec3(self.gravity)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.eta, self.rho_inf, self.beta, self.t_inf]
            .iter()
            .chain(self.gravity.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("props", "all material constants must be finite"));
        }
        if self.alpha < S::zero() {
            return Err(Error::config("props.alpha", "must be >= 0"));
        }
        if self.eta < S::zero() {
            return Err(Error::config("props.eta", "must be >= 0"));
        }
        if !(self.rho_inf > S::zero()) {
            return Err(Error::config("props.rho_inf", "must be > 0"));
        }
        Ok(())
    }
}

/// Volumetric heat source per cell, in temperature units per time.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceField<S> {
    pub q: Vec<S>,
}

impl<S: Real> SourceField<S> {
    pub fn zeros(n_cells: usize) -> Self {
        SourceField { q: vec![S::zero(); n_cells] }
    }

    pub fn uniform(n_cells: usize, q: S) -> Self {
        SourceField { q: vec![q; n_cells] }
    }

    pub fn validate(&self, n_cells: usize) -> Result<()> {
        if self.q.len() != n_cells {
            return Err(Error::config("q", format!("{} values for {n_cells} cells", self.q.len())));
        }
        if let Some(c) = self.q.iter().position(|v| !v.is_finite()) {
            return Err(Error::config("q", format!("non-finite source in cell {c}")));
        }
        Ok(())
    }
}

/// `γ (Z^p_{2μ+1} − Z^p_{2μ})`.
#[inline]
pub fn nodal_gradient<S: Real>(cell: &HexCell<S>, ports: &[S; 6]) -> Vec3<S> {
    let d = Vec3([ports[1] - ports[0], ports[3] - ports[2], ports[5] - ports[4]]);
    cell.from_node_components(&d)
}

/// Port data of one cell needed by the nodal updates.
#[derive(Clone, Copy, Debug)]
pub struct CellPorts<'a, S> {
    /// Port velocities, one per face.
    pub velocity: [Vec3<S>; 6],
    pub values: &'a [S; 6],
    pub gradients: &'a [Vec3<S>; 6],
}

/// `Σ_ι [κ f_ι·∇Z_ι − Z^p_ι (u^p_ι·f_ι)]`
#[inline]
fn surface_balance<S: Real>(cell: &HexCell<S>, ports: &CellPorts<'_, S>, diffusivity: S) -> S {
    let mut sum = S::zero();
    for f in 0..6 {
        let fv = &cell.face_vectors[f];
        sum += diffusivity * fv.dot(&ports.gradients[f]) - ports.values[f] * ports.velocity[f].dot(fv);
    }
    sum
}

/// `T + (τ/V) Σ_ι [α ∇T·f − T^p (u^p·f)] + τ q`
pub fn update_temperature_node<S: Real>(
    cell: &HexCell<S>,
    t_node: S,
    ports: &CellPorts<'_, S>,
    props: &MaterialProps<S>,
    q: S,
    tau: S,
) -> S {
    t_node + tau / cell.volume * surface_balance(cell, ports, props.alpha) + tau * q
}

/// One velocity component:
/// `u_k + τ (β (T − T_∞) g_k − ∂_k p / ρ_∞) + (τ/V) Σ_ι [ν ∇u_k·f − u_k^p (u^p·f)]`.
#[allow(clippy::too_many_arguments)]
pub fn update_velocity_component<S: Real>(
    cell: &HexCell<S>,
    k: usize,
    u_node: S,
    ports: &CellPorts<'_, S>,
    pressure_gradient: &Vec3<S>,
    t_node: S,
    props: &MaterialProps<S>,
    tau: S,
) -> S {
    let body = props.beta * (t_node - props.t_inf) * props.gravity[k] - pressure_gradient[k] / props.rho_inf;
    u_node + tau * body + tau / cell.volume * surface_balance(cell, ports, props.kinematic_viscosity())
}

/// All three components; `components[k]` holds the ports of `u_k`.
pub fn update_velocity_node<S: Real>(
    cell: &HexCell<S>,
    u_node: Vec3<S>,
    components: [CellPorts<'_, S>; 3],
    pressure_gradient: &Vec3<S>,
    t_node: S,
    props: &MaterialProps<S>,
    tau: S,
) -> Vec3<S> {
    Vec3(std::array::from_fn(|k| {
        update_velocity_component(cell, k, u_node[k], &components[k], pressure_gradient, t_node, props, tau)
    }))
}

/// Advances every node by τ from the current ports. With `update_flow`
/// false the velocity is left untouched (pure heat transport).
pub fn reflection_sweep<S: Real>(
    mesh: &Mesh<S>,
    state: &mut FieldState<S>,
    props: &MaterialProps<S>,
    q: &SourceField<S>,
    update_flow: bool,
) -> Result<()> {
    let tau = state.tau;
    let ti = Field::Temperature.index();
    let pi = Field::Pressure.index();
    for (c, cell) in mesh.cells.iter().enumerate() {
        let velocity: [Vec3<S>; 6] = std::array::from_fn(|f| state.port_velocity(c, f));
        let t_old = state.node[ti][c];
        let t_ports = CellPorts { velocity, values: &state.port[ti][c], gradients: &state.grad[ti][c] };
        let t_new = update_temperature_node(cell, t_old, &t_ports, props, q.q[c], tau);
        if update_flow {
            let grad_p = nodal_gradient(cell, &state.port[pi][c]);
            let comps: [CellPorts<'_, S>; 3] = std::array::from_fn(|k| {
                let fi = Field::velocity(k).index();
                CellPorts { velocity, values: &state.port[fi][c], gradients: &state.grad[fi][c] }
            });
            let u_new = update_velocity_node(cell, state.velocity(c), comps, &grad_p, t_old, props, tau);
            state.set_velocity(c, u_new);
        }
        state.node[ti][c] = t_new;
    }
    state.node_time = state.port_time + tau * S::half();
    Ok(())
}

/// Explicit-stability indicator `max(|u| τ/h, 2 α τ/h², 2 ν τ/h²)` over all
/// cells, with `h` the cell's shortest node vector. Returns the value and
/// the cell where it peaks.
pub fn cfl_number<S: Real>(mesh: &Mesh<S>, state: &FieldState<S>, props: &MaterialProps<S>) -> (S, usize) {
    let tau = state.tau;
    let diff = props.alpha.max(props.kinematic_viscosity());
    let mut best = (S::zero(), 0);
    for (c, cell) in mesh.cells.iter().enumerate() {
        let h = cell.spacing;
        let adv = state.velocity(c).norm() * tau / h;
        let dif = S::two() * diff * tau / (h * h);
        let v = adv.max(dif);
        if v > best.0 || (v.is_nan() && !best.0.is_nan()) {
            best = (v, c);
        }
    }
    best
}
