//! Pressure iteration enforcing a divergence-free port velocity field.
//!
//! Per cell the discrete Poisson balance is `(τ/ρ∞) Σ_ι S_ι = I`, with `S_ι`
//! the reconstructed pressure-gradient flux through face `ι` and
//! `I = Σ_ι u^p_ι·f_ι` the cell boundary integral of the port velocities.
//! Writing `S_ι = a_ι (P_ι − p) + t_ι` (normal part from the face pressure
//! `P_ι`, tangential part `t_ι` from opposite-face differences) each cell
//! equation is linear in its nodal pressure.

use serde::{Deserialize, Serialize};

use crate::bc::{self, BoundaryConditions, PortRule};
use crate::connection::{self, face_gradient, Side};
use crate::error::{Error, Result};
use crate::hexmesh::{FaceLink, HexCell, Mesh};
use crate::linalg::Vec3;
use crate::scalar::Real;
use crate::sparse::EnvelopeCholesky;
use crate::state::{Field, FieldState};

/// How the cell pass treats neighbouring pressures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellUpdate {
    /// Shared face pressures are eliminated through the interface relation, so
    /// each cell update sees its neighbours' nodal pressures directly.
    Eliminated,
    /// Face pressures are held fixed during the cell pass.
    FaceFixed,
    /// The eliminated system is solved exactly with a sparse Cholesky factor
    /// kept for the lifetime of the solver; tangential terms are corrected in
    /// an outer loop.
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "S: Real + Deserialize<'de>"))]
pub struct PressureSolverConfig<S> {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Target for the largest cell residual, relative to the initial largest
    /// face flux `|u^p·f|`.
    #[serde(default = "default_tolerance")]
    pub tolerance: S,
    /// SOR factor; 1 is Gauss-Seidel.
    #[serde(default = "default_relaxation")]
    pub relaxation: S,
    #[serde(default = "default_update")]
    pub cell_update: CellUpdate,
    /// Subtract `(τ/ρ∞)∇p` from the port velocities after convergence.
    #[serde(default = "default_true")]
    pub project_ports: bool,
}

fn default_max_iterations() -> usize {
    500
}
/// 1e-8, or a small multiple of the machine epsilon when that is coarser.
fn default_tolerance<S: Real>() -> S {
    S::lit(1e-8).max(S::epsilon() * S::lit(64.0))
}
fn default_relaxation<S: Real>() -> S {
    S::one()
}
fn default_update() -> CellUpdate {
    CellUpdate::Eliminated
}
fn default_true() -> bool {
    true
}

impl<S: Real> Default for PressureSolverConfig<S> {
    fn default() -> Self {
        PressureSolverConfig {
            max_iterations: default_max_iterations(),
            tolerance: default_tolerance(),
            relaxation: default_relaxation(),
            cell_update: CellUpdate::Eliminated,
            project_ports: true,
        }
    }
}

impl<S: Real> PressureSolverConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > S::zero()) {
            return Err(Error::config("pressure.tolerance", "must be > 0"));
        }
        if !(self.relaxation > S::zero() && self.relaxation < S::two()) {
            return Err(Error::config("pressure.relaxation", format!("{} is outside (0, 2)", self.relaxation)));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("pressure.max_iterations", "must be >= 1"));
        }
        Ok(())
    }
}

/// Outcome of [`pressure_iterate`].
#[derive(Clone, Debug, PartialEq)]
pub struct PressureReport<S> {
    pub iterations: usize,
    /// Largest cell residual after each iteration; entry 0 is the initial one.
    pub residuals: Vec<S>,
    pub target: S,
    /// Largest `|u^p·f|` before the solve.
    pub flux_scale: S,
}

impl<S: Real> PressureReport<S> {
    pub fn final_residual(&self) -> S {
        *self.residuals.last().expect("initial residual recorded")
    }
}

/// `I = Σ_ι u^p_ι·f_ι`
#[inline]
pub fn cell_divergence_integral<S: Real>(cell: &HexCell<S>, u_ports: &[Vec3<S>; 6]) -> S {
    (0..6).map(|f| u_ports[f].dot(&cell.face_vectors[f])).sum()
}

pub use crate::connection::tangential_flux;

/// Nodal pressure balancing `I` with all six face pressures held fixed,
/// relaxed from `p_old` by `omega`.
pub fn pressure_cell_solve<S: Real>(
    index: usize,
    cell: &HexCell<S>,
    divergence: S,
    ports: &[S; 6],
    p_old: S,
    tau: S,
    rho: S,
    omega: S,
) -> Result<S> {
    let mut num = -rho * divergence / tau;
    let mut den = S::zero();
    for f in 0..6 {
        let a = cell.normal_coeffs[f];
        num += a * ports[f] + tangential_flux(cell, f, ports);
        den += a;
    }
    if !(den > S::zero()) {
        return Err(Error::SingularCell { cell: index });
    }
    let p = num / den;
    Ok(p_old + omega * (p - p_old))
}

/// What lies across a face, as seen by the pressure equation.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Across<S> {
    /// Neighbouring cell and face, with the interface weights
    /// `a_ζ/(a_ζ+a_χ)` and `a_χ/(a_ζ+a_χ)` and the conductance `a_ζ a_χ/(a_ζ+a_χ)`.
    Cell { cell: usize, face: usize, own: S, other: S, conductance: S },
    Fixed(S),
    /// Zero normal gradient.
    Free,
}

/// Face pressure gradient flux `S_ι = a_ι (P_ι − p) + t_ι` of one cell.
#[inline]
fn pressure_flux<S: Real>(cell: &HexCell<S>, face: usize, node: S, ports: &[S; 6]) -> S {
    cell.normal_coeffs[face] * (ports[face] - node) + tangential_flux(cell, face, ports)
}

/// Largest `|(τ/ρ) Σ_ι S_ι − I_ζ|` over all cells.
pub fn pressure_residual<S: Real>(mesh: &Mesh<S>, state: &FieldState<S>, divergence: &[S], rho: S) -> S {
    let pi = Field::Pressure.index();
    let k = state.tau / rho;
    let mut worst = S::zero();
    for (c, cell) in mesh.cells.iter().enumerate() {
        let node = state.node[pi][c];
        let ports = &state.port[pi][c];
        let flux: S = (0..6).map(|f| pressure_flux(cell, f, node, ports)).sum();
        let r = (k * flux - divergence[c]).abs();
        if r > worst || r.is_nan() {
            worst = r;
        }
    }
    worst
}

/// Interface pressures and gradients from the current nodal pressures;
/// boundary faces per rule.
pub fn pressure_face_sweep<S: Real>(mesh: &Mesh<S>, state: &mut FieldState<S>, bcs: &BoundaryConditions<S>) -> Result<()> {
    let old = state.port[Field::Pressure.index()].clone();
    connection::connect_interior(mesh, state, Field::Pressure, &old)?;
    bc::apply_field_boundary(mesh, state, Field::Pressure, &old, bcs)
}

/// Working data of one pressure solve. Tangential fluxes only change when
/// the face pressures do, so they are cached between face sweeps.
struct PressureSystem<'m, S> {
    mesh: &'m Mesh<S>,
    across: &'m [[Across<S>; 6]],
    tangential: Vec<[S; 6]>,
    /// `ρ I / τ` per cell.
    source: Vec<S>,
    /// `τ / ρ`
    k: S,
}

impl<'m, S: Real> PressureSystem<'m, S> {
    fn new(mesh: &'m Mesh<S>, across: &'m [[Across<S>; 6]], divergence: &[S], tau: S, rho: S) -> Self {
        PressureSystem {
            mesh,
            across,
            tangential: vec![[S::zero(); 6]; mesh.n_cells()],
            source: divergence.iter().map(|i| rho * *i / tau).collect(),
            k: tau / rho,
        }
    }

    fn update_tangential(&mut self, ports: &[[S; 6]]) {
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            self.tangential[c] = std::array::from_fn(|f| tangential_flux(cell, f, &ports[c]));
        }
    }

    /// Largest `|(τ/ρ) Σ S − I|`, from cached tangential fluxes.
    fn residual(&self, nodes: &[S], ports: &[[S; 6]]) -> S {
        let mut worst = S::zero();
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let mut flux = S::zero();
            for f in 0..6 {
                flux += cell.normal_coeffs[f] * (ports[c][f] - nodes[c]) + self.tangential[c][f];
            }
            let r = self.k * (flux - self.source[c]).abs();
            if r > worst || r.is_nan() {
                worst = r;
            }
        }
        worst
    }

    /// Face values from the interface and boundary relations, using the
    /// cached tangential fluxes of the previous face values.
    fn face_values(&self, nodes: &[S], ports: &mut [[S; 6]]) {
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            for f in 0..6 {
                match self.across[c][f] {
                    Across::Cell { cell: nc, face: nf, own, other, .. } => {
                        if (c, f) < (nc, nf) {
                            let t = self.tangential[c][f] + self.tangential[nc][nf];
                            // (a p_ζ + b p_χ − t_ζ − t_χ) / (a + b)
                            let p = own * nodes[c] + other * nodes[nc] - t / (cell.normal_coeffs[f] + self.mesh.cells[nc].normal_coeffs[nf]);
                            ports[c][f] = p;
                            ports[nc][nf] = p;
                        }
                    }
                    Across::Fixed(v) => ports[c][f] = v,
                    Across::Free => ports[c][f] = nodes[c] - self.tangential[c][f] / cell.normal_coeffs[f],
                }
            }
        }
    }

    /// Gauss-Seidel/SOR pass with shared face pressures eliminated.
    fn eliminated_pass(&self, nodes: &mut [S], omega: S) -> Result<()> {
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let mut num = -self.source[c];
            let mut den = S::zero();
            for f in 0..6 {
                match self.across[c][f] {
                    Across::Cell { cell: nc, face: nf, own, other, conductance } => {
                        // e = (b t_ζ − a t_χ) / (a + b)
                        num += conductance * nodes[nc] + other * self.tangential[c][f] - own * self.tangential[nc][nf];
                        den += conductance;
                    }
                    Across::Fixed(v) => {
                        num += cell.normal_coeffs[f] * v + self.tangential[c][f];
                        den += cell.normal_coeffs[f];
                    }
                    Across::Free => {}
                }
            }
            if !(den > S::zero()) {
                return Err(Error::SingularCell { cell: c });
            }
            nodes[c] += omega * (num / den - nodes[c]);
        }
        Ok(())
    }

    /// Right-hand side of the eliminated system for the cached tangential fluxes.
    fn eliminated_rhs(&self, rhs: &mut [S]) {
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let mut num = -self.source[c];
            for f in 0..6 {
                match self.across[c][f] {
                    Across::Cell { cell: nc, face: nf, own, other, .. } => {
                        num += other * self.tangential[c][f] - own * self.tangential[nc][nf];
                    }
                    Across::Fixed(v) => num += cell.normal_coeffs[f] * v + self.tangential[c][f],
                    Across::Free => {}
                }
            }
            rhs[c] = num;
        }
    }

    /// Gauss-Seidel/SOR pass with all face pressures held.
    fn face_fixed_pass(&self, nodes: &mut [S], ports: &[[S; 6]], omega: S) {
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let mut num = -self.source[c];
            let mut den = S::zero();
            for f in 0..6 {
                let a = cell.normal_coeffs[f];
                num += a * ports[c][f] + self.tangential[c][f];
                den += a;
            }
            nodes[c] += omega * (num / den - nodes[c]);
        }
    }
}

/// Face pressure gradients from the current ports: one-sided on boundary
/// faces, the mean of both sides on interior faces.
fn store_gradients<S: Real>(mesh: &Mesh<S>, state: &mut FieldState<S>) {
    let pi = Field::Pressure.index();
    for (c, cell) in mesh.cells.iter().enumerate() {
        for f in 0..6 {
            state.grad[pi][c][f] = face_gradient(cell, f, state.node[pi][c], &state.port[pi][c]);
        }
    }
    for pair in &mesh.interior_faces {
        let (a, b) = (pair.a, pair.b);
        let g = (state.grad[pi][a.cell][a.face] + state.grad[pi][b.cell][b.face]) * S::half();
        state.grad[pi][a.cell][a.face] = g;
        state.grad[pi][b.cell][b.face] = g;
    }
}

/// Cell divergence integrals of the current port velocities and the largest
/// single face flux.
pub fn divergence_field<S: Real>(mesh: &Mesh<S>, state: &FieldState<S>) -> (Vec<S>, S) {
    let mut scale = S::zero();
    let div = mesh
        .cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let u: [Vec3<S>; 6] = std::array::from_fn(|f| state.port_velocity(c, f));
            for f in 0..6 {
                scale = scale.max(u[f].dot(&cell.face_vectors[f]).abs());
            }
            cell_divergence_integral(cell, &u)
        })
        .collect();
    (div, scale)
}

fn build_across<S: Real>(mesh: &Mesh<S>, bcs: &BoundaryConditions<S>) -> Vec<[Across<S>; 6]> {
    mesh.links
        .iter()
        .enumerate()
        .map(|(c, links)| {
            std::array::from_fn(|f| match links[f] {
                FaceLink::Interior(nb) => {
                    let a = mesh.cells[c].normal_coeffs[f];
                    let b = mesh.cells[nb.cell].normal_coeffs[nb.face];
                    let sum = a + b;
                    Across::Cell { cell: nb.cell, face: nb.face, own: a / sum, other: b / sum, conductance: a * b / sum }
                }
                FaceLink::Boundary(tag) => match bcs.rule(tag).port_rule(Field::Pressure) {
                    PortRule::Fixed(v) => Across::Fixed(v),
                    PortRule::ZeroGradient => Across::Free,
                },
            })
        })
        .collect()
}

/// Pressure solver bound to one mesh and boundary set. The face topology and,
/// for [`CellUpdate::Direct`], the matrix factor are reused between solves.
#[derive(Clone, Debug)]
pub struct PressureSolver<S> {
    across: Vec<[Across<S>; 6]>,
    floating: bool,
    factor: Option<EnvelopeCholesky<S>>,
}

impl<S: Real> PressureSolver<S> {
    pub fn new(mesh: &Mesh<S>, bcs: &BoundaryConditions<S>) -> Self {
        PressureSolver { across: build_across(mesh, bcs), floating: !bcs.has_pressure_reference(), factor: None }
    }

    /// Without a fixed-pressure face the level is undetermined.
    pub fn is_floating(&self) -> bool {
        self.floating
    }

    /// Factors the eliminated conductance matrix; with a floating level the
    /// row of cell 0 is replaced by `p_0 = 0`.
    fn factorize(&self, mesh: &Mesh<S>) -> Result<EnvelopeCholesky<S>> {
        let n = mesh.n_cells();
        let mut diag = vec![S::zero(); n];
        let mut off: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
        for (c, cell) in mesh.cells.iter().enumerate() {
            for f in 0..6 {
                match self.across[c][f] {
                    Across::Cell { cell: nc, conductance, .. } => {
                        diag[c] += conductance;
                        if !(self.floating && (c == 0 || nc == 0)) {
                            off[c].push((nc, -conductance));
                        }
                    }
                    Across::Fixed(_) => diag[c] += cell.normal_coeffs[f],
                    Across::Free => {}
                }
            }
            if !(diag[c] > S::zero()) {
                return Err(Error::SingularCell { cell: c });
            }
        }
        if self.floating && n > 0 {
            diag[0] = S::one();
        }
        EnvelopeCholesky::factor(&diag, &off).ok_or(Error::SingularCell { cell: 0 })
    }

    /// Solves the cell balances until each holds to `tolerance · max|u^p·f|`.
    /// Without a fixed-pressure boundary the level is free during the
    /// iteration and afterwards shifted so that cell 0 reads 0. On return the
    /// face pressure gradients are current.
    pub fn solve(
        &mut self,
        mesh: &Mesh<S>,
        state: &mut FieldState<S>,
        rho: S,
        config: &PressureSolverConfig<S>,
    ) -> Result<PressureReport<S>> {
        if config.cell_update == CellUpdate::Direct && self.factor.is_none() {
            self.factor = Some(self.factorize(mesh)?);
        }
        let pi = Field::Pressure.index();
        let (divergence, flux_scale) = divergence_field(mesh, state);
        let mut sys = PressureSystem::new(mesh, &self.across, &divergence, state.tau, rho);
        let nodes = &mut state.node[pi];
        let ports = &mut state.port[pi];
        sys.update_tangential(ports);
        sys.face_values(nodes, ports);
        sys.update_tangential(ports);
        let r0 = sys.residual(nodes, ports);
        let scale = if flux_scale > S::zero() { flux_scale } else { r0 };
        let target = config.tolerance * scale;
        let mut report = PressureReport { iterations: 0, residuals: vec![r0], target, flux_scale };
        let mut converged = r0 <= target;
        let (mut rhs, mut work) = match config.cell_update {
            CellUpdate::Direct => (vec![S::zero(); mesh.n_cells()], vec![S::zero(); mesh.n_cells()]),
            _ => (Vec::new(), Vec::new()),
        };
        while !converged && report.iterations < config.max_iterations {
            match config.cell_update {
                CellUpdate::Eliminated => sys.eliminated_pass(nodes, config.relaxation)?,
                CellUpdate::FaceFixed => sys.face_fixed_pass(nodes, ports, config.relaxation),
                CellUpdate::Direct => {
                    sys.eliminated_rhs(&mut rhs);
                    if self.floating {
                        rhs[0] = S::zero();
                    }
                    let factor = self.factor.as_ref().expect("factor computed above");
                    factor.solve_into(&rhs, nodes, &mut work);
                }
            }
            sys.face_values(nodes, ports);
            sys.update_tangential(ports);
            let r = sys.residual(nodes, ports);
            report.residuals.push(r);
            report.iterations += 1;
            if !r.is_finite() {
                break;
            }
            converged = r <= target;
        }
        if !converged {
            return Err(Error::PressureNotConverged {
                iterations: report.iterations,
                residual: report.final_residual().to_f64_lossy(),
                target: target.to_f64_lossy(),
            });
        }
        if self.floating {
            shift_to_reference(state, 0);
        }
        store_gradients(mesh, state);
        Ok(report)
    }
}

/// One-off solve; see [`PressureSolver::solve`].
pub fn pressure_iterate<S: Real>(
    mesh: &Mesh<S>,
    state: &mut FieldState<S>,
    rho: S,
    bcs: &BoundaryConditions<S>,
    config: &PressureSolverConfig<S>,
) -> Result<PressureReport<S>> {
    PressureSolver::new(mesh, bcs).solve(mesh, state, rho, config)
}

/// Subtracts the pressure of `cell` from every nodal and port pressure.
pub fn shift_to_reference<S: Real>(state: &mut FieldState<S>, cell: usize) {
    let pi = Field::Pressure.index();
    let level = state.node[pi][cell];
    if level == S::zero() {
        return;
    }
    state.node[pi].iter_mut().for_each(|p| *p -= level);
    state.port[pi].iter_mut().flat_map(|p| p.iter_mut()).for_each(|p| *p -= level);
}

/// `u^p −= (τ/ρ∞) ∇p` on every face whose pressure flux enters a cell balance
/// (interior faces and fixed-pressure boundary faces).
pub fn project_port_velocities<S: Real>(mesh: &Mesh<S>, state: &mut FieldState<S>, rho: S, bcs: &BoundaryConditions<S>) {
    let pi = Field::Pressure.index();
    let k = state.tau / rho;
    for c in 0..mesh.n_cells() {
        for f in 0..6 {
            let apply = match mesh.links[c][f] {
                FaceLink::Interior(_) => true,
                FaceLink::Boundary(tag) => matches!(bcs.rule(tag).port_rule(Field::Pressure), PortRule::Fixed(_)),
            };
            if apply {
                let g = state.grad[pi][c][f];
                let u = state.port_velocity(c, f) - g * k;
                state.set_port_velocity(c, f, u);
            }
        }
    }
}

/// Shared-face pressure for two sides, exposed for checks.
pub fn interface_pressure<S: Real>(a: Side<'_, S>, b: Side<'_, S>) -> Result<S> {
    connection::update_interface(a, b).map(|u| u.value)
}
