//! Connection step: new port values from gradient continuity across faces.
//!
//! Per face `ι` of a cell the node-basis components
//!
//! ```text
//! z^n_μ = 2 (−1)^ι Z^n                    μ = [ι/2]
//! z^n_μ = Z^p_{2μ+1} − Z^p_{2μ}            otherwise (previous ports)
//! ```
//!
//! together with `z^p_{[ι/2]} = 2 (−1)^ι Z^p_ι` give the face flux
//! `S = s^μ (z^n_μ − δ_μ^{[ι/2]} z^p_μ)` and the face gradient
//! `∇Z = γ (z^n − δ z^p)`. Requiring `S_ζ = −S_χ` on a shared face fixes the
//! common port value.

use crate::bc::{self, BoundaryConditions};
use crate::error::{Error, Result};
use crate::hexmesh::{face_axis, HexCell, Mesh};
use crate::linalg::Vec3;
use crate::scalar::Real;
use crate::state::{Field, FieldState};

/// `(−1)^ι`
#[inline]
pub fn parity<S: Real>(face: usize) -> S {
    if face % 2 == 0 {
        S::one()
    } else {
        -S::one()
    }
}

/// Node-basis components `z^n_μ` of face `face`.
#[inline]
pub fn face_nodal_components<S: Real>(face: usize, node: S, ports: &[S; 6]) -> Vec3<S> {
    let axis = face_axis(face);
    let mut z = Vec3::zero();
    for mu in 0..3 {
        z[mu] = if mu == axis {
            S::two() * parity::<S>(face) * node
        } else {
            ports[2 * mu + 1] - ports[2 * mu]
        };
    }
    z
}

/// `z^n − δ z^p`: node-basis components of the gradient at the face.
#[inline]
pub fn face_components<S: Real>(face: usize, node: S, port_value: S, ports: &[S; 6]) -> Vec3<S> {
    let mut z = face_nodal_components(face, node, ports);
    z[face_axis(face)] -= S::two() * parity::<S>(face) * port_value;
    z
}

/// Flux `f_ι · ∇Z` through face `face`, with the face's own value `ports[face]`.
#[inline]
pub fn face_flux<S: Real>(cell: &HexCell<S>, face: usize, node: S, ports: &[S; 6]) -> S {
    cell.s_coeffs[face].dot(&face_components(face, node, ports[face], ports))
}

/// One-sided face gradient `γ (z^n − δ z^p)` in the standard basis.
#[inline]
pub fn face_gradient<S: Real>(cell: &HexCell<S>, face: usize, node: S, ports: &[S; 6]) -> Vec3<S> {
    cell.from_node_components(&face_components(face, node, ports[face], ports))
}

/// Result of updating one shared face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceUpdate<S> {
    pub value: S,
    /// Arithmetic mean of the two one-sided gradients.
    pub gradient: Vec3<S>,
    /// Flux out of the first cell; the second cell sees `-flux`.
    pub flux: S,
}

/// One side of a shared face: geometry, local face, nodal value and the
/// cell's previous port values.
#[derive(Clone, Copy, Debug)]
pub struct Side<'a, S> {
    pub index: usize,
    pub cell: &'a HexCell<S>,
    pub face: usize,
    pub node: S,
    pub ports: &'a [S; 6],
}

/// Tangential part `Σ_{μ≠[ι/2]} s^μ (Z^p_{2μ+1} − Z^p_{2μ})` of the flux through `face`.
#[inline]
pub fn tangential_flux<S: Real>(cell: &HexCell<S>, face: usize, ports: &[S; 6]) -> S {
    let axis = face_axis(face);
    let s = &cell.s_coeffs[face];
    (0..3).filter(|m| *m != axis).map(|m| s[m] * (ports[2 * m + 1] - ports[2 * m])).sum()
}

/// Shared port value from flux continuity, plus the mean face gradient.
///
/// Solving `S_ζ = −S_χ` for the common value gives
/// `(a_ζ Z_ζ + a_χ Z_χ − t_ζ − t_χ) / (a_ζ + a_χ)` with `a` the normal
/// coefficients and `t` the tangential fluxes; it is evaluated as an
/// increment on `Z_ζ` so that constant data come back unchanged.
pub fn update_interface<S: Real>(a: Side<'_, S>, b: Side<'_, S>) -> Result<InterfaceUpdate<S>> {
    let za = face_nodal_components(a.face, a.node, a.ports);
    let zb = face_nodal_components(b.face, b.node, b.ports);
    let ax = face_axis(a.face);
    let bx = face_axis(b.face);
    let (wa, wb) = (a.cell.normal_coeffs[a.face], b.cell.normal_coeffs[b.face]);
    let denom = wa + wb;
    if !(denom.abs() > (wa.abs() + wb.abs()) * S::lit(1e-12)) {
        return Err(Error::SingularInterface { cell_a: a.index, face_a: a.face, cell_b: b.index, face_b: b.face });
    }
    let t = tangential_flux(a.cell, a.face, a.ports) + tangential_flux(b.cell, b.face, b.ports);
    let value = a.node + (wb * (b.node - a.node) - t) / denom;

    let mut ca = za;
    ca[ax] -= S::two() * parity::<S>(a.face) * value;
    let mut cb = zb;
    cb[bx] -= S::two() * parity::<S>(b.face) * value;
    let ga = a.cell.from_node_components(&ca);
    let gb = b.cell.from_node_components(&cb);
    let gradient = (ga + gb) * S::half();
    let flux = a.cell.face_vectors[a.face].dot(&gradient);
    Ok(InterfaceUpdate { value, gradient, flux })
}

/// Updates every interior face of `field`, reading ports from `old`.
pub fn connect_interior<S: Real>(
    mesh: &Mesh<S>,
    state: &mut FieldState<S>,
    field: Field,
    old: &[[S; 6]],
) -> Result<()> {
    let fi = field.index();
    let nodes = &state.node[fi];
    let ports = &mut state.port[fi];
    let grads = &mut state.grad[fi];
    for pair in &mesh.interior_faces {
        let (a, b) = (pair.a, pair.b);
        let up = update_interface(
            Side { index: a.cell, cell: &mesh.cells[a.cell], face: a.face, node: nodes[a.cell], ports: &old[a.cell] },
            Side { index: b.cell, cell: &mesh.cells[b.cell], face: b.face, node: nodes[b.cell], ports: &old[b.cell] },
        )?;
        ports[a.cell][a.face] = up.value;
        ports[b.cell][b.face] = up.value;
        grads[a.cell][a.face] = up.gradient;
        grads[b.cell][b.face] = up.gradient;
    }
    Ok(())
}

/// Connection step for `fields`: interior faces by flux continuity, boundary
/// faces by their rules. Advances the port stamp to `node_time + τ/2`.
pub fn connection_sweep<S: Real>(
    mesh: &Mesh<S>,
    state: &mut FieldState<S>,
    fields: &[Field],
    bcs: &BoundaryConditions<S>,
) -> Result<()> {
    let old: Vec<(Field, Vec<[S; 6]>)> = fields.iter().map(|f| (*f, state.port[f.index()].clone())).collect();
    for (field, prev) in &old {
        connect_interior(mesh, state, *field, prev)?;
    }
    bc::apply_boundary_conditions(mesh, state, &old, bcs)?;
    state.port_time = state.node_time + state.tau * S::half();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexmesh::{build_mesh, BoundarySpec};

    fn cube(origin: [f64; 3]) -> [Vec3<f64>; 8] {
        let bits = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]];
        bits.map(|b| Vec3::new(origin[0] + b[0] as f64, origin[1] + b[1] as f64, origin[2] + b[2] as f64))
    }

    fn unit() -> HexCell<f64> {
        HexCell::new(0, [0; 8], &cube([0.0; 3])).unwrap()
    }

    #[test]
    fn constant_field_components() {
        let c = 2.5;
        let z = face_nodal_components(1, c, &[c; 6]);
        assert_eq!(z, Vec3::new(-2.0 * c, 0.0, 0.0));
        let z = face_nodal_components(0, c, &[c; 6]);
        assert_eq!(z, Vec3::new(2.0 * c, 0.0, 0.0));
    }

    #[test]
    fn linear_x_has_no_tangential_components() {
        // Z = x on the unit cube: ports at face centres, node at 0.5
        let ports = [0.0, 1.0, 0.5, 0.5, 0.5, 0.5];
        let z = face_nodal_components(2, 0.5, &ports);
        assert_eq!(z, Vec3::new(1.0, 2.0 * 0.5, 0.0));
        let z = face_nodal_components(1, 0.5, &ports);
        assert_eq!((z[1], z[2]), (0.0, 0.0));
    }

    #[test]
    fn flux_of_x_through_plus_x_face_is_one() {
        let cell = unit();
        let ports = [0.0, 1.0, 0.5, 0.5, 0.5, 0.5];
        assert_eq!(face_flux(&cell, 1, 0.5, &ports), 1.0);
        assert_eq!(face_flux(&cell, 0, 0.5, &ports), -1.0);
        assert_eq!(face_flux(&cell, 3, 0.5, &ports), 0.0);
        assert_eq!(face_gradient(&cell, 1, 0.5, &ports), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(face_flux(&cell, 1, 3.0, &[3.0; 6]), 0.0);
    }

    #[test]
    fn two_cube_linear_profile() {
        let (a, c) = (1.7, -0.4);
        let left = HexCell::new(0, [0; 8], &cube([0.0; 3])).unwrap();
        let right = HexCell::new(1, [0; 8], &cube([1.0, 0.0, 0.0])).unwrap();
        let z = |x: f64| a * x + c;
        let pl = [z(0.0), z(1.0), z(0.5), z(0.5), z(0.5), z(0.5)];
        let pr = [z(1.0), z(2.0), z(1.5), z(1.5), z(1.5), z(1.5)];
        let up = update_interface(
            Side { index: 0, cell: &left, face: 1, node: z(0.5), ports: &pl },
            Side { index: 1, cell: &right, face: 0, node: z(1.5), ports: &pr },
        )
        .unwrap();
        // hand solve: (2 z(0.5) + 2 z(1.5)) / 4 = a + c
        assert!((up.value - (a + c)).abs() < 1e-15);
        assert!((up.gradient - Vec3::new(a, 0.0, 0.0)).max_abs() < 1e-15);
        assert!((up.flux - a).abs() < 1e-15);
    }

    #[test]
    fn mirror_symmetric_equal_nodes_zero_flux() {
        let left = HexCell::new(0, [0; 8], &cube([0.0; 3])).unwrap();
        let right = HexCell::new(1, [0; 8], &cube([1.0, 0.0, 0.0])).unwrap();
        let pl = [0.3, 0.9, 0.1, 0.4, 0.2, 0.6];
        // mirror image in x: swap faces 0 and 1
        let pr = [0.9, 0.3, 0.1, 0.4, 0.2, 0.6];
        let up = update_interface(
            Side { index: 0, cell: &left, face: 1, node: 0.7, ports: &pl },
            Side { index: 1, cell: &right, face: 0, node: 0.7, ports: &pr },
        )
        .unwrap();
        assert!(up.flux.abs() < 1e-15);
    }

    #[test]
    fn constant_is_fixed_point_of_sweep() {
        let verts: Vec<Vec3<f64>> = (0..12)
            .map(|i| Vec3::new((i % 3) as f64, ((i / 3) % 2) as f64, (i / 6) as f64))
            .collect();
        let hexes = [[0, 1, 4, 3, 6, 7, 10, 9], [1, 2, 5, 4, 7, 8, 11, 10]];
        let mut bnd = Vec::new();
        for (c, faces) in [(0usize, [0, 2, 3, 4, 5]), (1, [1, 2, 3, 4, 5])] {
            for f in faces {
                bnd.push(BoundarySpec::new(c, f, "wall"));
            }
        }
        let mesh = build_mesh(verts, &hexes, &bnd).unwrap();
        let bcs = BoundaryConditions::closed_adiabatic(&mesh);
        let mut s = FieldState::uniform(2, 0.1, 4.0, Vec3::zero(), 1.0);
        let before = s.port.clone();
        connection_sweep(&mesh, &mut s, &[Field::Temperature, Field::Pressure], &bcs).unwrap();
        assert_eq!(s.port, before);
        assert_eq!(s.port_time, s.node_time + 0.05);
    }
}
