//! Boundary rules and boundary-face port updates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::connection::{face_nodal_components, parity, tangential_flux};
use crate::error::{Error, Result};
use crate::hexmesh::{face_axis, HexCell, Mesh};
use crate::linalg::Vec3;
use crate::scalar::Real;
use crate::state::{Field, FieldState};

/// Velocity behaviour of a tagged boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowBc<S> {
    NoSlip,
    MovingWall { velocity: [S; 3] },
    Inflow { velocity: [S; 3] },
    Outflow,
    /// Free slip: zero normal velocity, zero normal gradient of the tangential part.
    Symmetry,
}

/// Temperature behaviour of a tagged boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThermalBc<S> {
    Adiabatic,
    Fixed { value: S },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryRule<S> {
    #[serde(default = "no_slip")]
    pub flow: FlowBc<S>,
    #[serde(default = "adiabatic")]
    pub thermal: ThermalBc<S>,
}

fn no_slip<S>() -> FlowBc<S> {
    FlowBc::NoSlip
}

fn adiabatic<S>() -> ThermalBc<S> {
    ThermalBc::Adiabatic
}

impl<S: Real> BoundaryRule<S> {
    pub fn wall() -> Self {
        BoundaryRule { flow: FlowBc::NoSlip, thermal: ThermalBc::Adiabatic }
    }

    pub fn with_temperature(mut self, value: S) -> Self {
        self.thermal = ThermalBc::Fixed { value };
        self
    }

    pub fn with_flow(mut self, flow: FlowBc<S>) -> Self {
        self.flow = flow;
        self
    }

    pub fn is_finite(&self) -> bool {
        let flow = match self.flow {
            FlowBc::MovingWall { velocity } | FlowBc::Inflow { velocity } => velocity.iter().all(|v| v.is_finite()),
            _ => true,
        };
        let thermal = match self.thermal {
            ThermalBc::Fixed { value } => value.is_finite(),
            ThermalBc::Adiabatic => true,
        };
        flow && thermal
    }

    /// Port treatment of `field` on faces carrying this rule.
    pub fn port_rule(&self, field: Field) -> PortRule<S> {
        match field {
            Field::Temperature => match self.thermal {
                ThermalBc::Adiabatic => PortRule::ZeroGradient,
                ThermalBc::Fixed { value } => PortRule::Fixed(value),
            },
            Field::Pressure => match self.flow {
                FlowBc::Outflow => PortRule::Fixed(S::zero()),
                _ => PortRule::ZeroGradient,
            },
            _ => {
                let k = field.index() - Field::VelocityX.index();
                match self.flow {
                    FlowBc::NoSlip => PortRule::Fixed(S::zero()),
                    FlowBc::MovingWall { velocity } | FlowBc::Inflow { velocity } => PortRule::Fixed(velocity[k]),
                    FlowBc::Outflow | FlowBc::Symmetry => PortRule::ZeroGradient,
                }
            }
        }
    }

    /// Velocity faces whose ports are prescribed, i.e. carry a known flux.
    pub fn prescribes_velocity(&self) -> bool {
        !matches!(self.flow, FlowBc::Outflow)
    }
}

/// How one boundary port of one field is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PortRule<S> {
    Fixed(S),
    /// Flux through the face is zero; the port follows from the one-sided solve.
    ZeroGradient,
}

/// Rules resolved against a mesh, indexed like `mesh.tags`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryConditions<S> {
    pub rules: Vec<BoundaryRule<S>>,
}

impl<S: Real> BoundaryConditions<S> {
    /// Looks up a rule for every tag of `mesh`. Rules for tags the mesh lacks
    /// are ignored.
    pub fn resolve(mesh: &Mesh<S>, rules: &BTreeMap<String, BoundaryRule<S>>) -> Result<Self> {
        let mut out = Vec::with_capacity(mesh.tags.len());
        for tag in &mesh.tags {
            let rule = rules.get(tag).ok_or_else(|| Error::UnknownTag(tag.clone()))?;
            if !rule.is_finite() {
                return Err(Error::config(format!("bcs.{tag}"), "prescribed values must be finite"));
            }
            out.push(*rule);
        }
        Ok(BoundaryConditions { rules: out })
    }

    /// The same rule on every tag.
    pub fn uniform(mesh: &Mesh<S>, rule: BoundaryRule<S>) -> Self {
        BoundaryConditions { rules: vec![rule; mesh.tags.len()] }
    }

    /// Adiabatic no-slip walls everywhere.
    pub fn closed_adiabatic(mesh: &Mesh<S>) -> Self {
        Self::uniform(mesh, BoundaryRule::wall())
    }

    pub fn rule(&self, tag: usize) -> &BoundaryRule<S> {
        &self.rules[tag]
    }

    /// True when some face pins the pressure level.
    pub fn has_pressure_reference(&self) -> bool {
        self.rules.iter().any(|r| matches!(r.port_rule(Field::Pressure), PortRule::Fixed(_)))
    }
}

/// Port value and gradient on a boundary face from the one-sided balance.
///
/// With `PortRule::Fixed(v)` the port is `v`; with `ZeroGradient` the flux
/// `s^μ (z^n_μ − δ z^p_μ)` is set to zero, which gives
/// `Z^p = Z^n − t / a` with `t` the tangential flux and `a` the normal
/// coefficient.
pub fn boundary_port<S: Real>(
    cell_index: usize,
    cell: &HexCell<S>,
    face: usize,
    node: S,
    ports: &[S; 6],
    rule: PortRule<S>,
) -> Result<(S, Vec3<S>)> {
    let z = face_nodal_components(face, node, ports);
    let axis = face_axis(face);
    let two_p = S::two() * parity::<S>(face);
    let value = match rule {
        PortRule::Fixed(v) => v,
        PortRule::ZeroGradient => {
            let a = cell.normal_coeffs[face];
            if !(a > cell.s_coeffs[face].max_abs() * S::lit(1e-12)) {
                return Err(Error::SingularInterface { cell_a: cell_index, face_a: face, cell_b: cell_index, face_b: face });
            }
            node - tangential_flux(cell, face, ports) / a
        }
    };
    let mut c = z;
    c[axis] -= two_p * value;
    Ok((value, cell.from_node_components(&c)))
}

/// Sets every boundary port of `field` from its rule, reading the previous
/// ports from `old`.
pub fn apply_field_boundary<S: Real>(
    mesh: &Mesh<S>,
    state: &mut FieldState<S>,
    field: Field,
    old: &[[S; 6]],
    bcs: &BoundaryConditions<S>,
) -> Result<()> {
    let fi = field.index();
    for bf in &mesh.boundary_faces {
        let (c, f) = (bf.at.cell, bf.at.face);
        let rule = bcs.rule(bf.tag).port_rule(field);
        let (v, g) = boundary_port(c, &mesh.cells[c], f, state.node[fi][c], &old[c], rule)?;
        state.port[fi][c][f] = v;
        state.grad[fi][c][f] = g;
    }
    Ok(())
}

/// Boundary ports for each `(field, previous ports)` pair; afterwards
/// symmetry faces lose the normal part of the port velocity.
pub fn apply_boundary_conditions<S: Real>(
    mesh: &Mesh<S>,
    state: &mut FieldState<S>,
    old: &[(Field, Vec<[S; 6]>)],
    bcs: &BoundaryConditions<S>,
) -> Result<()> {
    if bcs.rules.len() != mesh.tags.len() {
        return Err(Error::UnknownTag(format!("{} rules for {} mesh tags", bcs.rules.len(), mesh.tags.len())));
    }
    for (field, prev) in old {
        apply_field_boundary(mesh, state, *field, prev, bcs)?;
    }
    let has_all_velocity = Field::VELOCITY.iter().all(|v| old.iter().any(|(f, _)| f == v));
    if has_all_velocity {
        project_symmetry_faces(mesh, state, old, bcs)?;
    }
    Ok(())
}

fn project_symmetry_faces<S: Real>(
    mesh: &Mesh<S>,
    state: &mut FieldState<S>,
    old: &[(Field, Vec<[S; 6]>)],
    bcs: &BoundaryConditions<S>,
) -> Result<()> {
    let prev = |k: usize| &old.iter().find(|(f, _)| *f == Field::velocity(k)).expect("velocity field").1;
    for bf in &mesh.boundary_faces {
        if !matches!(bcs.rule(bf.tag).flow, FlowBc::Symmetry) {
            continue;
        }
        let (c, f) = (bf.at.cell, bf.at.face);
        let cell = &mesh.cells[c];
        let n = cell.face_vectors[f] * (S::one() / cell.face_areas[f]);
        let u = state.port_velocity(c, f);
        let u = u - n * u.dot(&n);
        for k in 0..3 {
            let fi = Field::velocity(k).index();
            let (v, g) = boundary_port(c, cell, f, state.node[fi][c], &prev(k)[c], PortRule::Fixed(u[k]))?;
            state.port[fi][c][f] = v;
            state.grad[fi][c][f] = g;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexmesh::{build_mesh, BoundarySpec};

    fn single(tag_of: impl Fn(usize) -> &'static str) -> Mesh<f64> {
        let bits = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]];
        let v: Vec<Vec3<f64>> = bits.iter().map(|b| Vec3::new(b[0] as f64, b[1] as f64, b[2] as f64)).collect();
        let bnd: Vec<_> = (0..6).map(|f| BoundarySpec::new(0, f, tag_of(f))).collect();
        build_mesh(v, &[[0, 1, 2, 3, 4, 5, 6, 7]], &bnd).unwrap()
    }

    #[test]
    fn no_slip_and_fixed_temperature() {
        let mesh = single(|f| if f == 1 { "hot" } else { "wall" });
        let mut rules = BTreeMap::new();
        rules.insert("wall".to_string(), BoundaryRule::wall());
        rules.insert("hot".to_string(), BoundaryRule::wall().with_temperature(350.0));
        let bcs = BoundaryConditions::resolve(&mesh, &rules).unwrap();
        let mut s = FieldState::uniform(1, 0.1, 300.0, Vec3::new(0.3, -0.2, 0.1), 0.0);
        let old: Vec<_> = Field::ALL.iter().map(|f| (*f, s.port[f.index()].clone())).collect();
        apply_boundary_conditions(&mesh, &mut s, &old, &bcs).unwrap();
        assert_eq!(s.port_velocity(0, 3), Vec3::zero());
        assert_eq!(s.ports(Field::Temperature)[0][1], 350.0);
        assert_eq!(s.ports(Field::Temperature)[0][0], 300.0);
    }

    #[test]
    fn unknown_tag_rejected() {
        let mesh = single(|_| "lid");
        let rules: BTreeMap<String, BoundaryRule<f64>> = BTreeMap::new();
        assert!(matches!(BoundaryConditions::resolve(&mesh, &rules), Err(Error::UnknownTag(t)) if t == "lid"));
    }

    #[test]
    fn adiabatic_one_sided_hand_solve() {
        // unit cube, T = 2x + 3y, node 2.5, previous ports at face centres
        let mesh = single(|_| "wall");
        let cell = &mesh.cells[0];
        let ports = [1.5, 3.5, 1.0, 4.0, 2.5, 2.5];
        // +x face: s = (1,0,0), z^n = (-5, 3, 0); P = s·z^n / (2·(-1)·1) = 2.5
        let (p, g) = boundary_port(0, cell, 1, 2.5, &ports, PortRule::ZeroGradient).unwrap();
        assert_eq!(p, 2.5);
        assert_eq!(g, Vec3::new(0.0, 3.0, 0.0));
        // +y face: z^n = (2, -5, 0), s = (0,1,0); P = -5 / -2 = 2.5
        let (p, g) = boundary_port(0, cell, 3, 2.5, &ports, PortRule::ZeroGradient).unwrap();
        assert_eq!(p, 2.5);
        assert_eq!(g, Vec3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn symmetry_removes_normal_velocity() {
        let mesh = single(|_| "side");
        let bcs = BoundaryConditions::uniform(
            &mesh,
            BoundaryRule { flow: FlowBc::Symmetry, thermal: ThermalBc::Adiabatic },
        );
        let mut s = FieldState::uniform(1, 0.1, 0.0, Vec3::new(0.3, -0.2, 0.1), 0.0);
        let old: Vec<_> = Field::ALL.iter().map(|f| (*f, s.port[f.index()].clone())).collect();
        apply_boundary_conditions(&mesh, &mut s, &old, &bcs).unwrap();
        let u = s.port_velocity(0, 5);
        assert_eq!(u, Vec3::new(0.3, -0.2, 0.0));
        let u = s.port_velocity(0, 0);
        assert_eq!(u, Vec3::new(0.0, -0.2, 0.1));
    }
}
