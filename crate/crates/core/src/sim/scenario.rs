//! Built-in validation geometries and their default run settings.

use crate::bc::{BoundaryRule, FlowBc, ThermalBc};
use crate::coarsen::CoarseningConfig;
use crate::error::{Error, Result};
use crate::hexmesh::{build_mesh, BoundarySpec, Mesh};
use crate::linalg::Vec3;
use crate::pressure::CellUpdate;
use crate::reflection::MaterialProps;
use crate::scalar::Real;
use crate::sim::config::{
    InitialCondition, ProbeLocation, ProbeSpec, ScenarioKind, ScenarioSpec, SimulationConfig, TemperatureStep,
};
use crate::state::Field;

/// Corner offsets `(i, j, k)` of the eight cell vertices.
const CORNERS: [[usize; 3]; 8] = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]];

/// Logically structured `nx × ny × nz` block, optionally periodic in `j`.
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub periodic_j: bool,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Self {
        Grid { nx, ny, nz, periodic_j: false }
    }

    fn vertex_rows(&self) -> usize {
        if self.periodic_j {
            self.ny
        } else {
            self.ny + 1
        }
    }

    fn vertex_id(&self, i: usize, j: usize, k: usize) -> usize {
        let j = j % self.vertex_rows();
        i + (self.nx + 1) * (j + self.vertex_rows() * k)
    }

    /// Neighbouring cell index across local face `face`, if inside the grid.
    fn neighbour(&self, (i, j, k): (usize, usize, usize), face: usize) -> Option<(usize, usize, usize)> {
        let axis = face / 2;
        let plus = face % 2 == 1;
        let mut c = [i, j, k];
        let n = [self.nx, self.ny, self.nz][axis];
        if plus {
            if c[axis] + 1 == n {
                if axis == 1 && self.periodic_j {
                    c[axis] = 0;
                    return Some((c[0], c[1], c[2]));
                }
                return None;
            }
            c[axis] += 1;
        } else {
            if c[axis] == 0 {
                if axis == 1 && self.periodic_j {
                    c[axis] = n - 1;
                    return Some((c[0], c[1], c[2]));
                }
                return None;
            }
            c[axis] -= 1;
        }
        Some((c[0], c[1], c[2]))
    }

    /// Builds the mesh of all cells for which `solid` is false. `tag` names
    /// each boundary face; its last argument tells whether the face borders
    /// a solid cell rather than the outer edge of the grid.
    pub fn build<S: Real>(
        &self,
        position: impl Fn(usize, usize, usize) -> Vec3<S>,
        solid: impl Fn(usize, usize, usize) -> bool,
        tag: impl Fn(usize, usize, usize, usize, bool) -> &'static str,
    ) -> Result<Mesh<S>> {
        let rows = self.vertex_rows();
        let mut vertices = Vec::with_capacity((self.nx + 1) * rows * (self.nz + 1));
        for k in 0..=self.nz {
            for j in 0..rows {
                for i in 0..=self.nx {
                    vertices.push(position(i, j, k));
                }
            }
        }
        let mut hexes = Vec::new();
        let mut cells = Vec::new();
        for k in 0..self.nz {
            for j in 0..self.ny {
                for i in 0..self.nx {
                    if solid(i, j, k) {
                        continue;
                    }
                    hexes.push(CORNERS.map(|[a, b, c]| self.vertex_id(i + a, j + b, k + c)));
                    cells.push((i, j, k));
                }
            }
        }
        let mut boundary = Vec::new();
        for (c, &ijk) in cells.iter().enumerate() {
            for face in 0..6 {
                match self.neighbour(ijk, face) {
                    Some((a, b, d)) if !solid(a, b, d) => {}
                    Some(_) => boundary.push(BoundarySpec::new(c, face, tag(ijk.0, ijk.1, ijk.2, face, true))),
                    None => boundary.push(BoundarySpec::new(c, face, tag(ijk.0, ijk.1, ijk.2, face, false))),
                }
            }
        }
        build_mesh(vertices, &hexes, &boundary)
    }
}

fn check_resolution(spec_name: &str, resolution: usize, min: usize) -> Result<()> {
    if resolution < min {
        return Err(Error::config("scenario.resolution", format!("{spec_name} needs resolution >= {min}, got {resolution}")));
    }
    Ok(())
}

fn free_slip<S: Real>() -> BoundaryRule<S> {
    BoundaryRule { flow: FlowBc::Symmetry, thermal: ThermalBc::Adiabatic }
}

/// Stable explicit time step for cell size `h`, speed `u` and diffusivity `d`.
fn explicit_step<S: Real>(h: S, u: S, d: S) -> S {
    let mut tau = S::lit(0.2) * h * h / d;
    if u > S::zero() {
        tau = tau.min(S::lit(0.6) * d / (u * u)).min(S::lit(0.5) * h / u);
    }
    tau
}

/// Near-optimal SOR factor `2 / (1 + sin(π/n))` for a Poisson problem `n` cells across.
pub fn sor_factor<S: Real>(n: usize) -> S {
    let n = n.max(2) as f64;
    S::lit(2.0 / (1.0 + (std::f64::consts::PI / n).sin()))
}

/// Mesh and default configuration of a built-in scenario.
pub fn build_scenario<S: Real>(spec: &ScenarioSpec<S>) -> Result<(Mesh<S>, SimulationConfig<S>)> {
    let (mesh, mut config) = match spec.name {
        ScenarioKind::Slab => slab(spec)?,
        ScenarioKind::Cavity => cavity(spec)?,
        ScenarioKind::Step => backward_step(spec)?,
        ScenarioKind::Cylinder => cylinder(spec)?,
        ScenarioKind::Annulus => annulus(spec)?,
    };
    config.scenario = Some(spec.clone());
    Ok((mesh, config))
}

/// 1D heat conduction: `n` cubes along x on the unit interval, insulated.
fn slab<S: Real>(spec: &ScenarioSpec<S>) -> Result<(Mesh<S>, SimulationConfig<S>)> {
    let n = spec.resolution;
    check_resolution("slab", n, 2)?;
    let h = S::one() / S::lit(n as f64);
    let mesh = Grid::new(n, 1, 1).build(
        |i, j, k| Vec3::new(S::lit(i as f64) * h, S::lit(j as f64) * h, S::lit(k as f64) * h),
        |_, _, _| false,
        |_, _, _, face, _| if face < 2 { "ends" } else { "sides" },
    )?;
    let alpha = S::one();
    let scale = S::lit(64.0) / S::lit(n as f64);
    let mut config = SimulationConfig::new(S::lit(1e-4) * scale * scale, 1000, MaterialProps::nondimensional(alpha, S::zero()))
        .with_rule("ends", BoundaryRule::wall())
        .with_rule("sides", BoundaryRule::wall());
    config.flow = false;
    config.coarsening = CoarseningConfig::disabled();
    config.initial.temperature_step =
        Some(TemperatureStep { axis: 0, position: S::half(), below: S::one(), above: S::zero() });
    config.output.cadence = 100;
    Ok((mesh, config))
}

/// Lid-driven unit box, `N × N × 1`, lid moving in +x at unit speed.
fn cavity<S: Real>(spec: &ScenarioSpec<S>) -> Result<(Mesh<S>, SimulationConfig<S>)> {
    let n = spec.resolution;
    check_resolution("cavity", n, 2)?;
    let h = S::one() / S::lit(n as f64);
    let mesh = Grid::new(n, n, 1).build(
        |i, j, k| Vec3::new(S::lit(i as f64) * h, S::lit(j as f64) * h, S::lit(k as f64) * h),
        |_, _, _| false,
        |_, _, _, face, _| if face == 3 { "lid" } else { "wall" },
    )?;
    let re = spec.reynolds.unwrap_or(S::lit(100.0));
    let nu = S::one() / re;
    let pr = spec.prandtl.unwrap_or(S::one());
    let lid = FlowBc::MovingWall { velocity: [S::one(), S::zero(), S::zero()] };
    let mut config =
        SimulationConfig::new(explicit_step(h, S::one(), nu), 1000, MaterialProps::nondimensional(nu / pr, nu))
            .with_rule("wall", BoundaryRule::wall())
            .with_rule("lid", BoundaryRule::wall().with_flow(lid));
    config.pressure.relaxation = sor_factor(n);
    config.probes.push(ProbeSpec {
        name: "centre".into(),
        location: ProbeLocation::Position { position: [S::half(), S::half(), h * S::half()] },
        fields: vec![Field::VelocityX, Field::VelocityY, Field::Pressure],
        capacity: None,
    });
    Ok((mesh, config))
}

/// Channel of height 2 and length 16 (step heights), with a unit-speed jet
/// entering over the upper half of the inlet; the lower half is the step face.
fn backward_step<S: Real>(spec: &ScenarioSpec<S>) -> Result<(Mesh<S>, SimulationConfig<S>)> {
    let r = spec.resolution;
    check_resolution("step", r, 1)?;
    let h = S::one() / S::lit(r as f64);
    let (nx, ny) = (16 * r, 2 * r);
    let mesh = Grid::new(nx, ny, 1).build(
        |i, j, k| Vec3::new(S::lit(i as f64) * h, S::lit(j as f64) * h, S::lit(k as f64) * h),
        |_, _, _| false,
        move |_, j, _, face, _| match face {
            0 if j >= r => "inlet",
            1 => "outlet",
            4 | 5 => "side",
            _ => "wall",
        },
    )?;
    let re = spec.reynolds.unwrap_or(S::lit(1000.0));
    let nu = S::one() / re;
    let pr = spec.prandtl.unwrap_or(S::one());
    let inflow = FlowBc::Inflow { velocity: [S::one(), S::zero(), S::zero()] };
    let mut config = SimulationConfig::new(S::lit(0.2) * h, 20_000, MaterialProps::nondimensional(nu / pr, nu))
        .with_rule("wall", BoundaryRule::wall())
        .with_rule("inlet", BoundaryRule::wall().with_flow(inflow))
        .with_rule("outlet", BoundaryRule::wall().with_flow(FlowBc::Outflow))
        .with_rule("side", free_slip());
    config.output.cadence = 1000;
    config.pressure.cell_update = CellUpdate::Direct;
    config.probes.push(ProbeSpec {
        name: "reattachment".into(),
        location: ProbeLocation::Position { position: [S::lit(6.0), S::lit(0.5) * h, h * S::half()] },
        fields: vec![Field::VelocityX],
        capacity: None,
    });
    Ok((mesh, config))
}

/// Cylinder centre as a fraction of the diameter-scaled domain `15 × 5`.
pub const CYLINDER_CENTRE: [f64; 2] = [3.5, 2.5];

/// Unit-diameter stair-step cylinder in a `15 × 5` channel, uniform unit
/// inflow, free-slip far field.
fn cylinder<S: Real>(spec: &ScenarioSpec<S>) -> Result<(Mesh<S>, SimulationConfig<S>)> {
    let r = spec.resolution;
    check_resolution("cylinder", r, 2)?;
    let h = S::one() / S::lit(r as f64);
    let (nx, ny) = (15 * r, 5 * r);
    // a quarter cell off the centre line so the staircase is not mirror symmetric
    let (xc, yc) = (S::lit(CYLINDER_CENTRE[0]), S::lit(CYLINDER_CENTRE[1]) + S::lit(0.25) * h);
    let centre_of = move |i: usize, j: usize| {
        (S::lit(i as f64 + 0.5) * h, S::lit(j as f64 + 0.5) * h)
    };
    let solid = move |i: usize, j: usize, _k: usize| {
        let (x, y) = centre_of(i, j);
        (x - xc) * (x - xc) + (y - yc) * (y - yc) < S::lit(0.25)
    };
    let mesh = Grid::new(nx, ny, 1).build(
        |i, j, k| Vec3::new(S::lit(i as f64) * h, S::lit(j as f64) * h, S::lit(k as f64) * h),
        solid,
        |_, _, _, face, at_solid| match (face, at_solid) {
            (_, true) => "cylinder",
            (0, _) => "inlet",
            (1, _) => "outlet",
            (2 | 3, _) => "far",
            _ => "side",
        },
    )?;
    let re = spec.reynolds.unwrap_or(S::lit(150.0));
    let nu = S::one() / re;
    let pr = spec.prandtl.unwrap_or(S::one());
    let inflow = FlowBc::Inflow { velocity: [S::one(), S::zero(), S::zero()] };
    let tau = S::lit(0.2) * h;
    let mut config = SimulationConfig::new(tau, 8000, MaterialProps::nondimensional(nu / pr, nu))
        .with_rule("cylinder", BoundaryRule::wall())
        .with_rule("inlet", BoundaryRule::wall().with_flow(inflow))
        .with_rule("outlet", BoundaryRule::wall().with_flow(FlowBc::Outflow))
        .with_rule("far", free_slip())
        .with_rule("side", free_slip());
    config.initial.velocity = [S::one(), S::zero(), S::zero()];
    config.initial.perturbation = S::lit(0.01);
    config.coarsening = CoarseningConfig::every(10);
    config.output.cadence = 1000;
    config.pressure.cell_update = CellUpdate::Direct;
    config.probes.push(ProbeSpec {
        name: "wake".into(),
        location: ProbeLocation::Position { position: [xc + S::lit(2.0), yc, h * S::half()] },
        fields: vec![Field::VelocityY],
        capacity: None,
    });
    Ok((mesh, config))
}

pub const ANNULUS_RADII: [f64; 2] = [1.0, 2.0];

/// Horizontal annulus between radii 1 and 2, hot inner wall (T = 1), cold
/// outer wall (T = 0), gravity along −y. `resolution` is the number of radial
/// cells; there are six times as many around the circumference.
fn annulus<S: Real>(spec: &ScenarioSpec<S>) -> Result<(Mesh<S>, SimulationConfig<S>)> {
    let nr = spec.resolution;
    check_resolution("annulus", nr, 2)?;
    let nt = 6 * nr;
    let (r0, r1) = (S::lit(ANNULUS_RADII[0]), S::lit(ANNULUS_RADII[1]));
    let hr = (r1 - r0) / S::lit(nr as f64);
    let two_pi = S::lit(std::f64::consts::TAU);
    let grid = Grid { nx: nr, ny: nt, nz: 1, periodic_j: true };
    let mesh = grid.build(
        |i, j, k| {
            let r = r0 + S::lit(i as f64) * hr;
            let t = two_pi * S::lit(j as f64) / S::lit(nt as f64);
            Vec3::new(r * t.cos(), r * t.sin(), S::lit(k as f64) * hr)
        },
        |_, _, _| false,
        |_, _, _, face, _| match face {
            0 => "inner",
            1 => "outer",
            _ => "side",
        },
    )?;
    let ra = spec.rayleigh.unwrap_or(S::lit(1e4));
    let pr = spec.prandtl.unwrap_or(S::lit(0.7));
    let nu = (pr / ra).sqrt();
    let alpha = S::one() / (ra * pr).sqrt();
    let props = MaterialProps {
        alpha,
        eta: nu,
        rho_inf: S::one(),
        beta: -S::one(),
        t_inf: S::half(),
        gravity: [S::zero(), -S::one(), S::zero()],
    };
    let h_min = hr.min(r0 * two_pi / S::lit(nt as f64));
    let tau = explicit_step(h_min, S::half(), alpha.max(nu));
    let mut config = SimulationConfig::new(tau, 4000, props)
        .with_rule("inner", BoundaryRule::wall().with_temperature(S::one()))
        .with_rule("outer", BoundaryRule::wall().with_temperature(S::zero()))
        .with_rule("side", free_slip());
    config.initial = InitialCondition { temperature: S::half(), ..InitialCondition::default() };
    config.output.cadence = 500;
    config.pressure.cell_update = CellUpdate::Direct;
    let z = hr * S::half();
    let gap = r0 + S::lit(0.25) * (r1 - r0);
    config.probes.push(ProbeSpec {
        name: "above".into(),
        location: ProbeLocation::Position { position: [S::zero(), gap, z] },
        fields: vec![Field::VelocityY, Field::Temperature],
        capacity: None,
    });
    config.probes.push(ProbeSpec {
        name: "below".into(),
        location: ProbeLocation::Position { position: [S::zero(), -gap, z] },
        fields: vec![Field::VelocityY, Field::Temperature],
        capacity: None,
    });
    Ok((mesh, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(kind: ScenarioKind, n: usize) -> (Mesh<f64>, SimulationConfig<f64>) {
        build_scenario(&ScenarioSpec::new(kind, n)).unwrap()
    }

    #[test]
    fn slab_counts() {
        let (m, c) = build(ScenarioKind::Slab, 64);
        assert_eq!(m.n_cells(), 64);
        assert_eq!(m.interior_faces.len(), 63);
        assert_eq!(m.count_tagged("ends"), 2);
        assert_eq!(m.count_tagged("sides"), 256);
        assert_eq!(c.tau, 1e-4);
        for cell in &m.cells {
            assert!((cell.node_vectors[0].norm() - cell.node_vectors[1].norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn cavity_counts() {
        let (m, _) = build(ScenarioKind::Cavity, 16);
        assert_eq!(m.n_cells(), 256);
        assert_eq!(m.count_tagged("lid"), 16);
        // bottom, left, right and both spanwise faces
        assert_eq!(m.count_tagged("wall"), 16 * 3 + 2 * 256);
    }

    #[test]
    fn cylinder_is_carved() {
        let (m, _) = build(ScenarioKind::Cylinder, 8);
        assert!(m.n_cells() < 120 * 40);
        assert!(m.n_cells() > 120 * 40 - 64);
        assert!(m.count_tagged("cylinder") > 0);
    }

    #[test]
    fn annulus_geometry_closes() {
        let (m, _) = build(ScenarioKind::Annulus, 8);
        assert_eq!(m.n_cells(), 8 * 48);
        assert_eq!(m.count_tagged("inner"), 48);
        assert_eq!(m.count_tagged("outer"), 48);
        for c in &m.cells {
            assert!(c.volume > 0.0);
            assert!(c.closure_defect() < 1e-14);
        }
    }

    #[test]
    fn small_resolution_rejected() {
        assert!(build_scenario::<f64>(&ScenarioSpec::new(ScenarioKind::Cavity, 1)).is_err());
    }
}
