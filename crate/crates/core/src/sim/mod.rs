//! Time stepping: the connection, pressure, coarsening and reflection cycle,
//! the built-in scenarios, and probe recording.

pub mod config;
pub mod probe;
pub mod scenario;

use crate::bc::BoundaryConditions;
use crate::coarsen::coarsen_sweep;
use crate::connection::connection_sweep;
use crate::error::{Error, Result};
use crate::hexmesh::Mesh;
use crate::linalg::Vec3;
use crate::pressure::{project_port_velocities, PressureReport, PressureSolver};
use crate::reflection::{cfl_number, reflection_sweep, SourceField};
use crate::scalar::Real;
use crate::state::{Field, FieldState, Snapshot};

pub use config::{
    CflLimits, InitialCondition, OutputConfig, OutputFormat, ProbeLocation, ProbeSpec, ScenarioKind, ScenarioSpec,
    SimulationConfig, TemperatureStep,
};
pub use probe::Probe;
pub use scenario::{build_scenario, Grid};

/// What happened during one step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport<S> {
    pub step: usize,
    /// Nodal time after the step.
    pub time: S,
    pub pressure: Option<PressureReport<S>>,
    pub coarsened: bool,
    pub cfl: S,
    pub max_speed: S,
}

/// Initial nodal state from `config.initial`, with ports seeded from the nodes.
pub fn initial_state<S: Real>(mesh: &Mesh<S>, config: &SimulationConfig<S>) -> FieldState<S> {
    let ic = &config.initial;
    let mut s = FieldState::uniform(mesh.n_cells(), config.tau, ic.temperature, Vec3(ic.velocity), ic.pressure);
    for (c, cell) in mesh.cells.iter().enumerate() {
        let x = cell.centroid;
        if let Some(step) = &ic.temperature_step {
            s.node[Field::Temperature.index()][c] = if x[step.axis] < step.position { step.below } else { step.above };
        }
        if ic.perturbation != S::zero() {
            s.node[Field::VelocityY.index()][c] += ic.perturbation * x[0].sin();
        }
    }
    s.seed_ports_from_nodes();
    s
}

/// One full time step. Ports advance from `t` to `t + τ` and nodes from
/// `t + τ/2` to `t + 3τ/2`.
pub fn step<S: Real>(
    mesh: &Mesh<S>,
    state: &mut FieldState<S>,
    config: &SimulationConfig<S>,
    bcs: &BoundaryConditions<S>,
    source: &SourceField<S>,
    pressure: &mut PressureSolver<S>,
    step_index: usize,
) -> Result<StepReport<S>> {
    if !state.stamps_consistent() {
        return Err(Error::History(format!(
            "nodes at t = {} and ports at t = {} are not half a step apart",
            state.node_time, state.port_time
        )));
    }
    let fields: &[Field] = if config.flow {
        &[Field::Temperature, Field::VelocityX, Field::VelocityY, Field::VelocityZ]
    } else {
        &[Field::Temperature]
    };
    connection_sweep(mesh, state, fields, bcs)?;
    let pressure = if config.flow {
        let report = pressure.solve(mesh, state, config.props.rho_inf, &config.pressure)?;
        if config.pressure.project_ports {
            project_port_velocities(mesh, state, config.props.rho_inf, bcs);
        }
        Some(report)
    } else {
        None
    };
    let coarsened = coarsen_sweep(mesh, state, &config.coarsening, step_index);
    reflection_sweep(mesh, state, &config.props, source, config.flow)?;
    state.check_finite(step_index)?;
    let (cfl, cell) = cfl_number(mesh, state, &config.props);
    if !(cfl <= config.cfl.max) {
        return Err(Error::CflExceeded {
            cfl: cfl.to_f64_lossy(),
            cell,
            limit: config.cfl.max.to_f64_lossy(),
            step: step_index,
        });
    }
    if cfl > config.cfl.warn {
        log::warn!("step {step_index}: CFL number {cfl} in cell {cell} above {}", config.cfl.warn);
    }
    Ok(StepReport { step: step_index, time: state.node_time, pressure, coarsened, cfl, max_speed: state.max_speed() })
}

/// Receives snapshots during [`Simulation::run`].
pub trait SnapshotSink<S> {
    fn snapshot(&mut self, mesh: &Mesh<S>, step: usize, snapshot: &Snapshot<S>) -> Result<()>;
}

/// Keeps every snapshot in memory.
#[derive(Clone, Debug, Default)]
pub struct MemorySink<S> {
    pub snapshots: Vec<(usize, Snapshot<S>)>,
}

impl<S: Real> SnapshotSink<S> for MemorySink<S> {
    fn snapshot(&mut self, _mesh: &Mesh<S>, step: usize, snapshot: &Snapshot<S>) -> Result<()> {
        self.snapshots.push((step, snapshot.clone()));
        Ok(())
    }
}

/// Discards snapshots.
pub struct NullSink;

impl<S: Real> SnapshotSink<S> for NullSink {
    fn snapshot(&mut self, _mesh: &Mesh<S>, _step: usize, _snapshot: &Snapshot<S>) -> Result<()> {
        Ok(())
    }
}

/// A mesh, its configuration and the evolving state.
#[derive(Clone, Debug)]
pub struct Simulation<S> {
    pub mesh: Mesh<S>,
    pub config: SimulationConfig<S>,
    pub bcs: BoundaryConditions<S>,
    pub source: SourceField<S>,
    pub state: FieldState<S>,
    pub probes: Vec<Probe<S>>,
    pub pressure: PressureSolver<S>,
    /// Number of completed steps.
    pub step_index: usize,
}

impl<S: Real> Simulation<S> {
    pub fn new(mesh: Mesh<S>, config: SimulationConfig<S>) -> Result<Self> {
        config.validate()?;
        let bcs = BoundaryConditions::resolve(&mesh, &config.bcs)?;
        let source = SourceField::uniform(mesh.n_cells(), config.heat_source);
        let state = initial_state(&mesh, &config);
        let probes = config.probes.iter().map(|p| Probe::from_spec(&mesh, p)).collect::<Result<_>>()?;
        let pressure = PressureSolver::new(&mesh, &bcs);
        Ok(Simulation { mesh, config, bcs, source, state, probes, pressure, step_index: 0 })
    }

    pub fn from_scenario(spec: &ScenarioSpec<S>) -> Result<Self> {
        let (mesh, config) = build_scenario(spec)?;
        Self::new(mesh, config)
    }

    pub fn step(&mut self) -> Result<StepReport<S>> {
        let index = self.step_index + 1;
        let report = step(&self.mesh, &mut self.state, &self.config, &self.bcs, &self.source, &mut self.pressure, index)?;
        self.step_index = index;
        for p in &mut self.probes {
            p.sample(&self.state);
        }
        Ok(report)
    }

    /// Runs `config.steps` steps, handing the initial state, every
    /// `output.cadence`-th state and the final state to `sink`.
    pub fn run(&mut self, sink: &mut dyn SnapshotSink<S>) -> Result<Option<StepReport<S>>> {
        let cadence = self.config.output.cadence;
        sink.snapshot(&self.mesh, self.step_index, &self.state.snapshot())?;
        let mut last = None;
        let mut last_written = self.step_index;
        for _ in 0..self.config.steps {
            let report = self.step()?;
            if self.step_index % cadence == 0 {
                sink.snapshot(&self.mesh, self.step_index, &self.state.snapshot())?;
                last_written = self.step_index;
            }
            last = Some(report);
        }
        if last_written != self.step_index {
            sink.snapshot(&self.mesh, self.step_index, &self.state.snapshot())?;
        }
        Ok(last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflection::MaterialProps;

    fn cavity(steps: usize, cadence: usize) -> Simulation<f64> {
        let (mesh, mut config) = build_scenario(&ScenarioSpec::new(ScenarioKind::Cavity, 4)).unwrap();
        config.steps = steps;
        config.output.cadence = cadence;
        Simulation::new(mesh, config).unwrap()
    }

    #[test]
    fn zero_steps_initial_snapshot_only() {
        let mut sim = cavity(0, 10);
        let mut sink = MemorySink::default();
        sim.run(&mut sink).unwrap();
        assert_eq!(sink.snapshots.len(), 1);
        assert_eq!(sink.snapshots[0].0, 0);
    }

    #[test]
    fn long_cadence_gives_initial_and_final() {
        let mut sim = cavity(7, 100);
        let mut sink = MemorySink::default();
        sim.run(&mut sink).unwrap();
        let steps: Vec<_> = sink.snapshots.iter().map(|s| s.0).collect();
        assert_eq!(steps, vec![0, 7]);
        assert_eq!(sim.probes[0].len(), 7);
    }

    #[test]
    fn rest_state_is_fixed_point() {
        let (mesh, mut config) = build_scenario(&ScenarioSpec::<f64>::new(ScenarioKind::Cavity, 4)).unwrap();
        config.bcs.insert("lid".into(), crate::bc::BoundaryRule::wall());
        config.props = MaterialProps { gravity: [0.0, -9.81, 0.0], beta: 0.003, t_inf: 300.0, ..config.props };
        config.initial.temperature = 300.0;
        config.coarsening = crate::coarsen::CoarseningConfig::every(1);
        let mut sim = Simulation::new(mesh, config).unwrap();
        let before = sim.state.clone();
        for _ in 0..50 {
            sim.step().unwrap();
        }
        assert_eq!(sim.state.node, before.node);
        assert_eq!(sim.state.port, before.port);
    }

    #[test]
    fn deterministic() {
        let mut a = cavity(20, 100);
        let mut b = cavity(20, 100);
        a.run(&mut NullSink).unwrap();
        b.run(&mut NullSink).unwrap();
        assert_eq!(a.state, b.state);
    }
}
