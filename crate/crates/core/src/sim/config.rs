//! Run configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bc::BoundaryRule;
use crate::coarsen::CoarseningConfig;
use crate::error::{Error, Result};
use crate::pressure::PressureSolverConfig;
use crate::reflection::MaterialProps;
use crate::scalar::Real;
use crate::state::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Cavity,
    Step,
    Cylinder,
    Annulus,
    Slab,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] =
        [ScenarioKind::Cavity, ScenarioKind::Step, ScenarioKind::Cylinder, ScenarioKind::Annulus, ScenarioKind::Slab];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Cavity => "cavity",
            ScenarioKind::Step => "step",
            ScenarioKind::Cylinder => "cylinder",
            ScenarioKind::Annulus => "annulus",
            ScenarioKind::Slab => "slab",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn default_resolution(self) -> usize {
        match self {
            ScenarioKind::Cavity => 16,
            ScenarioKind::Step => 4,
            ScenarioKind::Cylinder => 8,
            ScenarioKind::Annulus => 16,
            ScenarioKind::Slab => 64,
        }
    }
}

/// Which built-in geometry to generate and how finely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec<S> {
    pub name: ScenarioKind,
    /// Cells per characteristic length: slab cells, cavity side, cells per
    /// step height, cells per cylinder diameter, radial cells of the annulus.
    pub resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reynolds: Option<S>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rayleigh: Option<S>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prandtl: Option<S>,
}

impl<S> ScenarioSpec<S> {
    pub fn new(name: ScenarioKind, resolution: usize) -> Self {
        ScenarioSpec { name, resolution, reynolds: None, rayleigh: None, prandtl: None }
    }
}

/// Temperature jump across a plane normal to a coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureStep<S> {
    pub axis: usize,
    pub position: S,
    pub below: S,
    pub above: S,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialCondition<S> {
    pub temperature: S,
    pub velocity: [S; 3],
    pub pressure: S,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature_step: Option<TemperatureStep<S>>,
    /// Amplitude `ε` of a cross-stream velocity `u_y += ε sin(x)` added to
    /// break mirror symmetry.
    pub perturbation: S,
}

impl<S: Real> Default for InitialCondition<S> {
    fn default() -> Self {
        InitialCondition {
            temperature: S::zero(),
            velocity: [S::zero(); 3],
            pressure: S::zero(),
            temperature_step: None,
            perturbation: S::zero(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Vtk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Steps between snapshots.
    pub cadence: usize,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { cadence: 100, formats: vec![OutputFormat::Csv] }
    }
}

/// Where a probe samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeLocation<S> {
    Cell { cell: usize },
    Position { position: [S; 3] },
}

/// A named point probe. In files the location is either `cell = <index>` or
/// `position = [x, y, z]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProbeEntry<S>", bound(deserialize = "S: Deserialize<'de>"))]
pub struct ProbeSpec<S> {
    pub name: String,
    #[serde(flatten)]
    pub location: ProbeLocation<S>,
    pub fields: Vec<Field>,
    /// Ring-buffer length; unbounded when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<usize>,
}

fn all_fields() -> Vec<Field> {
    Field::ALL.to_vec()
}

/// File form of [`ProbeSpec`]; a flattened enum cannot reject unknown keys.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeEntry<S> {
    name: String,
    cell: Option<usize>,
    position: Option<[S; 3]>,
    #[serde(default = "all_fields")]
    fields: Vec<Field>,
    capacity: Option<usize>,
}

impl<S> TryFrom<ProbeEntry<S>> for ProbeSpec<S> {
    type Error = String;

    fn try_from(e: ProbeEntry<S>) -> std::result::Result<Self, String> {
        let location = match (e.cell, e.position) {
            (Some(cell), None) => ProbeLocation::Cell { cell },
            (None, Some(position)) => ProbeLocation::Position { position },
            _ => return Err(format!("probe '{}' needs exactly one of `cell` or `position`", e.name)),
        };
        Ok(ProbeSpec { name: e.name, location, fields: e.fields, capacity: e.capacity })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CflLimits<S> {
    pub warn: S,
    pub max: S,
}

impl<S: Real> Default for CflLimits<S> {
    fn default() -> Self {
        CflLimits { warn: S::lit(0.9), max: S::lit(2.0) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "S: Real + Deserialize<'de>"))]
pub struct SimulationConfig<S> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSpec<S>>,
    /// Time step.
    pub tau: S,
    pub steps: usize,
    /// Solve for the velocity; when false it stays at its initial value.
    #[serde(default = "default_true")]
    pub flow: bool,
    pub props: MaterialProps<S>,
    /// Uniform volumetric heat source.
    #[serde(default = "S::zero")]
    pub heat_source: S,
    #[serde(default)]
    pub initial: InitialCondition<S>,
    #[serde(default)]
    pub coarsening: CoarseningConfig<S>,
    #[serde(default)]
    pub pressure: PressureSolverConfig<S>,
    #[serde(default)]
    pub cfl: CflLimits<S>,
    #[serde(default)]
    pub bcs: BTreeMap<String, BoundaryRule<S>>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub probes: Vec<ProbeSpec<S>>,
}

fn default_true() -> bool {
    true
}

impl<S: Real> SimulationConfig<S> {
    /// Closed adiabatic box at rest with the given fluid.
    pub fn new(tau: S, steps: usize, props: MaterialProps<S>) -> Self {
        SimulationConfig {
            scenario: None,
            tau,
            steps,
            flow: true,
            props,
            heat_source: S::zero(),
            initial: InitialCondition::default(),
            coarsening: CoarseningConfig::default(),
            pressure: PressureSolverConfig::default(),
            cfl: CflLimits::default(),
            bcs: BTreeMap::new(),
            output: OutputConfig::default(),
            probes: Vec::new(),
        }
    }

    pub fn with_rule(mut self, tag: &str, rule: BoundaryRule<S>) -> Self {
        self.bcs.insert(tag.to_string(), rule);
        self
    }

    /// Checks everything that does not need the mesh.
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > S::zero() && self.tau.is_finite()) {
            return Err(Error::config("tau", "must be a finite value > 0"));
        }
        if !self.heat_source.is_finite() {
            return Err(Error::config("heat_source", "must be finite"));
        }
        self.props.validate()?;
        self.coarsening.validate()?;
        self.pressure.validate()?;
        if self.output.cadence == 0 {
            return Err(Error::config("output.cadence", "must be >= 1"));
        }
        if !(self.cfl.warn > S::zero() && self.cfl.max >= self.cfl.warn) {
            return Err(Error::config("cfl.max", "limits must satisfy 0 < warn <= max"));
        }
        if let Some(step) = &self.initial.temperature_step {
            if step.axis > 2 {
                return Err(Error::config("initial.temperature_step.axis", "must be 0, 1 or 2"));
            }
        }
        for (tag, rule) in &self.bcs {
            if !rule.is_finite() {
                return Err(Error::config(format!("bcs.{tag}"), "prescribed values must be finite"));
            }
        }
        for (i, p) in self.probes.iter().enumerate() {
            if p.capacity == Some(0) {
                return Err(Error::config(format!("probes[{i}].capacity"), "must be >= 1"));
            }
        }
        if let Some(s) = &self.scenario {
            if s.resolution == 0 {
                return Err(Error::config("scenario.resolution", "must be >= 1"));
            }
        }
        Ok(())
    }
}
