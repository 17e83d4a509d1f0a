//! Periodic cellular coarse-graining: nodal values are replaced by a convex
//! combination of the cell's own port values. Ports are never touched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexmesh::{HexCell, Mesh};
use crate::scalar::Real;
use crate::state::{Field, FieldState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weighting<S> {
    /// Proportional to face area.
    FaceArea,
    Uniform,
    Custom { weights: [S; 6] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseningConfig<S> {
    #[serde(default = "default_true")]
    pub enabled: bool,
    /// Full time steps between coarsenings.
    #[serde(default = "default_period")]
    pub period: usize,
    /// Smallest admissible period.
    #[serde(default = "default_period")]
    pub safety_factor: usize,
    #[serde(default = "default_weighting")]
    pub scheme: Weighting<S>,
    #[serde(default = "default_targets")]
    pub targets: Vec<Field>,
}

pub const DEFAULT_PERIOD: usize = 10;

fn default_true() -> bool {
    true
}
fn default_period() -> usize {
    DEFAULT_PERIOD
}
fn default_weighting<S>() -> Weighting<S> {
    Weighting::FaceArea
}
fn default_targets() -> Vec<Field> {
    Field::VELOCITY.to_vec()
}

impl<S: Real> Default for CoarseningConfig<S> {
    fn default() -> Self {
        CoarseningConfig {
            enabled: true,
            period: DEFAULT_PERIOD,
            safety_factor: DEFAULT_PERIOD,
            scheme: Weighting::FaceArea,
            targets: default_targets(),
        }
    }
}

impl<S: Real> CoarseningConfig<S> {
    pub fn disabled() -> Self {
        CoarseningConfig { enabled: false, ..Self::default() }
    }

    pub fn every(period: usize) -> Self {
        CoarseningConfig { period, safety_factor: period.min(DEFAULT_PERIOD), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::config("coarsening.period", "must be >= 1"));
        }
        if self.enabled && self.period < self.safety_factor {
            return Err(Error::config(
                "coarsening.period",
                format!("period {} is below the safety factor {}", self.period, self.safety_factor),
            ));
        }
        if let Weighting::Custom { weights } = &self.scheme {
            check_weights(weights).map_err(|m| Error::config("coarsening.scheme.weights", m))?;
        }
        Ok(())
    }

    pub fn is_due(&self, step_index: usize) -> bool {
        self.enabled && step_index % self.period == 0
    }

    pub fn weights(&self, cell: &HexCell<S>) -> [S; 6] {
        match &self.scheme {
            Weighting::FaceArea => face_area_weights(cell),
            Weighting::Uniform => [S::one() / S::lit(6.0); 6],
            Weighting::Custom { weights } => *weights,
        }
    }
}

fn check_weights<S: Real>(w: &[S; 6]) -> std::result::Result<(), String> {
    if w.iter().any(|x| !(*x >= S::zero() && *x <= S::one())) {
        return Err("each weight must lie in [0, 1]".into());
    }
    let sum: S = w.iter().copied().sum();
    if (sum - S::one()).abs() > S::lit(1e-12).max(S::epsilon() * S::lit(8.0)) {
        return Err(format!("weights sum to {sum}, not 1"));
    }
    Ok(())
}

/// `w_ι = |f_ι| / Σ_κ |f_κ|`
pub fn face_area_weights<S: Real>(cell: &HexCell<S>) -> [S; 6] {
    let total: S = cell.face_areas.iter().copied().sum();
    cell.face_areas.map(|a| a / total)
}

/// `Σ_ι w_ι Z^p_ι`, clamped to the port range so rounding can never leave
/// the convex hull (a constant field stays bit-identical).
#[inline]
pub fn coarsen_cell<S: Real>(ports: &[S; 6], weights: &[S; 6]) -> S {
    let mut sum = S::zero();
    let (mut lo, mut hi) = (ports[0], ports[0]);
    for (p, w) in ports.iter().zip(weights) {
        sum += *p * *w;
        lo = lo.min(*p);
        hi = hi.max(*p);
    }
    sum.max(lo).min(hi)
}

/// Replaces the targeted nodal fields when `step_index` is a multiple of the
/// period. Returns whether anything was done.
pub fn coarsen_sweep<S: Real>(
    mesh: &Mesh<S>,
    state: &mut FieldState<S>,
    config: &CoarseningConfig<S>,
    step_index: usize,
) -> bool {
    if !config.is_due(step_index) {
        return false;
    }
    for (c, cell) in mesh.cells.iter().enumerate() {
        let w = config.weights(cell);
        for field in &config.targets {
            let fi = field.index();
            state.node[fi][c] = coarsen_cell(&state.port[fi][c], &w);
        }
    }
    true
}
