//! Nodal and port field values on staggered half time steps, plus the
//! scattering-channel view of a running process.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Scalar field components carried by every scattering channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Temperature = 0,
    VelocityX = 1,
    VelocityY = 2,
    VelocityZ = 3,
    Pressure = 4,
}

pub const N_FIELDS: usize = 5;

impl Field {
    pub const ALL: [Field; N_FIELDS] =
        [Field::Temperature, Field::VelocityX, Field::VelocityY, Field::VelocityZ, Field::Pressure];
    pub const VELOCITY: [Field; 3] = [Field::VelocityX, Field::VelocityY, Field::VelocityZ];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn velocity(k: usize) -> Field {
        Self::VELOCITY[k]
    }

    /// Name used in configuration files and output columns.
    pub const fn key(self) -> &'static str {
        match self {
            Field::Temperature => "temperature",
            Field::VelocityX => "velocity_x",
            Field::VelocityY => "velocity_y",
            Field::VelocityZ => "velocity_z",
            Field::Pressure => "pressure",
        }
    }

    /// Short symbol.
    pub const fn name(self) -> &'static str {
        match self {
            Field::Temperature => "T",
            Field::VelocityX => "u_x",
            Field::VelocityY => "u_y",
            Field::VelocityZ => "u_z",
            Field::Pressure => "p",
        }
    }
}

/// Complete DSC state. Ports are stamped at `port_time`, nodes at
/// `node_time = port_time + τ/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState<S> {
    /// `node[field][cell]`
    pub node: [Vec<S>; N_FIELDS],
    /// `port[field][cell][face]`
    pub port: [Vec<[S; 6]>; N_FIELDS],
    /// Face gradients recovered in the connection step, `grad[field][cell][face]`.
    pub grad: [Vec<[Vec3<S>; 6]>; N_FIELDS],
    pub port_time: S,
    pub node_time: S,
    pub tau: S,
}

impl<S: Real> FieldState<S> {
    /// Zero state at rest: ports at `t = 0`, nodes at `τ/2`.
    pub fn new(n_cells: usize, tau: S) -> Self {
        FieldState {
            node: std::array::from_fn(|_| vec![S::zero(); n_cells]),
            port: std::array::from_fn(|_| vec![[S::zero(); 6]; n_cells]),
            grad: std::array::from_fn(|_| vec![[Vec3::zero(); 6]; n_cells]),
            port_time: S::zero(),
            node_time: tau * S::half(),
            tau,
        }
    }

    /// Spatially constant state, with ports equal to the nodal values.
    pub fn uniform(n_cells: usize, tau: S, temperature: S, velocity: Vec3<S>, pressure: S) -> Self {
        let mut s = Self::new(n_cells, tau);
        let values = [temperature, velocity[0], velocity[1], velocity[2], pressure];
        for (f, v) in values.into_iter().enumerate() {
            s.node[f].iter_mut().for_each(|x| *x = v);
            s.port[f].iter_mut().for_each(|x| *x = [v; 6]);
        }
        s
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.node[0].len()
    }

    #[inline]
    pub fn nodes(&self, f: Field) -> &[S] {
        &self.node[f.index()]
    }

    #[inline]
    pub fn nodes_mut(&mut self, f: Field) -> &mut [S] {
        &mut self.node[f.index()]
    }

    #[inline]
    pub fn ports(&self, f: Field) -> &[[S; 6]] {
        &self.port[f.index()]
    }

    #[inline]
    pub fn ports_mut(&mut self, f: Field) -> &mut [[S; 6]] {
        &mut self.port[f.index()]
    }

    #[inline]
    pub fn temperature(&self, cell: usize) -> S {
        self.node[0][cell]
    }

    #[inline]
    pub fn pressure(&self, cell: usize) -> S {
        self.node[4][cell]
    }

    #[inline]
    pub fn velocity(&self, cell: usize) -> Vec3<S> {
        Vec3([self.node[1][cell], self.node[2][cell], self.node[3][cell]])
    }

    pub fn set_velocity(&mut self, cell: usize, u: Vec3<S>) {
        for k in 0..3 {
            self.node[1 + k][cell] = u[k];
        }
    }

    #[inline]
    pub fn port_velocity(&self, cell: usize, face: usize) -> Vec3<S> {
        Vec3([self.port[1][cell][face], self.port[2][cell][face], self.port[3][cell][face]])
    }

    pub fn set_port_velocity(&mut self, cell: usize, face: usize, u: Vec3<S>) {
        for k in 0..3 {
            self.port[1 + k][cell][face] = u[k];
        }
    }

    /// Largest nodal speed.
    pub fn max_speed(&self) -> S {
        (0..self.n_cells()).map(|c| self.velocity(c).norm()).fold(S::zero(), S::max)
    }

    /// Copies nodal values into all six ports of their cell.
    pub fn seed_ports_from_nodes(&mut self) {
        for f in 0..N_FIELDS {
            for (p, n) in self.port[f].iter_mut().zip(&self.node[f]) {
                *p = [*n; 6];
            }
        }
    }

    /// Health check: every nodal and port value finite.
    pub fn check_finite(&self, step: usize) -> Result<()> {
        for f in Field::ALL {
            if let Some(cell) = self.nodes(f).iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { field: f.name(), cell, step });
            }
            if let Some(cell) = self.ports(f).iter().position(|p| p.iter().any(|v| !v.is_finite())) {
                return Err(Error::NonFinite { field: f.name(), cell, step });
            }
        }
        Ok(())
    }

    /// Stamps satisfy `node_time − port_time = τ/2`.
    pub fn stamps_consistent(&self) -> bool {
        let d = self.node_time - self.port_time - self.tau * S::half();
        d.abs() <= S::epsilon() * S::lit(64.0) * (self.tau + self.node_time.abs())
    }

    /// Dense per-cell arrays for output.
    pub fn snapshot(&self) -> Snapshot<S> {
        Snapshot {
            time: self.node_time,
            temperature: self.node[0].clone(),
            velocity: (0..self.n_cells()).map(|c| self.velocity(c).0).collect(),
            pressure: self.node[4].clone(),
        }
    }

    /// All channels in `(cell, face, field)` order.
    pub fn channels(&self) -> Vec<Channel<S>> {
        let mut out = Vec::with_capacity(self.n_cells() * 6 * N_FIELDS);
        for cell in 0..self.n_cells() {
            for face in 0..6 {
                for f in 0..N_FIELDS {
                    out.push(Channel { port: self.port[f][cell][face], node: self.node[f][cell] });
                }
            }
        }
        out
    }

    /// Port values of [`Self::channels`] in the same order.
    pub fn channel_ports(&self) -> Vec<S> {
        self.channels().into_iter().map(|c| c.port).collect()
    }

    /// Nodal images of [`Self::channels`] in the same order.
    pub fn channel_nodes(&self) -> Vec<S> {
        self.channels().into_iter().map(|c| c.node).collect()
    }
}

/// Per-cell dense output arrays in mesh cell order.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<S> {
    pub time: S,
    pub temperature: Vec<S>,
    pub velocity: Vec<[S; 3]>,
    pub pressure: Vec<S>,
}

impl<S: Real> Snapshot<S> {
    pub fn len(&self) -> usize {
        self.temperature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temperature.is_empty()
    }

    pub fn speed(&self, cell: usize) -> S {
        Vec3(self.velocity[cell]).norm()
    }
}

/// One scattering channel: a port value and its nodal image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Channel<V> {
    pub port: V,
    pub node: V,
}

/// Exchanges port and node components.
#[inline]
pub fn node_boundary_map<V>(c: Channel<V>) -> Channel<V> {
    Channel { port: c.node, node: c.port }
}

/// Which half of the cycle a history entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Port values at integer multiples of τ.
    Port,
    /// Nodal values at odd multiples of τ/2.
    Node,
}

/// One recorded instant of a process, channel values in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryEntry<S> {
    pub time: S,
    pub stage: Stage,
    pub values: Vec<S>,
}

/// Incident (port-side) and outgoing (node-side) fields of a process,
/// keeping a bounded number of recent half steps.
#[derive(Clone, Debug)]
pub struct ScatteringView<S> {
    tau: S,
    depth: usize,
    n_channels: usize,
    incident: VecDeque<(S, Vec<S>)>,
    outgoing: VecDeque<(S, Vec<S>)>,
    expect: Stage,
    next_time: S,
    max_defect: S,
}

pub const DEFAULT_HISTORY_DEPTH: usize = 2;

impl<S: Real> ScatteringView<S> {
    pub fn new(n_channels: usize, tau: S) -> Self {
        Self::with_depth(n_channels, tau, DEFAULT_HISTORY_DEPTH)
    }

    pub fn with_depth(n_channels: usize, tau: S, depth: usize) -> Self {
        ScatteringView {
            tau,
            depth: depth.max(1),
            n_channels,
            incident: VecDeque::new(),
            outgoing: VecDeque::new(),
            expect: Stage::Port,
            next_time: S::zero(),
            max_defect: S::zero(),
        }
    }

    fn check_time(&self, t: S, stage: Stage) -> Result<()> {
        if stage != self.expect {
            return Err(Error::History(format!("expected a {:?} record, got {stage:?}", self.expect)));
        }
        let tol = S::epsilon() * S::lit(64.0) * (self.tau + t.abs());
        if (t - self.next_time).abs() > tol {
            if self.incident.is_empty() && self.outgoing.is_empty() {
                return Err(Error::History(format!(
                    "history must start at rest with ports at t = 0, first record at t = {t}"
                )));
            }
            return Err(Error::History(format!("expected t = {}, got t = {t}", self.next_time)));
        }
        Ok(())
    }

    fn push(buf: &mut VecDeque<(S, Vec<S>)>, depth: usize, t: S, v: Vec<S>) {
        buf.push_back((t, v));
        while buf.len() > depth {
            buf.pop_front();
        }
    }

    fn relative_gap(a: S, b: S, c: S) -> S {
        (a - (b + c)).abs() / S::one().max(a.abs()).max(b.abs()).max(c.abs())
    }

    /// `z_in^p(t) = z^p(t) − nb∘z_out^n(t − τ/2)`.
    pub fn record_ports(&mut self, t: S, ports: &[S]) -> Result<()> {
        self.check_time(t, Stage::Port)?;
        if ports.len() != self.n_channels {
            return Err(Error::History(format!("expected {} channels, got {}", self.n_channels, ports.len())));
        }
        let prev = self.outgoing.back().map(|(_, v)| v.as_slice());
        let incident: Vec<S> = match prev {
            Some(out) => ports.iter().zip(out).map(|(p, o)| *p - *o).collect(),
            None => ports.to_vec(),
        };
        let zero = S::zero();
        for (i, (p, inc)) in ports.iter().zip(&incident).enumerate() {
            let out = prev.map_or(zero, |o| o[i]);
            self.max_defect = self.max_defect.max(Self::relative_gap(*p, out, *inc));
        }
        Self::push(&mut self.incident, self.depth, t, incident);
        self.expect = Stage::Node;
        self.next_time = t + self.tau * S::half();
        Ok(())
    }

    /// `z_out^n(t + τ/2) = z^n(t + τ/2) − nb∘z_in^p(t)`.
    pub fn record_nodes(&mut self, t: S, nodes: &[S]) -> Result<()> {
        self.check_time(t, Stage::Node)?;
        if nodes.len() != self.n_channels {
            return Err(Error::History(format!("expected {} channels, got {}", self.n_channels, nodes.len())));
        }
        let inc = &self.incident.back().expect("ports recorded before nodes").1;
        let outgoing: Vec<S> = nodes.iter().zip(inc).map(|(n, i)| *n - *i).collect();
        for ((n, i), o) in nodes.iter().zip(inc).zip(&outgoing) {
            self.max_defect = self.max_defect.max(Self::relative_gap(*n, *i, *o));
        }
        Self::push(&mut self.outgoing, self.depth, t, outgoing);
        self.expect = Stage::Port;
        self.next_time = t + self.tau * S::half();
        Ok(())
    }

    pub fn record(&mut self, entry: &HistoryEntry<S>) -> Result<()> {
        match entry.stage {
            Stage::Port => self.record_ports(entry.time, &entry.values),
            Stage::Node => self.record_nodes(entry.time, &entry.values),
        }
    }

    pub fn incident_at(&self, t: S) -> Option<&[S]> {
        Self::lookup(&self.incident, t, self.tau)
    }

    pub fn outgoing_at(&self, t: S) -> Option<&[S]> {
        Self::lookup(&self.outgoing, t, self.tau)
    }

    fn lookup(buf: &VecDeque<(S, Vec<S>)>, t: S, tau: S) -> Option<&[S]> {
        let tol = S::epsilon() * S::lit(64.0) * (tau + t.abs());
        buf.iter().find(|(s, _)| (*s - t).abs() <= tol).map(|(_, v)| v.as_slice())
    }

    /// Largest relative defect of the reconstruction identities seen so far.
    pub fn max_defect(&self) -> S {
        self.max_defect
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// Runs the incident/outgoing recursion over a recorded process history.
pub fn decompose_incident_outgoing<S: Real>(
    history: &[HistoryEntry<S>],
    tau: S,
    depth: usize,
) -> Result<ScatteringView<S>> {
    let n = history.first().map_or(0, |h| h.values.len());
    let mut view = ScatteringView::with_depth(n, tau, depth);
    for entry in history {
        view.record(entry)?;
    }
    Ok(view)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_boundary_map_swaps_and_is_involution() {
        let c = Channel { port: 1.5, node: -2.0 };
        assert_eq!(node_boundary_map(c), Channel { port: -2.0, node: 1.5 });
        assert_eq!(node_boundary_map(node_boundary_map(c)), c);
    }

    #[test]
    fn uniform_state_stamps() {
        let s = FieldState::uniform(3, 0.1, 300.0, Vec3::new(1.0, 0.0, 0.0), 0.0);
        assert!(s.stamps_consistent());
        assert_eq!(s.port_velocity(2, 5), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(s.snapshot().temperature, vec![300.0; 3]);
    }

    #[test]
    fn zero_process_has_zero_fields() {
        let mut v = ScatteringView::new(4, 1.0);
        for m in 0..5 {
            v.record_ports(m as f64, &[0.0; 4]).unwrap();
            v.record_nodes(m as f64 + 0.5, &[0.0; 4]).unwrap();
            assert_eq!(v.incident_at(m as f64).unwrap(), &[0.0; 4]);
            assert_eq!(v.outgoing_at(m as f64 + 0.5).unwrap(), &[0.0; 4]);
        }
    }

    #[test]
    fn impulse_is_incident_at_zero() {
        let mut v = ScatteringView::new(2, 0.2);
        v.record_ports(0.0, &[3.0, -1.0]).unwrap();
        assert_eq!(v.incident_at(0.0).unwrap(), &[3.0, -1.0]);
    }

    #[test]
    fn three_step_history_by_hand() {
        // single channel: ports 1, 4, 2 at t = 0, 1, 2; nodes 3, 5, 7 at t = .5, 1.5, 2.5
        let ports = [1.0, 4.0, 2.0];
        let nodes = [3.0, 5.0, 7.0];
        let mut v = ScatteringView::with_depth(1, 1.0, 8);
        let (mut inc, mut out) = (Vec::new(), Vec::new());
        let mut last_out = 0.0;
        for m in 0..3 {
            let i = ports[m] - last_out;
            let o = nodes[m] - i;
            inc.push(i);
            out.push(o);
            last_out = o;
            v.record_ports(m as f64, &[ports[m]]).unwrap();
            v.record_nodes(m as f64 + 0.5, &[nodes[m]]).unwrap();
        }
        assert_eq!(inc, vec![1.0, 2.0, -1.0]);
        assert_eq!(out, vec![2.0, 3.0, 8.0]);
        for m in 0..3 {
            assert_eq!(v.incident_at(m as f64).unwrap()[0], inc[m]);
            assert_eq!(v.outgoing_at(m as f64 + 0.5).unwrap()[0], out[m]);
        }
        assert_eq!(v.max_defect(), 0.0);
    }

    #[test]
    fn history_not_starting_at_rest_rejected() {
        let h = vec![HistoryEntry { time: 0.5, stage: Stage::Port, values: vec![1.0] }];
        assert!(matches!(decompose_incident_outgoing(&h, 1.0, 2), Err(Error::History(_))));
        let h = vec![HistoryEntry { time: 0.0, stage: Stage::Node, values: vec![1.0] }];
        assert!(decompose_incident_outgoing(&h, 1.0, 2).is_err());
    }

    #[test]
    fn ring_depth_bounds_memory() {
        let mut v = ScatteringView::with_depth(1, 1.0, 2);
        for m in 0..10 {
            v.record_ports(m as f64, &[m as f64]).unwrap();
            v.record_nodes(m as f64 + 0.5, &[0.0]).unwrap();
        }
        assert!(v.incident_at(9.0).is_some());
        assert!(v.incident_at(8.0).is_some());
        assert!(v.incident_at(7.0).is_none());
    }

    #[test]
    fn nonfinite_detected() {
        let mut s = FieldState::<f64>::new(2, 1.0);
        s.node[2][1] = f64::NAN;
        assert!(matches!(s.check_finite(4), Err(Error::NonFinite { cell: 1, step: 4, .. })));
    }
}
