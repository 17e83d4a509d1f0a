//! Point probes recording nodal time traces.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::hexmesh::Mesh;
use crate::linalg::Vec3;
use crate::scalar::Real;
use crate::sim::config::{ProbeLocation, ProbeSpec};
use crate::state::{Field, FieldState};

#[derive(Clone, Debug, PartialEq)]
pub struct Probe<S> {
    pub name: String,
    pub cell: usize,
    pub fields: Vec<Field>,
    capacity: Option<usize>,
    /// `(node time, values in field order)`
    pub records: VecDeque<(S, Vec<S>)>,
}

impl<S: Real> Probe<S> {
    pub fn new(name: impl Into<String>, cell: usize, fields: Vec<Field>, capacity: Option<usize>) -> Self {
        Probe { name: name.into(), cell, fields, capacity, records: VecDeque::new() }
    }

    pub fn from_spec(mesh: &Mesh<S>, spec: &ProbeSpec<S>) -> Result<Self> {
        let cell = match &spec.location {
            ProbeLocation::Cell { cell } => {
                if *cell >= mesh.n_cells() {
                    return Err(Error::config(
                        format!("probes.{}", spec.name),
                        format!("cell {cell} out of range ({} cells)", mesh.n_cells()),
                    ));
                }
                *cell
            }
            ProbeLocation::Position { position } => mesh.locate(&Vec3(*position)).ok_or_else(|| {
                Error::config(format!("probes.{}", spec.name), format!("position {position:?} is outside the mesh"))
            })?,
        };
        Ok(Probe::new(spec.name.clone(), cell, spec.fields.clone(), spec.capacity))
    }

    pub fn sample(&mut self, state: &FieldState<S>) {
        let values = self.fields.iter().map(|f| state.nodes(*f)[self.cell]).collect();
        self.records.push_back((state.node_time, values));
        if let Some(cap) = self.capacity {
            while self.records.len() > cap {
                self.records.pop_front();
            }
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `(time, value)` pairs of one sampled field.
    pub fn trace(&self, field: Field) -> Option<Vec<(S, S)>> {
        let k = self.fields.iter().position(|f| *f == field)?;
        Some(self.records.iter().map(|(t, v)| (*t, v[k])).collect())
    }
}
