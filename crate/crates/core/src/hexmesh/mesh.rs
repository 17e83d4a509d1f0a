//! Mesh topology: interior face pairing and boundary tagging.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::hexmesh::cell::{HexCell, FACE_VERTICES};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// A local face of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceRef {
    pub cell: usize,
    pub face: usize,
}

/// What lies across a local face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceLink {
    Interior(FaceRef),
    /// Index into [`Mesh::tags`].
    Boundary(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InteriorFace {
    pub a: FaceRef,
    pub b: FaceRef,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryFace {
    pub at: FaceRef,
    pub tag: usize,
}

/// Boundary specification as given by a mesh file or generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundarySpec {
    pub cell: usize,
    pub face: usize,
    pub tag: String,
}

impl BoundarySpec {
    pub fn new(cell: usize, face: usize, tag: impl Into<String>) -> Self {
        BoundarySpec { cell, face, tag: tag.into() }
    }
}

#[derive(Clone, Debug)]
pub struct Mesh<S> {
    pub vertices: Vec<Vec3<S>>,
    pub cells: Vec<HexCell<S>>,
    pub links: Vec<[FaceLink; 6]>,
    pub interior_faces: Vec<InteriorFace>,
    pub boundary_faces: Vec<BoundaryFace>,
    /// Distinct boundary tags in order of first appearance.
    pub tags: Vec<String>,
}

fn face_key(ids: &[usize; 8], face: usize) -> [usize; 4] {
    let mut k = FACE_VERTICES[face].map(|v| ids[v]);
    k.sort_unstable();
    k
}

/// Builds a mesh, pairing interior faces by their sorted vertex quadruple.
pub fn build_mesh<S: Real>(
    vertices: Vec<Vec3<S>>,
    hexes: &[[usize; 8]],
    boundary: &[BoundarySpec],
) -> Result<Mesh<S>> {
    let mut cells = Vec::with_capacity(hexes.len());
    for (index, ids) in hexes.iter().enumerate() {
        if let Some(bad) = ids.iter().find(|&&v| v >= vertices.len()) {
            return Err(Error::Topology(format!("cell {index} references missing vertex {bad}")));
        }
        let pos = ids.map(|v| vertices[v]);
        cells.push(HexCell::new(index, *ids, &pos)?);
    }

    let mut open: HashMap<[usize; 4], FaceRef> = HashMap::new();
    let mut links: Vec<[Option<FaceLink>; 6]> = vec![[None; 6]; cells.len()];
    let mut interior_faces = Vec::new();
    for (cell, ids) in hexes.iter().enumerate() {
        for face in 0..6 {
            let key = face_key(ids, face);
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Topology(format!("cell {cell} face {face} repeats a vertex")));
            }
            let here = FaceRef { cell, face };
            match open.remove(&key) {
                None => {
                    open.insert(key, here);
                }
                Some(other) => {
                    if links[other.cell][other.face].is_some() {
                        return Err(Error::Topology(format!(
                            "face {key:?} shared by more than two cells"
                        )));
                    }
                    let fa = cells[other.cell].face_vectors[other.face];
                    let fb = cells[cell].face_vectors[face];
                    if !(fa.dot(&fb) < S::zero()) {
                        return Err(Error::Topology(format!(
                            "inconsistent orientation between cell {} face {} and cell {cell} face {face}",
                            other.cell, other.face
                        )));
                    }
                    links[other.cell][other.face] = Some(FaceLink::Interior(here));
                    links[cell][face] = Some(FaceLink::Interior(other));
                    interior_faces.push(InteriorFace { a: other, b: here });
                }
            }
        }
    }

    let mut tags: Vec<String> = Vec::new();
    let mut boundary_faces = Vec::with_capacity(boundary.len());
    for spec in boundary {
        if spec.cell >= cells.len() || spec.face >= 6 {
            return Err(Error::Topology(format!(
                "boundary entry ({}, {}) out of range",
                spec.cell, spec.face
            )));
        }
        match links[spec.cell][spec.face] {
            Some(FaceLink::Interior(_)) => {
                return Err(Error::Topology(format!(
                    "cell {} face {} is interior but tagged '{}'",
                    spec.cell, spec.face, spec.tag
                )))
            }
            Some(FaceLink::Boundary(_)) => {
                return Err(Error::Topology(format!("cell {} face {} tagged twice", spec.cell, spec.face)))
            }
            None => {}
        }
        let tag = match tags.iter().position(|t| *t == spec.tag) {
            Some(t) => t,
            None => {
                tags.push(spec.tag.clone());
                tags.len() - 1
            }
        };
        links[spec.cell][spec.face] = Some(FaceLink::Boundary(tag));
        boundary_faces.push(BoundaryFace { at: FaceRef { cell: spec.cell, face: spec.face }, tag });
    }

    let mut resolved = Vec::with_capacity(links.len());
    for (cell, l) in links.iter().enumerate() {
        let mut row = [FaceLink::Boundary(0); 6];
        for face in 0..6 {
            row[face] = l[face].ok_or_else(|| {
                Error::Topology(format!("cell {cell} face {face} is unmatched and has no boundary tag"))
            })?;
        }
        resolved.push(row);
    }

    Ok(Mesh { vertices, cells, links: resolved, interior_faces, boundary_faces, tags })
}

impl<S: Real> Mesh<S> {
    #[inline]
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn tag_index(&self, name: &str) -> Option<usize> {
        self.tags.iter().position(|t| t == name)
    }

    /// Number of boundary faces carrying tag `name`.
    pub fn count_tagged(&self, name: &str) -> usize {
        match self.tag_index(name) {
            Some(t) => self.boundary_faces.iter().filter(|b| b.tag == t).count(),
            None => 0,
        }
    }

    pub fn total_volume(&self) -> S {
        self.cells.iter().map(|c| c.volume).sum()
    }

    /// Cell whose centroid is nearest to `point`.
    pub fn nearest_cell(&self, point: &Vec3<S>) -> Option<usize> {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c.centroid - *point).norm_squared()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
    }

    /// Axis-aligned bounding box of a cell's vertices.
    pub fn cell_bounds(&self, cell: usize) -> (Vec3<S>, Vec3<S>) {
        let ids = self.cells[cell].vertex_ids;
        let mut lo = self.vertices[ids[0]];
        let mut hi = lo;
        for &v in &ids[1..] {
            let p = self.vertices[v];
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Cell containing `point` (bounding-box test refined by nearest centroid).
    pub fn locate(&self, point: &Vec3<S>) -> Option<usize> {
        let cell = self.nearest_cell(point)?;
        let (lo, hi) = self.cell_bounds(cell);
        let tol = self.cells[cell].spacing * S::lit(1e-9);
        let inside = (0..3).all(|k| point[k] >= lo[k] - tol && point[k] <= hi[k] + tol);
        inside.then_some(cell)
    }
}
