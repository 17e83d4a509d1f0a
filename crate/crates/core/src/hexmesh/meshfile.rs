//! Plain-text mesh format (see `docs/mesh_format.md`).
//!
//! ```text
//! hexmesh <n_vertices> <n_cells> <n_boundary>
//! <x> <y> <z>                      (n_vertices lines)
//! <v0> <v1> ... <v7>               (n_cells lines, VTK hexahedron order)
//! <cell> <local face 0-5> <tag>    (n_boundary lines)
//! ```
//!
//! Lines starting with `#` and blank lines are ignored.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::hexmesh::mesh::{build_mesh, BoundarySpec, Mesh};
use crate::linalg::Vec3;
use crate::scalar::Real;

const MAGIC: &str = "hexmesh";

/// Unvalidated contents of a mesh file.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshData<S> {
    pub vertices: Vec<Vec3<S>>,
    pub hexes: Vec<[usize; 8]>,
    pub boundary: Vec<BoundarySpec>,
}

impl<S: Real> MeshData<S> {
    pub fn build(self) -> Result<Mesh<S>> {
        build_mesh(self.vertices, &self.hexes, &self.boundary)
    }

    pub fn from_mesh(mesh: &Mesh<S>) -> Self {
        MeshData {
            vertices: mesh.vertices.clone(),
            hexes: mesh.cells.iter().map(|c| c.vertex_ids).collect(),
            boundary: mesh
                .boundary_faces
                .iter()
                .map(|b| BoundarySpec::new(b.at.cell, b.at.face, mesh.tags[b.tag].clone()))
                .collect(),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

pub fn read_mesh_data<S: Real, R: BufRead>(reader: R) -> Result<MeshData<S>> {
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('#') => None,
        Ok(s) => Some(Ok((i + 1, s))),
        Err(e) => Some(Err(Error::Io(e))),
    });
    let mut next = |what: &str| -> Result<(usize, String)> {
        lines.next().unwrap_or_else(|| Err(parse_err(0, format!("unexpected end of file, expected {what}"))))
    };

    let (ln, header) = next("header")?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some(MAGIC) {
        return Err(parse_err(ln, format!("header must start with '{MAGIC}'")));
    }
    let nv: usize = field(tok.next(), ln, "vertex count")?;
    let nc: usize = field(tok.next(), ln, "cell count")?;
    let nb: usize = field(tok.next(), ln, "boundary count")?;
    if tok.next().is_some() {
        return Err(parse_err(ln, "trailing tokens in header"));
    }

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, s) = next("vertex line")?;
        let mut t = s.split_whitespace();
        let x: S = field(t.next(), ln, "x")?;
        let y: S = field(t.next(), ln, "y")?;
        let z: S = field(t.next(), ln, "z")?;
        if t.next().is_some() {
            return Err(parse_err(ln, "vertex line must have exactly 3 coordinates"));
        }
        let v = Vec3::new(x, y, z);
        if !v.is_finite() {
            return Err(parse_err(ln, "vertex coordinates must be finite"));
        }
        vertices.push(v);
    }

    let mut hexes = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, s) = next("hexahedron line")?;
        let ids: Vec<usize> = s
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("invalid vertex index '{t}'"))))
            .collect::<Result<_>>()?;
        let ids: [usize; 8] = ids
            .try_into()
            .map_err(|_| parse_err(ln, "hexahedron line must have exactly 8 vertex indices"))?;
        if let Some(bad) = ids.iter().find(|&&i| i >= nv) {
            return Err(parse_err(ln, format!("vertex index {bad} out of range")));
        }
        hexes.push(ids);
    }

    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, s) = next("boundary line")?;
        let mut t = s.split_whitespace();
        let cell: usize = field(t.next(), ln, "cell index")?;
        let face: usize = field(t.next(), ln, "local face")?;
        let tag: String = field(t.next(), ln, "tag")?;
        if cell >= nc || face > 5 {
            return Err(parse_err(ln, "boundary entry out of range"));
        }
        if t.next().is_some() {
            return Err(parse_err(ln, "boundary tags may not contain whitespace"));
        }
        boundary.push(BoundarySpec { cell, face, tag });
    }
    if let Some(extra) = lines.next() {
        let (ln, _) = extra?;
        return Err(parse_err(ln, "unexpected content after boundary section"));
    }
    Ok(MeshData { vertices, hexes, boundary })
}

pub fn read_mesh<S: Real, R: BufRead>(reader: R) -> Result<Mesh<S>> {
    read_mesh_data(reader)?.build()
}

/// Writes floats in shortest round-trip form, so reading back is bit-exact.
pub fn write_mesh<S: Real, W: Write>(mesh: &Mesh<S>, mut w: W) -> Result<()> {
    let data = MeshData::from_mesh(mesh);
    writeln!(w, "{MAGIC} {} {} {}", data.vertices.len(), data.hexes.len(), data.boundary.len())?;
    for v in &data.vertices {
        writeln!(w, "{} {} {}", v[0], v[1], v[2])?;
    }
    for h in &data.hexes {
        let s: Vec<String> = h.iter().map(|i| i.to_string()).collect();
        writeln!(w, "{}", s.join(" "))?;
    }
    for b in &data.boundary {
        writeln!(w, "{} {} {}", b.cell, b.face, b.tag)?;
    }
    Ok(())
}
