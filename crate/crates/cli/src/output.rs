//! Snapshot writers (CSV, legacy ASCII VTK) and tidy probe traces.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same value, so files reproduce the in-memory arrays exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dscflow::sim::{OutputFormat, Probe, SnapshotSink};
use dscflow::{Mesh, Real, Result, Snapshot};

pub const SNAPSHOT_COLUMNS: [&str; 10] =
    ["cell", "x", "y", "z", "temperature", "velocity_x", "velocity_y", "velocity_z", "pressure", "speed"];

fn csv_error(e: csv::Error) -> dscflow::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

/// One row per cell: centroid, T, u, p and |u|.
pub fn write_snapshot_csv<S: Real, W: Write>(mesh: &Mesh<S>, snap: &Snapshot<S>, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SNAPSHOT_COLUMNS).map_err(csv_error)?;
    for (c, cell) in mesh.cells.iter().enumerate() {
        let x = cell.centroid;
        let u = snap.velocity[c];
        let row = [
            c.to_string(),
            x.0[0].to_string(),
            x.0[1].to_string(),
            x.0[2].to_string(),
            snap.temperature[c].to_string(),
            u[0].to_string(),
            u[1].to_string(),
            u[2].to_string(),
            snap.pressure[c].to_string(),
            snap.speed(c).to_string(),
        ];
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

/// Unstructured hexahedral grid with cell data `temperature`, `pressure`,
/// `speed` and the `velocity` vector.
pub fn write_snapshot_vtk<S: Real, W: Write>(mesh: &Mesh<S>, snap: &Snapshot<S>, title: &str, mut w: W) -> Result<()> {
    let n = mesh.n_cells();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    // the title line may hold at most 255 characters and no newline
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.vertices.len())?;
    for v in &mesh.vertices {
        writeln!(w, "{} {} {}", v.0[0], v.0[1], v.0[2])?;
    }
    writeln!(w, "CELLS {} {}", n, 9 * n)?;
    for cell in &mesh.cells {
        let ids = cell.vertex_ids;
        writeln!(w, "8 {} {} {} {} {} {} {} {}", ids[0], ids[1], ids[2], ids[3], ids[4], ids[5], ids[6], ids[7])?;
    }
    writeln!(w, "CELL_TYPES {n}")?;
    for _ in 0..n {
        writeln!(w, "12")?;
    }
    writeln!(w, "CELL_DATA {n}")?;
    let scalars: [(&str, Box<dyn Fn(usize) -> S>); 3] = [
        ("temperature", Box::new(|c| snap.temperature[c])),
        ("pressure", Box::new(|c| snap.pressure[c])),
        ("speed", Box::new(|c| snap.speed(c))),
    ];
    for (name, value) in &scalars {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for c in 0..n {
            writeln!(w, "{}", value(c))?;
        }
    }
    writeln!(w, "VECTORS velocity double")?;
    for u in &snap.velocity {
        writeln!(w, "{} {} {}", u[0], u[1], u[2])?;
    }
    w.flush()?;
    Ok(())
}

/// Tidy rows `time,probe,field,value`.
pub fn write_probes_csv<S: Real, W: Write>(probes: &[Probe<S>], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time", "probe", "field", "value"]).map_err(csv_error)?;
    for p in probes {
        for (t, values) in &p.records {
            for (f, v) in p.fields.iter().zip(values) {
                out.write_record([t.to_string().as_str(), &p.name, f.key(), &v.to_string()]).map_err(csv_error)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes each snapshot as `<prefix>_<step>.csv` / `.vtk` in a directory.
pub struct DirectorySink {
    pub dir: PathBuf,
    pub prefix: String,
    pub formats: Vec<OutputFormat>,
    /// Files written so far, in order.
    pub written: Vec<PathBuf>,
}

impl DirectorySink {
    pub fn new(dir: impl Into<PathBuf>, prefix: impl Into<String>, formats: Vec<OutputFormat>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(DirectorySink { dir, prefix: prefix.into(), formats, written: Vec::new() })
    }

    pub fn path_for(&self, step: usize, format: OutputFormat) -> PathBuf {
        let ext = match format {
            OutputFormat::Csv => "csv",
            OutputFormat::Vtk => "vtk",
        };
        self.dir.join(format!("{}_{step:06}.{ext}", self.prefix))
    }
}

impl<S: Real> SnapshotSink<S> for DirectorySink {
    fn snapshot(&mut self, mesh: &Mesh<S>, step: usize, snapshot: &Snapshot<S>) -> Result<()> {
        for &format in &self.formats {
            let path = self.path_for(step, format);
            let w = create(&path)?;
            match format {
                OutputFormat::Csv => write_snapshot_csv(mesh, snapshot, w)?,
                OutputFormat::Vtk => {
                    let title = format!("dscflow step {step} time {}", snapshot.time);
                    write_snapshot_vtk(mesh, snapshot, &title, w)?
                }
            }
            self.written.push(path);
        }
        Ok(())
    }
}

pub fn write_probes_file<S: Real>(probes: &[Probe<S>], path: &Path) -> Result<()> {
    write_probes_csv(probes, create(path)?)
}
