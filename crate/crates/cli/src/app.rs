//! Argument handling for the `dscflow` binary.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dscflow::coarsen::CoarseningConfig;
use dscflow::hexmesh::read_mesh;
use dscflow::sim::{build_scenario, OutputFormat, ProbeLocation, ProbeSpec, ScenarioKind, ScenarioSpec, Simulation, SimulationConfig};
use dscflow::{Error, Field, Mesh, Result};

use crate::config::{emit_config, load_config, RunConfig};
use crate::output::{write_probes_file, DirectorySink};

#[derive(Parser, Debug)]
#[command(name = "dscflow", version, about = "Dual scattering channel solver for Boussinesq flow on hexahedral meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a built-in scenario or a mesh file with a run file
    Run(RunArgs),
    /// Read a mesh file, check its geometry and print counts
    ValidateMesh {
        mesh: PathBuf,
    },
    /// Print a complete run file with every default filled in
    EmitConfig(EmitArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Scenario {
    Cavity,
    Step,
    Cylinder,
    Annulus,
    Slab,
}

impl From<Scenario> for ScenarioKind {
    fn from(s: Scenario) -> Self {
        match s {
            Scenario::Cavity => ScenarioKind::Cavity,
            Scenario::Step => ScenarioKind::Step,
            Scenario::Cylinder => ScenarioKind::Cylinder,
            Scenario::Annulus => ScenarioKind::Annulus,
            Scenario::Slab => ScenarioKind::Slab,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Vtk,
}

#[derive(Args, Debug)]
struct Source {
    /// Run file (TOML)
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Built-in scenario; overrides the run file's scenario
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    /// Scenario resolution
    #[arg(long)]
    resolution: Option<usize>,
    /// Mesh file; overrides the run file's mesh
    #[arg(long)]
    mesh: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Number of time steps
    #[arg(long)]
    steps: Option<usize>,
    /// Output directory
    #[arg(long, short, default_value = "output")]
    output: PathBuf,
    /// Snapshot format; repeat or separate with commas for several
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
    /// Snapshot every this many steps
    #[arg(long)]
    cadence: Option<usize>,
    /// Coarsening period in steps; 0 disables coarsening
    #[arg(long)]
    coarsen_period: Option<usize>,
    /// Point probe recording all fields, as NAME=X,Y,Z
    #[arg(long = "probe", value_parser = parse_probe)]
    probes: Vec<ProbeSpec<f64>>,
}

#[derive(Args, Debug)]
struct EmitArgs {
    #[command(flatten)]
    source: Source,
    /// Write to this file instead of standard output
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_probe(s: &str) -> std::result::Result<ProbeSpec<f64>, String> {
    let (name, pos) = s.split_once('=').ok_or("expected NAME=X,Y,Z")?;
    let xyz: Vec<f64> = pos
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let position: [f64; 3] = xyz.try_into().map_err(|_| "expected three coordinates".to_string())?;
    if name.is_empty() {
        return Err("probe name is empty".into());
    }
    Ok(ProbeSpec { name: name.into(), location: ProbeLocation::Position { position }, fields: Field::ALL.to_vec(), capacity: None })
}

/// Mesh and configuration from a run file and/or command-line overrides.
fn resolve(source: &Source) -> Result<(Mesh<f64>, SimulationConfig<f64>, Option<PathBuf>)> {
    let file = source.config.as_deref().map(load_config).transpose()?;
    let (mut config, mut mesh_path) = match file {
        Some(RunConfig { config, mesh }) => (Some(config), mesh),
        None => (None, None),
    };
    if let Some(m) = &source.mesh {
        mesh_path = Some(m.clone());
    }
    let scenario = match (source.scenario, config.as_ref().and_then(|c| c.scenario.clone())) {
        (Some(kind), prior) => {
            let kind = ScenarioKind::from(kind);
            let mut spec = prior.filter(|p| p.name == kind).unwrap_or_else(|| ScenarioSpec::new(kind, kind.default_resolution()));
            if let Some(r) = source.resolution {
                spec.resolution = r;
            }
            // a scenario named on the command line replaces the file's settings
            config = None;
            Some(spec)
        }
        (None, Some(mut spec)) => {
            if let Some(r) = source.resolution {
                if r != spec.resolution {
                    spec.resolution = r;
                    config = None;
                }
            }
            Some(spec)
        }
        (None, None) => None,
    };
    if let Some(path) = mesh_path {
        let config = config.ok_or_else(|| Error::config("config", "a mesh file needs a run file with tau, steps, props and bcs"))?;
        let mesh = read_mesh(BufReader::new(File::open(&path)?))?;
        return Ok((mesh, config, Some(path)));
    }
    let spec = scenario.ok_or_else(|| Error::config("scenario", "give --scenario, --mesh or a run file"))?;
    let (mesh, defaults) = build_scenario(&spec)?;
    Ok((mesh, config.unwrap_or(defaults), None))
}

fn run(args: RunArgs) -> Result<()> {
    let (mesh, mut config, _) = resolve(&args.source)?;
    if let Some(n) = args.steps {
        config.steps = n;
    }
    if let Some(c) = args.cadence {
        config.output.cadence = c;
    }
    if !args.format.is_empty() {
        config.output.formats =
            args.format.iter().map(|f| if *f == Format::Csv { OutputFormat::Csv } else { OutputFormat::Vtk }).collect();
    }
    match args.coarsen_period {
        Some(0) => config.coarsening = CoarseningConfig { enabled: false, ..config.coarsening },
        Some(p) => {
            config.coarsening.enabled = true;
            config.coarsening.period = p;
        }
        None => {}
    }
    config.probes.extend(args.probes);
    let formats = config.output.formats.clone();
    let mut sim = Simulation::new(mesh, config)?;
    let mut sink = DirectorySink::new(&args.output, "snapshot", formats)?;
    std::fs::write(args.output.join("run.toml"), emit_config(&sim.config, None)?)?;
    let last = sim.run(&mut sink)?;
    if !sim.probes.is_empty() {
        write_probes_file(&sim.probes, &args.output.join("probes.csv"))?;
    }
    let mut out = std::io::stdout().lock();
    writeln!(out, "steps {} time {} snapshots {}", sim.step_index, sim.state.node_time, sink.written.len())?;
    if let Some(r) = last {
        writeln!(out, "max speed {} cfl {}", r.max_speed, r.cfl)?;
    }
    Ok(())
}

fn validate_mesh(path: &Path) -> Result<()> {
    let mesh: Mesh<f64> = read_mesh(BufReader::new(File::open(path)?))?;
    let worst = mesh.cells.iter().map(|c| c.condition).fold(0.0, f64::max);
    let mut out = std::io::stdout().lock();
    writeln!(out, "vertices {}", mesh.vertices.len())?;
    writeln!(out, "cells {}", mesh.n_cells())?;
    writeln!(out, "interior faces {}", mesh.interior_faces.len())?;
    writeln!(out, "boundary faces {}", mesh.boundary_faces.len())?;
    for tag in &mesh.tags {
        writeln!(out, "  {tag} {}", mesh.count_tagged(tag))?;
    }
    writeln!(out, "volume {}", mesh.total_volume())?;
    writeln!(out, "worst condition {worst}")?;
    Ok(())
}

fn emit(args: EmitArgs) -> Result<()> {
    let (_, config, mesh) = resolve(&args.source)?;
    let text = emit_config(&config, mesh.as_deref())?;
    match args.output {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code. Usage errors give 2, run failures 1.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::ValidateMesh { mesh } => validate_mesh(&mesh),
        Command::EmitConfig(a) => emit(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
