use std::path::Path;

use dscflow::coarsen::CoarseningConfig;
use dscflow::pressure::PressureSolverConfig;
use dscflow::sim::{build_scenario, ScenarioKind, ScenarioSpec};
use dscflow::Error;
use dscflow_cli::config::{emit_config, parse_config};

fn parse(text: &str) -> dscflow::Result<dscflow_cli::config::RunConfig> {
    parse_config(text, Path::new("."))
}

fn line_of(e: Error) -> (usize, String) {
    match e {
        Error::Parse { line, message } => (line, message),
        e => panic!("unexpected error {e}"),
    }
}

#[test]
fn minimal_config_takes_scenario_defaults() {
    let run = parse("steps = 7\n[scenario]\nname = \"cavity\"\n").unwrap();
    let (_, defaults) = build_scenario(&ScenarioSpec::new(ScenarioKind::Cavity, 16)).unwrap();
    assert_eq!(run.config.steps, 7);
    assert_eq!(run.config.tau, defaults.tau);
    assert_eq!(run.config.bcs, defaults.bcs);
    assert_eq!(run.config.probes, defaults.probes);
    assert_eq!(run.config.scenario.unwrap().resolution, 16);
}

#[test]
fn library_defaults() {
    let c = PressureSolverConfig::<f64>::default();
    assert_eq!((c.relaxation, c.tolerance, c.max_iterations), (1.0, 1e-8, 500));
    assert_eq!(CoarseningConfig::<f64>::default().period, 10);
    // keys left out of a mesh-file run take the library defaults
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cube_pair.toml")).unwrap();
    let run = parse(&text).unwrap();
    assert_eq!(run.config.pressure, PressureSolverConfig::default());
    assert!(run.mesh.unwrap().ends_with("cube_pair.mesh"));
}

#[test]
fn relaxation_out_of_range_names_field_and_line() {
    let e = parse("steps = 3\n[scenario]\nname = \"slab\"\n\n[pressure]\nrelaxation = 2.5\n").unwrap_err();
    let (line, msg) = line_of(e);
    assert_eq!(line, 6);
    assert!(msg.contains("pressure.relaxation"), "{msg}");
}

#[test]
fn unknown_key_reported_at_its_line() {
    let e = parse("steps = 3\n[scenario]\nname = \"slab\"\n[coarsening]\nenabled = true\nperoid = 4\n").unwrap_err();
    let (line, msg) = line_of(e);
    assert_eq!(line, 6);
    assert!(msg.contains("peroid"), "{msg}");
}

#[test]
fn syntax_error_line() {
    let (line, _) = line_of(parse("steps = 3\n\n[scenario\nname = 1\n").unwrap_err());
    assert_eq!(line, 3);
}

#[test]
fn bad_type_in_nested_table() {
    let e = parse("steps = 3\n[scenario]\nname = \"slab\"\n[props]\nalpha = \"fast\"\n").unwrap_err();
    let (line, msg) = line_of(e);
    assert_eq!(line, 5);
    assert!(msg.contains("props.alpha"), "{msg}");
}

#[test]
fn probe_needs_one_location() {
    let e = parse("steps = 3\n[scenario]\nname = \"slab\"\n[[probes]]\nname = \"p\"\n").unwrap_err();
    assert!(line_of(e).1.contains("exactly one"));
    let e = parse("steps = 3\n[scenario]\nname = \"slab\"\n[[probes]]\nname = \"p\"\ncell = 1\nwhere = 2\n").unwrap_err();
    assert!(line_of(e).1.contains("where"));
}

#[test]
fn unknown_scenario() {
    let (line, msg) = line_of(parse("steps = 3\n[scenario]\nname = \"tunnel\"\n").unwrap_err());
    assert_eq!(line, 3);
    assert!(msg.contains("tunnel"));
}

#[test]
fn emit_then_parse_round_trips_every_scenario() {
    for (kind, n) in [
        (ScenarioKind::Slab, 64),
        (ScenarioKind::Cavity, 8),
        (ScenarioKind::Step, 2),
        (ScenarioKind::Cylinder, 4),
        (ScenarioKind::Annulus, 4),
    ] {
        let (_, config) = build_scenario(&ScenarioSpec::<f64>::new(kind, n)).unwrap();
        let text = emit_config(&config, None).unwrap();
        let back = parse(&text).unwrap();
        assert_eq!(back.config, config, "{}", kind.name());
        assert_eq!(emit_config(&back.config, None).unwrap(), text);
    }
}

#[test]
fn round_trip_keeps_awkward_values() {
    let (_, mut config) = build_scenario(&ScenarioSpec::<f64>::new(ScenarioKind::Cavity, 4)).unwrap();
    config.tau = 0.1 + 0.2;
    config.props.alpha = 1.0 / 3.0;
    config.pressure.tolerance = 1.234_567_890_123e-13;
    config.heat_source = -5e300;
    let back = parse(&emit_config(&config, None).unwrap()).unwrap();
    assert_eq!(back.config, config);
}
