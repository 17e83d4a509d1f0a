//! TOML run files: optional scenario defaults overlaid with the file's keys.
//!
//! ```toml
//! steps = 2000
//! [scenario]
//! name = "cavity"
//! resolution = 32
//! [pressure]
//! relaxation = 1.8
//! ```
//!
//! Without a `scenario` table the file must name a `mesh` and give `tau`,
//! `steps` and `props`. See `docs/config.md` for the full schema.

use std::path::{Path, PathBuf};

use dscflow::sim::{build_scenario, ScenarioKind, ScenarioSpec, SimulationConfig};
use dscflow::{Error, Result};
use serde::Deserialize;
use toml::{Table, Value};

/// A parsed run file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub config: SimulationConfig<f64>,
    /// Mesh file, resolved against the run file's directory.
    pub mesh: Option<PathBuf>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

/// Best-effort source line of a dotted key path such as `pressure.relaxation`
/// or `probes[1].name`; falls back to the line of the longest enclosing key.
pub fn key_line(text: &str, path: &str) -> Option<usize> {
    let parts: Vec<&str> = path.split('.').map(|p| p.split('[').next().unwrap_or(p)).filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return None;
    }
    let mut section: Vec<&str> = Vec::new();
    let mut best = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.starts_with('[') {
            let name = line.trim_matches(|c| c == '[' || c == ']').trim();
            section = name.split('.').map(str::trim).collect();
            if section == parts {
                return Some(i + 1);
            }
            if parts.starts_with(&section) && section.len() > best.map_or(0, |b: (usize, usize)| b.0) {
                best = Some((section.len(), i + 1));
            }
            continue;
        }
        let Some((key, _)) = line.split_once('=') else { continue };
        let mut full: Vec<&str> = section.clone();
        full.extend(key.trim().split('.').map(|k| k.trim().trim_matches('"')));
        if full.as_slice() == parts.as_slice() {
            return Some(i + 1);
        }
        if full.len() < parts.len() && parts.starts_with(&full) && full.len() > best.map_or(0, |b| b.0) {
            best = Some((full.len(), i + 1));
        }
    }
    best.map(|b| b.1)
}

/// Keys of `over` replace those of `base`; tables merge recursively.
fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn scenario_defaults(doc: &Table, text: &str) -> Result<Option<Table>> {
    let Some(raw) = doc.get("scenario") else { return Ok(None) };
    let line = key_line(text, "scenario").unwrap_or(1);
    let mut raw = raw.as_table().cloned().ok_or_else(|| parse_error(line, "`scenario` must be a table"))?;
    let name = raw.get("name").and_then(Value::as_str).ok_or_else(|| parse_error(line, "scenario.name is required"))?;
    let kind = ScenarioKind::parse(name).ok_or_else(|| {
        parse_error(key_line(text, "scenario.name").unwrap_or(line), format!("unknown scenario '{name}'"))
    })?;
    raw.entry("resolution").or_insert(Value::Integer(kind.default_resolution() as i64));
    let spec: ScenarioSpec<f64> = ScenarioSpec::deserialize(Value::Table(raw)).map_err(|e| parse_error(line, format!("scenario: {e}")))?;
    let (_, config) = build_scenario(&spec)?;
    let table = Table::try_from(&config).map_err(|e| parse_error(line, e.to_string()))?;
    Ok(Some(table))
}

/// Parses run-file text; relative mesh paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let mut doc: Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e.span().map_or(1, |s| line_of(text, s.start));
        parse_error(line, e.message().to_string())
    })?;
    let mesh = match doc.remove("mesh") {
        None => None,
        Some(Value::String(p)) => Some(base_dir.join(p)),
        Some(_) => return Err(parse_error(key_line(text, "mesh").unwrap_or(1), "`mesh` must be a path string")),
    };
    let mut merged = scenario_defaults(&doc, text)?.unwrap_or_default();
    merge(&mut merged, doc);
    let config: SimulationConfig<f64> = serde_path_to_error::deserialize(Value::Table(merged)).map_err(|e| {
        let path = e.path().to_string();
        let line = key_line(text, &path).unwrap_or(1);
        let inner = e.into_inner().to_string();
        let inner = inner.lines().next().unwrap_or("");
        if path == "." {
            parse_error(line, inner)
        } else {
            parse_error(line, format!("{path}: {inner}"))
        }
    })?;
    config.validate().map_err(|e| match e {
        Error::InvalidConfig { field, message } => {
            parse_error(key_line(text, &field).unwrap_or(1), format!("{field}: {message}"))
        }
        e => e,
    })?;
    if config.scenario.is_none() && mesh.is_none() {
        return Err(parse_error(1, "either a [scenario] table or a `mesh` path is required"));
    }
    Ok(RunConfig { config, mesh })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Complete run file for `config`; parsing it back gives the same settings.
pub fn emit_config(config: &SimulationConfig<f64>, mesh: Option<&Path>) -> Result<String> {
    let mut table = Table::try_from(config).map_err(|e| parse_error(0, e.to_string()))?;
    if let Some(m) = mesh {
        table.insert("mesh".into(), Value::String(m.display().to_string()));
    }
    toml::to_string(&table).map_err(|e| parse_error(0, e.to_string()))
}
