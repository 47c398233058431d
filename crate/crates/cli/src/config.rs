use std::path::{Path, PathBuf};

use crate::error::{io_error, CliError, Result};
use crate::params::Params;
use crate::spec::{POTENTIAL_KINDS, PROCESS_KINDS};
use crate::theorems::THEOREM_IDS;

#[derive(Debug, Clone)]
pub struct TheoremSpec {
    pub id: String,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub seed: u64,
    pub trials: u64,
    /// Step cap per trial; derived from the best upper bound when absent.
    pub cap: Option<u64>,
    /// Trajectory length for fixed-budget rows and plot data.
    pub horizon: Option<u64>,
    pub oracle: bool,
    pub check_conditions: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub process: String,
    pub potential: Option<String>,
    pub theorems: Vec<TheoremSpec>,
    pub simulation: Simulation,
    pub output: Output,
}

pub const DEFAULT_TRIALS: u64 = 10_000;

/// Position of an error inside the config text.
struct Source<'a> {
    path: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn position(&self, offset: usize) -> (usize, usize) {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        (line, column)
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> CliError {
        let (line, column) = self.position(offset);
        CliError::Parse {
            path: self.path.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    /// Offset of the value of `key` in its `n`-th assignment (counting from 0),
    /// or of the `n`-th header `[section]` when `key` is empty.
    fn find(&self, section: Option<&str>, key: &str, n: usize) -> usize {
        let mut offset = 0;
        let mut current: Option<String> = None;
        let mut seen = 0;
        for line in self.text.split_inclusive('\n') {
            let trimmed = line.trim_start();
            let indent = line.len() - trimmed.len();
            if trimmed.starts_with('[') {
                let name = trimmed.trim_start_matches('[').split(']').next().unwrap_or("").trim().to_string();
                if key.is_empty() && section == Some(name.as_str()) {
                    if seen == n {
                        return offset + indent;
                    }
                    seen += 1;
                }
                current = Some(name);
            } else if !key.is_empty() && current.as_deref() == section {
                if let Some((k, _)) = trimmed.split_once('=') {
                    if k.trim() == key {
                        if seen == n {
                            let eq = line.find('=').unwrap_or(0);
                            let value = line[eq + 1..].len() - line[eq + 1..].trim_start().len();
                            return offset + eq + 1 + value;
                        }
                        seen += 1;
                    }
                }
            }
            offset += line.len();
        }
        0
    }
}

fn text_value<'a>(src: &Source, table: &'a toml::Table, section: Option<&str>, key: &str) -> Result<Option<&'a str>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(src.error_at(src.find(section, key, 0), format!("'{key}' must be a string"))),
    }
}

fn uint_value(src: &Source, table: &toml::Table, section: &str, key: &str) -> Result<Option<u64>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
        Some(_) => Err(src.error_at(src.find(Some(section), key, 0), format!("'{key}' must be a non-negative integer"))),
    }
}

fn bool_value(src: &Source, table: &toml::Table, section: &str, key: &str, default: bool) -> Result<bool> {
    match table.get(key) {
        None => Ok(default),
        Some(toml::Value::Boolean(b)) => Ok(*b),
        Some(_) => Err(src.error_at(src.find(Some(section), key, 0), format!("'{key}' must be true or false"))),
    }
}

fn reject_unknown(src: &Source, table: &toml::Table, section: Option<&str>, known: &[&str]) -> Result<()> {
    match table.keys().find(|k| !known.contains(&k.as_str())) {
        None => Ok(()),
        Some(k) => {
            let where_ = section.map_or("top level".to_string(), |s| format!("[{s}]"));
            Err(src.error_at(src.find(section, k, 0), format!("unknown key '{k}' in {where_}")))
        }
    }
}

fn kind_of(spec: &str) -> &str {
    spec.split('(').next().unwrap_or("").trim()
}

fn table<'a>(src: &Source, root: &'a toml::Table, name: &str) -> Result<Option<&'a toml::Table>> {
    match root.get(name) {
        None => Ok(None),
        Some(toml::Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(src.error_at(src.find(None, name, 0), format!("'{name}' must be a section"))),
    }
}

/// Parse a config. `path` only labels errors; relative output paths stay
/// relative here and are resolved by [`load`].
pub fn parse(path: &str, text: &str) -> Result<ExperimentConfig> {
    let src = Source { path, text };
    let root: toml::Table = toml::from_str(text).map_err(|e| {
        let offset = e.span().map_or(0, |s| s.start);
        src.error_at(offset, e.message().trim().to_string())
    })?;
    reject_unknown(&src, &root, None, &["name", "process", "potential", "simulation", "output", "theorem"])?;

    let process = text_value(&src, &root, None, "process")?
        .ok_or_else(|| src.error_at(0, "missing top-level 'process'"))?
        .to_string();
    let potential = text_value(&src, &root, None, "potential")?.map(str::to_string);
    let name = text_value(&src, &root, None, "name")?.unwrap_or("experiment").to_string();

    let theorem_tables: Vec<&toml::Table> = match root.get("theorem") {
        None => Vec::new(),
        Some(toml::Value::Array(items)) => items
            .iter()
            .map(|item| match item {
                toml::Value::Table(t) => Ok(t),
                _ => Err(src.error_at(src.find(None, "theorem", 0), "theorems are [[theorem]] sections")),
            })
            .collect::<Result<_>>()?,
        Some(_) => return Err(src.error_at(src.find(None, "theorem", 0), "theorems are [[theorem]] sections")),
    };
    if theorem_tables.is_empty() {
        return Err(src.error_at(text.len(), "no [[theorem]] sections"));
    }

    // Unknown names are collected so the user sees all of them at once.
    let mut unknown = Vec::new();
    let mut first_unknown = None;
    let mut note = |offset: usize, what: String| {
        first_unknown.get_or_insert(offset);
        unknown.push(what);
    };
    if !PROCESS_KINDS.contains(&kind_of(&process)) {
        note(src.find(None, "process", 0), format!("process '{}'", kind_of(&process)));
    }
    if let Some(g) = &potential {
        if !POTENTIAL_KINDS.contains(&kind_of(g)) {
            note(src.find(None, "potential", 0), format!("potential '{}'", kind_of(g)));
        }
    }
    let mut theorems = Vec::new();
    for (i, t) in theorem_tables.iter().enumerate() {
        let id = match t.get("id") {
            Some(toml::Value::String(s)) => s.clone(),
            _ => return Err(src.error_at(src.find(Some("theorem"), "", i), "[[theorem]] needs a string 'id'")),
        };
        if !THEOREM_IDS.contains(&id.as_str()) {
            note(src.find(Some("theorem"), "id", i), format!("theorem '{id}'"));
        }
        let params = Params::from_table(format!("theorem {id}"), t, &["id"])?;
        theorems.push(TheoremSpec { id, params });
    }
    if let Some(offset) = first_unknown {
        return Err(src.error_at(offset, format!("unknown {}", unknown.join(", "))));
    }

    let sim = table(&src, &root, "simulation")?
        .ok_or_else(|| src.error_at(text.len(), "missing [simulation] section (a seed is required)"))?;
    reject_unknown(&src, sim, Some("simulation"), &["seed", "trials", "cap", "horizon", "oracle", "check_conditions"])?;
    let seed = uint_value(&src, sim, "simulation", "seed")?
        .ok_or_else(|| src.error_at(src.find(Some("simulation"), "", 0), "[simulation] needs a 'seed'"))?;
    let simulation = Simulation {
        seed,
        trials: uint_value(&src, sim, "simulation", "trials")?.unwrap_or(DEFAULT_TRIALS),
        cap: uint_value(&src, sim, "simulation", "cap")?,
        horizon: uint_value(&src, sim, "simulation", "horizon")?,
        oracle: bool_value(&src, sim, "simulation", "oracle", true)?,
        check_conditions: bool_value(&src, sim, "simulation", "check_conditions", true)?,
    };

    let mut output = Output::default();
    if let Some(out) = table(&src, &root, "output")? {
        reject_unknown(&src, out, Some("output"), &["csv", "json", "plot"])?;
        let get = |key| text_value(&src, out, Some("output"), key).map(|v| v.map(PathBuf::from));
        output = Output {
            csv: get("csv")?,
            json: get("json")?,
            plot: get("plot")?,
        };
    }

    Ok(ExperimentConfig {
        name,
        process,
        potential,
        theorems,
        simulation,
        output,
    })
}

/// Read and parse a config file; output paths become relative to its directory.
pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut config = parse(&path.display().to_string(), &text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for p in [&mut config.output.csv, &mut config.output.json, &mut config.output.plot].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(config)
}
