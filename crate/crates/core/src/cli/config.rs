//! Run configuration: defaults, `key = value` files and command-line overrides.
//!
//! A config file is a list of `key = value` lines. `#` starts a comment.
//! Keys before the first `[section]` header apply to every subcommand; keys
//! under `[converge]`, `[shift]`, … apply to that subcommand only and
//! override the global ones. Command-line flags override both.
//!
//! Numbers accept `base^exp` (`2^-4`); lists are comma separated and accept
//! ranges of powers (`2^-4..2^-9` is `2^-4, 2^-5, …, 2^-9`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::analysis::{self, ExperimentConfig};
use crate::models::{ChargedParticleParams, DampedParams, HarmonicParams, ModelSpec};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    Converge,
    Shift,
    Stationary,
    Energy,
    Scaling,
    Validate,
    FlowDemo,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Converge,
        Command::Shift,
        Command::Stationary,
        Command::Energy,
        Command::Scaling,
        Command::Validate,
        Command::FlowDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Converge => "converge",
            Command::Shift => "shift",
            Command::Stationary => "stationary",
            Command::Energy => "energy",
            Command::Scaling => "scaling",
            Command::Validate => "validate",
            Command::FlowDemo => "flow-demo",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Keys read by this subcommand, besides the model parameters.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Converge => &[
                "model", "seed", "tau", "h_list", "paths", "p_list", "oracle_refinement", "oracle_step", "x0",
                "slope_min", "slope_max", "r2_min",
            ],
            Command::Shift => &["seed", "t", "h_list", "paths", "n_terms", "step"],
            Command::Stationary => &["model", "seed", "step", "t_end", "burn_in", "paths", "x0"],
            Command::Energy => &["model", "seed", "step", "t_end", "paths", "x0"],
            Command::Scaling => &["model", "seed", "step", "paths", "s", "lags", "h_list", "tau", "x0"],
            Command::Validate => &["model", "seed", "samples", "h_list"],
            Command::FlowDemo => &["state", "t_end", "step"],
        }
    }

    fn uses_model(self) -> bool {
        self.keys().contains(&"model") || self == Command::FlowDemo
    }

    fn default_value(self, key: &str) -> Option<&'static str> {
        use Command::*;
        let v = match (self, key) {
            (Stationary, "model") => "damped",
            (Energy, "model") => "harmonic",
            (FlowDemo, "model") => "harmonic",
            (_, "model") => "charged",
            (_, "charge") => "1",
            (_, "mass") => "1",
            (_, "rest_length") => "0",
            (_, "friction") => "1",
            (_, "temperature") => "1",
            (_, "seed") => "42",
            (Converge | Scaling, "tau") => "1",
            (Converge | Scaling, "h_list") => "2^-4..2^-9",
            (Shift, "h_list") => "2^-4..2^-10",
            (Validate, "h_list") => "2^-1..2^-10",
            (Converge | Energy | Scaling, "paths") => "2000",
            (Shift, "paths") => "20",
            (Stationary, "paths") => "200",
            (Converge, "p_list") => "2,4",
            (Converge, "oracle_refinement") => "64",
            (Converge | Energy | Scaling, "x0") => "0,0",
            (Stationary, "x0") => "1,0",
            (Shift, "t") => "0.3,1.0,2.7",
            (Shift, "n_terms") => "10",
            (Shift | Scaling, "step") => "2^-12",
            (Stationary | Energy | FlowDemo, "step") => "0.01",
            (Stationary, "t_end") => "200",
            (Stationary, "burn_in") => "100",
            (Energy | FlowDemo, "t_end") => "10",
            (Scaling, "s") => "0.5",
            (Scaling, "lags") => "2^0..2^-10",
            (Validate, "samples") => "100000",
            (FlowDemo, "state") => "1,0,0,0",
            _ => return None,
        };
        Some(v)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Real,
    Reals,
    Count,
    Seed,
    Name,
}

/// Every recognised key with its value type.
const KEYS: &[(&str, Kind)] = &[
    ("model", Kind::Name),
    ("charge", Kind::Real),
    ("mass", Kind::Real),
    ("rest_length", Kind::Real),
    ("friction", Kind::Real),
    ("temperature", Kind::Real),
    ("seed", Kind::Seed),
    ("tau", Kind::Real),
    ("h_list", Kind::Reals),
    ("paths", Kind::Count),
    ("p_list", Kind::Reals),
    ("oracle_refinement", Kind::Count),
    ("oracle_step", Kind::Real),
    ("x0", Kind::Reals),
    ("slope_min", Kind::Real),
    ("slope_max", Kind::Real),
    ("r2_min", Kind::Real),
    ("t", Kind::Reals),
    ("n_terms", Kind::Count),
    ("step", Kind::Real),
    ("t_end", Kind::Real),
    ("burn_in", Kind::Real),
    ("s", Kind::Real),
    ("lags", Kind::Reals),
    ("samples", Kind::Count),
    ("state", Kind::Reals),
];

const MODEL_KEYS: &[&str] = &["charge", "mass", "rest_length", "friction", "temperature"];

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|&(_, kind)| kind)
}

/// Parses `x`, `base^exp` or a plain float.
pub fn parse_real(text: &str) -> Option<f64> {
    let text = text.trim();
    let value = match text.split_once('^') {
        Some((base, exp)) => {
            let base: f64 = base.trim().parse().ok()?;
            let exp: f64 = exp.trim().parse().ok()?;
            if exp.fract() == 0.0 && exp.abs() < 1024.0 {
                base.powi(exp as i32)
            } else {
                base.powf(exp)
            }
        }
        None => text.parse().ok()?,
    };
    value.is_finite().then_some(value)
}

fn parse_power(text: &str) -> Option<(f64, i32)> {
    let (base, exp) = text.trim().split_once('^')?;
    Some((base.trim().parse().ok()?, exp.trim().parse().ok()?))
}

/// Comma-separated reals; an item `b^i..b^j` expands to every integer power between.
pub fn parse_reals(text: &str) -> Option<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',') {
        match item.split_once("..") {
            Some((a, b)) => {
                let (base_a, i) = parse_power(a)?;
                let (base_b, j) = parse_power(b)?;
                if base_a != base_b {
                    return None;
                }
                if i <= j {
                    out.extend((i..=j).map(|k| base_a.powi(k)));
                } else {
                    out.extend((j..=i).rev().map(|k| base_a.powi(k)));
                }
            }
            None => out.push(parse_real(item)?),
        }
    }
    (!out.is_empty()).then_some(out)
}

fn check_value(key: &str, value: &str) -> Result<(), String> {
    let ok = match kind_of(key) {
        None => return Err(format!("unknown key `{key}`")),
        Some(Kind::Real) => parse_real(value).is_some(),
        Some(Kind::Reals) => parse_reals(value).is_some(),
        Some(Kind::Count) => value.trim().parse::<usize>().is_ok(),
        Some(Kind::Seed) => value.trim().parse::<u64>().is_ok(),
        Some(Kind::Name) => !value.trim().is_empty(),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("cannot parse value `{value}` for key `{key}`"))
    }
}

/// Parsed config file: global entries and per-subcommand sections, with line numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    global: BTreeMap<String, (String, usize)>,
    sections: BTreeMap<Command, BTreeMap<String, (String, usize)>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = ConfigFile::default();
        let mut section: Option<Command> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |key: Option<&str>, message: String| CliError::Config {
                line: Some(line_no),
                key: key.map(str::to_string),
                message,
            };
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let cmd = Command::from_name(name.trim())
                    .ok_or_else(|| err(None, format!("unknown section `[{}]`", name.trim())))?;
                section = Some(cmd);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(None, "expected `key = value`".to_string()))?;
            let (key, value) = (key.trim(), value.trim());
            check_value(key, value).map_err(|m| err(Some(key), m))?;
            if let Some(cmd) = section {
                if !cmd.keys().contains(&key) && !MODEL_KEYS.contains(&key) {
                    return Err(err(Some(key), format!("key `{key}` is not used by `{cmd}`")));
                }
            }
            let target = match section {
                Some(cmd) => file.sections.entry(cmd).or_default(),
                None => &mut file.global,
            };
            if target.insert(key.to_string(), (value.to_string(), line_no)).is_some() {
                return Err(err(Some(key), format!("duplicate key `{key}`")));
            }
        }
        Ok(file)
    }
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ConfigFile::parse(&text)
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Effective value of every key the run reads.
    pub values: BTreeMap<String, String>,
    pub out: PathBuf,
    pub plot: bool,
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Layers defaults, the config file (global then section) and `overrides`.
    pub fn resolve(
        command: Command,
        file: Option<&ConfigFile>,
        overrides: &[(&str, String)],
        out: PathBuf,
        plot: bool,
        threads: Option<usize>,
    ) -> Result<Self, CliError> {
        let mut raw: BTreeMap<String, (String, Option<usize>)> = BTreeMap::new();
        if let Some(file) = file {
            for (k, (v, line)) in &file.global {
                raw.insert(k.clone(), (v.clone(), Some(*line)));
            }
            if let Some(section) = file.sections.get(&command) {
                for (k, (v, line)) in section {
                    raw.insert(k.clone(), (v.clone(), Some(*line)));
                }
            }
        }
        for (key, value) in overrides {
            check_value(key, value).map_err(|message| CliError::Config {
                line: None,
                key: Some(key.to_string()),
                message,
            })?;
            if !command.keys().contains(key) && !MODEL_KEYS.contains(key) {
                return Err(CliError::Config {
                    line: None,
                    key: Some(key.to_string()),
                    message: format!("option for `{key}` has no effect on `{command}`"),
                });
            }
            raw.insert(key.to_string(), (value.clone(), None));
        }

        let mut values = BTreeMap::new();
        for &key in command.keys() {
            let value = match raw.get(key) {
                Some((v, _)) => Some(v.clone()),
                None => command.default_value(key).map(str::to_string),
            };
            if let Some(v) = value {
                values.insert(key.to_string(), v);
            }
        }
        if command.uses_model() {
            let model = values.get("model").cloned().unwrap_or_else(|| "harmonic".into());
            let params: &[&str] = match model.as_str() {
                "charged" => &["charge", "mass"],
                "harmonic" => &["rest_length"],
                "damped" => &["friction", "temperature"],
                other => {
                    return Err(CliError::Config {
                        line: raw.get("model").and_then(|r| r.1),
                        key: Some("model".into()),
                        message: format!("unknown model `{other}` (expected charged, harmonic or damped)"),
                    })
                }
            };
            let params: &[&str] = if command == Command::FlowDemo { &["rest_length"] } else { params };
            for &key in params {
                let v = raw
                    .get(key)
                    .map(|r| r.0.clone())
                    .or_else(|| command.default_value(key).map(str::to_string))
                    .unwrap_or_default();
                values.insert(key.to_string(), v);
            }
            if command == Command::FlowDemo {
                values.remove("model");
            }
        }
        let config = RunConfig {
            command,
            values,
            out,
            plot,
            threads,
        };
        config.validate().map_err(|(key, message)| CliError::Config {
            line: raw.get(&key).and_then(|r| r.1),
            key: Some(key),
            message,
        })?;
        Ok(config)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn real(&self, key: &str) -> Option<f64> {
        self.raw(key).and_then(parse_real)
    }

    pub fn reals(&self, key: &str) -> Option<Vec<f64>> {
        self.raw(key).and_then(parse_reals)
    }

    pub fn count(&self, key: &str) -> Option<usize> {
        self.raw(key).and_then(|v| v.trim().parse().ok())
    }

    pub fn seed(&self) -> u64 {
        self.raw("seed").and_then(|v| v.trim().parse().ok()).unwrap_or(42)
    }

    pub fn model(&self) -> ModelSpec {
        let r = |k: &str| self.real(k).unwrap_or(0.0);
        match self.raw("model").unwrap_or("harmonic") {
            "charged" => ModelSpec::Charged(ChargedParticleParams {
                charge: r("charge"),
                mass: r("mass"),
            }),
            "damped" => ModelSpec::Damped(DampedParams {
                friction: r("friction"),
                temperature: r("temperature"),
            }),
            _ => ModelSpec::Harmonic(HarmonicParams {
                rest_length: r("rest_length"),
            }),
        }
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            tau: self.real("tau").unwrap_or(1.0),
            h_list: self.reals("h_list").unwrap_or_default(),
            n_paths: self.count("paths").unwrap_or(0),
            p_list: self.reals("p_list").unwrap_or_default(),
            master_seed: self.seed(),
            oracle_refinement: self.count("oracle_refinement").unwrap_or(64),
            oracle_step: self.real("oracle_step"),
            temperature: self.model().temperature(),
        }
    }

    /// Stable text of the effective values, one `key=value` per line.
    pub fn canonical(&self) -> String {
        let mut text = format!("command={}\n", self.command);
        for (k, v) in &self.values {
            text.push_str(&format!("{k}={v}\n"));
        }
        text
    }

    pub fn hash(&self) -> String {
        analysis::sha256_hex(&self.canonical())
    }

    fn validate(&self) -> Result<(), (String, String)> {
        let fail = |key: &str, message: String| Err((key.to_string(), message));
        let positive = |key: &str| -> Result<(), (String, String)> {
            match self.real(key) {
                Some(v) if v > 0.0 => Ok(()),
                Some(v) => fail(key, format!("`{key}` must be positive, got {v}")),
                None => Ok(()),
            }
        };
        for key in ["mass", "friction", "step", "t_end", "tau"] {
            if self.values.contains_key(key) {
                positive(key)?;
            }
        }
        if let Some(t) = self.real("temperature") {
            if t < 0.0 {
                return fail("temperature", "`temperature` must be nonnegative".into());
            }
        }
        for key in ["paths", "samples", "n_terms"] {
            if self.count(key) == Some(0) {
                return fail(key, format!("`{key}` must be positive"));
            }
        }
        if let Some(x0) = self.reals("x0") {
            if x0.len() != 2 {
                return fail("x0", format!("`x0` needs 2 components, got {}", x0.len()));
            }
        }
        if let Some(state) = self.reals("state") {
            if state.len() != 4 {
                return fail("state", format!("`state` needs 4 components, got {}", state.len()));
            }
        }
        match self.command {
            Command::Converge => {
                if let Err(e) = self.experiment().layout() {
                    let message = match e {
                        crate::Error::InvalidConfig(m) => m,
                        other => other.to_string(),
                    };
                    // layout messages lead with the offending field
                    let field: String = message.chars().take_while(|c| c.is_ascii_lowercase() || *c == '_').collect();
                    let key = match field.as_str() {
                        "n_paths" => "paths",
                        "temperature" => "temperature",
                        f if self.values.contains_key(f) => f,
                        _ => "h_list",
                    };
                    return Err((key.to_string(), message));
                }
            }
            Command::Shift | Command::Validate => {
                let h = self.reals("h_list").unwrap_or_default();
                if h.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
                    return fail("h_list", "every h must lie in (0, 1)".into());
                }
            }
            Command::Energy => {
                if self.raw("model") != Some("harmonic") {
                    return fail("model", "`energy` needs the harmonic model".into());
                }
            }
            Command::Stationary => {
                if self.real("burn_in").unwrap_or(0.0) >= self.real("t_end").unwrap_or(0.0) {
                    return fail("burn_in", "`burn_in` must be smaller than `t_end`".into());
                }
                if self.raw("model") != Some("damped") {
                    return fail("model", "`stationary` needs the damped model".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}
