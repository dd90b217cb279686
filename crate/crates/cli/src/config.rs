//! Line-oriented `key = value` sweep configuration.
//!
//! Lists are comma separated, `#` starts a comment. Keys (with accepted
//! aliases): `g_values`/`g`, `epsilon_values`/`epsilon`, `gamma_specs`/`gamma`,
//! `T`, `rtol`, `atol`, `qtol`, `output`, `format`, `parallelism`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use lzdeph::model::GammaProfile;
use lzdeph::propagate::IntegratorConfig;
use lzdeph::transition::{default_horizon, DEFAULT_QTOL};

use crate::error::{CliError, Result};

pub const GRAMMAR: &str = "expected `key = value` lines; keys: g_values (g), epsilon_values (epsilon), gamma_specs (gamma), \
T (number or auto), rtol, atol, qtol, output, format (csv|json), parallelism (count or auto)";

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    Auto,
    Fixed(f64),
}

impl Horizon {
    pub fn resolve(self, g_values: &[f64]) -> f64 {
        match self {
            Horizon::Fixed(t) => t,
            Horizon::Auto => default_horizon(g_values.iter().copied().fold(f64::INFINITY, f64::min)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(CliError::Config(format!("format: unknown value {other:?}; expected csv or json"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    Auto,
    Workers(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub g_values: Vec<f64>,
    pub epsilon_values: Vec<f64>,
    pub gamma_specs: Vec<GammaProfile>,
    pub horizon: Horizon,
    pub rtol: f64,
    pub atol: f64,
    pub qtol: f64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub parallelism: Parallelism,
}

impl SweepConfig {
    pub fn horizon_value(&self) -> f64 {
        self.horizon.resolve(&self.g_values)
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig::with_tolerances(self.rtol, self.atol)
    }

    pub fn grid_size(&self) -> usize {
        self.g_values.len() * self.gamma_specs.len() * self.epsilon_values.len()
    }
}

/// Raw key/value assignments, later ones overriding earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignments(BTreeMap<&'static str, String>);

fn canonical_key(key: &str) -> Option<&'static str> {
    Some(match key {
        "g_values" | "g" => "g_values",
        "epsilon_values" | "epsilon" => "epsilon_values",
        "gamma_specs" | "gamma" => "gamma_specs",
        "T" => "T",
        "rtol" => "rtol",
        "atol" => "atol",
        "qtol" => "qtol",
        "output" => "output",
        "format" => "format",
        "parallelism" => "parallelism",
        _ => return None,
    })
}

impl Assignments {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = canonical_key(key.trim()).ok_or_else(|| CliError::Config(format!("unknown key {:?}; {GRAMMAR}", key.trim())))?;
        self.0.insert(k, value.trim().to_string());
        Ok(())
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut out = Assignments::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: {line:?} has no `=`; {GRAMMAR}", lineno + 1)))?;
            out.set(key, value)?;
        }
        Ok(out)
    }

    pub fn overlay(&mut self, other: &Assignments) {
        for (k, v) in &other.0 {
            self.0.insert(k, v.clone());
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn build(&self) -> Result<SweepConfig> {
        let g_values = positive_list(self.required("g_values")?, "g_values")?;
        let epsilon_values = positive_list(self.required("epsilon_values")?, "epsilon_values")?;
        let gamma_specs = list(self.required("gamma_specs")?, "gamma_specs")?
            .into_iter()
            .map(|d| d.parse::<GammaProfile>().map_err(|e| CliError::Config(format!("gamma_specs: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let horizon = match self.get("T") {
            None => Horizon::Auto,
            Some(v) if v.eq_ignore_ascii_case("auto") => Horizon::Auto,
            Some(v) => Horizon::Fixed(positive(v, "T")?),
        };
        let rtol = self.get("rtol").map(|v| positive(v, "rtol")).transpose()?.unwrap_or(1e-10);
        let atol = self.get("atol").map(|v| positive(v, "atol")).transpose()?.unwrap_or(1e-12);
        let qtol = self.get("qtol").map(|v| positive(v, "qtol")).transpose()?.unwrap_or(DEFAULT_QTOL);
        let output = self.get("output").filter(|v| !v.is_empty()).map(PathBuf::from);
        let format = self.get("format").map(str::parse).transpose()?.unwrap_or(OutputFormat::Csv);
        let parallelism = match self.get("parallelism") {
            None => Parallelism::Auto,
            Some(v) if v.eq_ignore_ascii_case("auto") => Parallelism::Auto,
            Some(v) => match v.parse::<usize>() {
                Ok(n) if n > 0 => Parallelism::Workers(n),
                _ => return Err(CliError::Config(format!("parallelism: {v:?} is not a positive integer or auto"))),
            },
        };
        let cfg = SweepConfig { g_values, epsilon_values, gamma_specs, horizon, rtol, atol, qtol, output, format, parallelism };
        cfg.integrator().validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| CliError::Config(format!("missing required key {key}; {GRAMMAR}")))
    }
}

fn list<'a>(value: &'a str, key: &str) -> Result<Vec<&'a str>> {
    let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::Config(format!("{key}: list must be nonempty")));
    }
    Ok(items)
}

fn positive(value: &str, key: &str) -> Result<f64> {
    match value.trim().parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        Ok(x) => Err(CliError::Config(format!("{key}: value {x} must be positive and finite"))),
        Err(_) => Err(CliError::Config(format!("{key}: {value:?} is not a number"))),
    }
}

fn positive_list(value: &str, key: &str) -> Result<Vec<f64>> {
    list(value, key)?.into_iter().map(|v| positive(v, key)).collect()
}

/// Parses a config file body, applies `overrides` on top and validates.
pub fn parse_config(text: &str, overrides: &Assignments) -> Result<SweepConfig> {
    let mut a = Assignments::parse_text(text)?;
    a.overlay(overrides);
    a.build()
}
