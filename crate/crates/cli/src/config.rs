//! `key = value` run configuration.

use std::collections::HashSet;
use std::path::PathBuf;

use thiserror::Error;
use vicinal_core::{BarrierParams, PeriodicGrid, SpectralField, StepConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: key `{key}`: {reason}")]
    Parse { line: usize, key: String, reason: String },
    #[error("invalid configuration: {constraint}")]
    Validation { constraint: String },
}

fn parse_err(line: usize, key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn invalid(constraint: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        constraint: constraint.into(),
    }
}

/// Initial condition presets.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Zero,
    /// `amp * sin(k x)`.
    Sine { k: usize, amp: f64 },
    /// `sum_k c_k cos(kx) + s_k sin(kx)`, written `k:c_k:s_k`.
    Multi(Vec<(usize, f64, f64)>),
}

impl InitSpec {
    fn parse(text: &str) -> Result<Self, String> {
        let mut words = text.split_whitespace();
        match words.next() {
            Some("zero") => match words.next() {
                None => Ok(InitSpec::Zero),
                Some(_) => Err("`zero` takes no arguments".into()),
            },
            Some("sine") => {
                let rest: Vec<&str> = words.collect();
                if rest.len() != 2 {
                    return Err("expected `sine <k> <amp>`".into());
                }
                let k = rest[0].parse::<usize>().map_err(|e| format!("mode `{}`: {e}", rest[0]))?;
                let amp = parse_real(rest[1])?;
                Ok(InitSpec::Sine { k, amp })
            }
            Some("multi") => {
                let terms = words
                    .map(|w| {
                        let parts: Vec<&str> = w.split(':').collect();
                        if parts.len() != 3 {
                            return Err(format!("term `{w}` is not `k:cos:sin`"));
                        }
                        let k = parts[0].parse::<usize>().map_err(|e| format!("mode `{}`: {e}", parts[0]))?;
                        Ok((k, parse_real(parts[1])?, parse_real(parts[2])?))
                    })
                    .collect::<Result<Vec<_>, String>>()?;
                if terms.is_empty() {
                    return Err("`multi` needs at least one `k:cos:sin` term".into());
                }
                Ok(InitSpec::Multi(terms))
            }
            Some(other) => Err(format!("unknown preset `{other}` (expected zero, sine or multi)")),
            None => Err("empty value".into()),
        }
    }

    fn modes(&self) -> Vec<usize> {
        match self {
            InitSpec::Zero => Vec::new(),
            InitSpec::Sine { k, .. } => vec![*k],
            InitSpec::Multi(terms) => terms.iter().map(|t| t.0).collect(),
        }
    }

    pub fn build(&self, grid: &PeriodicGrid) -> vicinal_core::Result<SpectralField> {
        match self {
            InitSpec::Zero => Ok(SpectralField::zeros(grid)),
            InitSpec::Sine { k, amp } => {
                let k = *k as f64;
                SpectralField::from_fn(grid, |x| amp * (k * x).sin())
            }
            InitSpec::Multi(terms) => SpectralField::from_fn(grid, |x| {
                terms
                    .iter()
                    .map(|&(k, c, s)| {
                        let (sn, cs) = (k as f64 * x).sin_cos();
                        c * cs + s * sn
                    })
                    .sum()
            }),
        }
    }
}

impl std::fmt::Display for InitSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitSpec::Zero => write!(f, "zero"),
            InitSpec::Sine { k, amp } => write!(f, "sine {k} {amp}"),
            InitSpec::Multi(terms) => {
                write!(f, "multi")?;
                for (k, c, s) in terms {
                    write!(f, " {k}:{c}:{s}")?;
                }
                Ok(())
            }
        }
    }
}

/// One swept key and its values; a sweep runs the cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub a: f64,
    pub tau: f64,
    pub t_final: f64,
    pub init: InitSpec,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub delta_min: f64,
    pub snapshot_every: usize,
    pub output_dir: PathBuf,
    pub battery_max_k: usize,
    pub battery_m_time: usize,
    pub weak_form_tol: f64,
    pub sweep: Vec<SweepAxis>,
}

pub const REQUIRED_KEYS: [&str; 5] = ["n", "a", "tau", "t_final", "init"];
pub const OPTIONAL_KEYS: [&str; 9] = [
    "newton_tol",
    "max_iter",
    "delta_min",
    "snapshot_every",
    "output_dir",
    "battery_max_k",
    "battery_m_time",
    "weak_form_tol",
    "sweep",
];
/// Keys a sweep may override.
pub const SWEEPABLE_KEYS: [&str; 9] = [
    "n",
    "a",
    "tau",
    "t_final",
    "init",
    "newton_tol",
    "max_iter",
    "delta_min",
    "snapshot_every",
];

fn parse_real(text: &str) -> Result<f64, String> {
    let v = text.parse::<f64>().map_err(|e| format!("`{text}`: {e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{text}` is not finite"))
    }
}

fn parse_count(text: &str) -> Result<usize, String> {
    text.parse::<usize>().map_err(|e| format!("`{text}`: {e}"))
}

fn parse_sweep(text: &str) -> Result<Vec<SweepAxis>, String> {
    let mut seen = HashSet::new();
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|axis| {
            let (key, values) = axis
                .split_once('=')
                .ok_or_else(|| format!("axis `{axis}` is not `key=v1,v2,...`"))?;
            let key = key.trim();
            if !SWEEPABLE_KEYS.contains(&key) {
                return Err(format!("`{key}` cannot be swept"));
            }
            if !seen.insert(key.to_string()) {
                return Err(format!("`{key}` swept twice"));
            }
            let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
            if values.iter().any(String::is_empty) {
                return Err(format!("empty value in axis `{key}`"));
            }
            Ok(SweepAxis {
                key: key.to_string(),
                values,
            })
        })
        .collect()
}

impl RunConfig {
    /// Apply one `key = value` assignment (used for parsing and sweeps).
    fn assign(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "n" => self.n = parse_count(value)?,
            "a" => self.a = parse_real(value)?,
            "tau" => self.tau = parse_real(value)?,
            "t_final" => self.t_final = parse_real(value)?,
            "init" => self.init = InitSpec::parse(value)?,
            "newton_tol" => self.newton_tol = parse_real(value)?,
            "max_iter" => self.max_iter = parse_count(value)?,
            "delta_min" => self.delta_min = parse_real(value)?,
            "snapshot_every" => self.snapshot_every = parse_count(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "battery_max_k" => self.battery_max_k = parse_count(value)?,
            "battery_m_time" => self.battery_m_time = parse_count(value)?,
            "weak_form_tol" => self.weak_form_tol = parse_real(value)?,
            "sweep" => self.sweep = parse_sweep(value)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    fn with_defaults() -> Self {
        Self {
            n: 0,
            a: 0.0,
            tau: 0.0,
            t_final: 0.0,
            init: InitSpec::Zero,
            newton_tol: 1e-10,
            max_iter: 60,
            delta_min: 1e-8,
            snapshot_every: 1,
            output_dir: PathBuf::from("vicinal-out"),
            battery_max_k: 4,
            battery_m_time: 2,
            weak_form_tol: 1e-4,
            sweep: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        PeriodicGrid::new(self.n).map_err(|_| invalid("n must be even and at least 8"))?;
        BarrierParams::new(self.a).map_err(|_| invalid("a must be positive"))?;
        if !(self.t_final > 0.0) {
            return Err(invalid("t_final must be positive"));
        }
        self.step_config()
            .validate()
            .map_err(|e| invalid(e.to_string().trim_start_matches("invalid parameter: ").to_string()))?;
        if self.delta_min >= self.a {
            return Err(invalid("delta_min must be smaller than a"));
        }
        if self.snapshot_every == 0 {
            return Err(invalid("snapshot_every must be positive"));
        }
        if self.battery_max_k == 0 || self.battery_max_k > self.n / 4 {
            return Err(invalid("battery_max_k must lie in 1..=n/4"));
        }
        if self.battery_m_time == 0 {
            return Err(invalid("battery_m_time must be positive"));
        }
        if !(self.weak_form_tol > 0.0) {
            return Err(invalid("weak_form_tol must be positive"));
        }
        let nyquist = self.n / 2;
        if let Some(k) = self.init.modes().into_iter().find(|&k| k == 0 || k >= nyquist) {
            return Err(invalid(format!("init mode {k} must lie in 1..n/2")));
        }
        Ok(())
    }

    pub fn params(&self) -> BarrierParams {
        BarrierParams::new(self.a).expect("validated")
    }

    pub fn grid(&self) -> PeriodicGrid {
        PeriodicGrid::new(self.n).expect("validated")
    }

    pub fn step_config(&self) -> StepConfig {
        let mut cfg = StepConfig::new(self.tau);
        cfg.newton_tol = self.newton_tol;
        cfg.max_iter = self.max_iter;
        cfg.delta_min = self.delta_min;
        cfg
    }

    /// One configuration per point of the sweep grid, labelled by its
    /// overrides. Without sweep axes this is just `self`.
    pub fn expand_sweep(&self) -> Result<Vec<(String, RunConfig)>, ConfigError> {
        let mut out = vec![(String::new(), self.clone())];
        for axis in &self.sweep {
            let mut next = Vec::with_capacity(out.len() * axis.values.len());
            for (label, cfg) in &out {
                for value in &axis.values {
                    let mut c = cfg.clone();
                    c.assign(&axis.key, value)
                        .map_err(|reason| invalid(format!("sweep value {}={value}: {reason}", axis.key)))?;
                    let part = format!("{}={}", axis.key, value);
                    let label = if label.is_empty() { part } else { format!("{label} {part}") };
                    next.push((label, c));
                }
            }
            out = next;
        }
        for (label, cfg) in &mut out {
            cfg.sweep.clear();
            cfg.validate()
                .map_err(|e| invalid(format!("sweep point `{label}`: {e}")))?;
        }
        Ok(out)
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::with_defaults();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(parse_err(line_no, key, "missing key"));
        }
        if !REQUIRED_KEYS.contains(&key) && !OPTIONAL_KEYS.contains(&key) {
            return Err(parse_err(line_no, key, "unknown key"));
        }
        if !seen.insert(key.to_string()) {
            return Err(parse_err(line_no, key, "duplicate key"));
        }
        cfg.assign(key, value).map_err(|reason| parse_err(line_no, key, reason))?;
    }
    if let Some(missing) = REQUIRED_KEYS.iter().find(|k| !seen.contains(**k)) {
        return Err(invalid(format!("missing required key `{missing}`")));
    }
    cfg.validate()?;
    Ok(cfg)
}
