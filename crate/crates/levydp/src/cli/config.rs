//! Flat key-value run configuration shared by every subcommand.
//!
//! Configuration comes from an INI-style file of `key = value` lines
//! plus command-line flags; flags override file values. Every key
//! belongs to a fixed table, values are range-checked the moment they
//! enter, and the fully resolved table is echoed into each output
//! directory as `manifest.txt` so a run can be reproduced from its
//! artifacts alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// All recognized configuration keys with their mirroring flags.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("noise.alpha", "--alpha"),
    ("noise.sigma_alpha", "--sigma-alpha"),
    ("noise.sigma2", "--sigma2"),
    ("problem.n", "--n"),
    ("problem.d", "--d"),
    ("problem.sg", "--sg"),
    ("problem.gamma", "--gamma"),
    ("problem.r", "--r"),
    ("accounting.mode", "--mode"),
    ("accounting.setting", "--setting"),
    ("accounting.beta", "--beta"),
    ("accounting.t", "--t"),
    ("accounting.steps", "--steps"),
    ("accounting.eta", "--eta"),
    ("accounting.delta", "--delta"),
    ("accounting.axis", "--axis"),
    ("accounting.values", "--values"),
    ("accounting.beta_grid", "--beta-grid"),
    ("simulate.eta", "--eta"),
    ("simulate.steps", "--steps"),
    ("simulate.batch", "--batch"),
    ("simulate.trajectories", "--trajectories"),
    ("simulate.checkpoints", "--checkpoints"),
    ("simulate.data_gap", "--data-gap"),
    ("simulate.init_scale", "--init-scale"),
    ("simulate.init_point", "--init-point"),
    ("simulate.projection", "--projection"),
    ("simulate.seed", "--seed"),
    ("verify.suite", "--suite"),
    ("verify.seed", "--seed"),
    ("output.dir", "--out"),
];

fn flag_for(key: &str) -> &'static str {
    KNOWN_KEYS
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, f)| *f)
        .unwrap_or("<no flag>")
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.trim().parse::<f64>().map_err(|_| {
        Error::Config(format!("key '{key}' expects a number, got '{value}'"))
    })
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value.trim().parse::<u64>().map_err(|_| {
        Error::Config(format!("key '{key}' expects a nonnegative integer, got '{value}'"))
    })
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let items: Vec<f64> = value
        .split(',')
        .map(|s| parse_f64(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("key '{key}' expects a nonempty list")));
    }
    Ok(items)
}

fn parse_u64_list(key: &str, value: &str) -> Result<Vec<u64>> {
    value.split(',').map(|s| parse_u64(key, s)).collect()
}

fn check_range(key: &str, value: f64, constraint: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("key '{key}' must be {constraint}, got {value}")))
    }
}

/// Validates one value against its key's range; unknown keys are
/// rejected with the offending name.
fn validate(key: &str, value: &str) -> Result<()> {
    match key {
        "noise.alpha" => {
            let v = parse_f64(key, value)?;
            check_range(key, v, "a stability index in (0, 2)", v.is_finite() && v > 0.0 && v < 2.0)
        }
        "noise.sigma_alpha" | "noise.sigma2" | "problem.sg" => {
            let v = parse_f64(key, value)?;
            check_range(key, v, "finite and nonnegative", v.is_finite() && v >= 0.0)
        }
        "problem.gamma" | "problem.r" | "accounting.eta" | "simulate.eta"
        | "simulate.projection" => {
            let v = parse_f64(key, value)?;
            check_range(key, v, "finite and positive", v.is_finite() && v > 0.0)
        }
        "problem.n" | "problem.d" | "accounting.steps" | "simulate.steps" | "simulate.batch"
        | "simulate.trajectories" => {
            let v = parse_u64(key, value)?;
            if v == 0 {
                return Err(Error::Config(format!("key '{key}' must be at least 1, got 0")));
            }
            Ok(())
        }
        "accounting.beta" => {
            let v = parse_f64(key, value)?;
            check_range(key, v, "a Renyi order above 1", v.is_finite() && v > 1.0)
        }
        "accounting.t" => {
            let v = parse_f64(key, value)?;
            check_range(key, v, "finite and nonnegative", v.is_finite() && v >= 0.0)
        }
        "accounting.delta" => {
            let v = parse_f64(key, value)?;
            check_range(key, v, "strictly between 0 and 1", v > 0.0 && v < 1.0)
        }
        "accounting.mode" => match value {
            "multifractal" | "pure-jump" => Ok(()),
            other => Err(Error::Config(format!(
                "key '{key}' must be 'multifractal' or 'pure-jump', got '{other}'"
            ))),
        },
        "accounting.setting" => match value {
            "continuous" | "discrete" => Ok(()),
            other => Err(Error::Config(format!(
                "key '{key}' must be 'continuous' or 'discrete', got '{other}'"
            ))),
        },
        "accounting.axis" => match value {
            "alpha" | "d" | "n" | "beta" | "sigma" => Ok(()),
            other => Err(Error::Config(format!(
                "key '{key}' must be one of alpha, d, n, beta, sigma, got '{other}'"
            ))),
        },
        "accounting.values" => parse_f64_list(key, value).map(|_| ()),
        "accounting.beta_grid" => {
            for v in parse_f64_list(key, value)? {
                check_range(key, v, "a list of Renyi orders above 1", v.is_finite() && v > 1.0)?;
            }
            Ok(())
        }
        "simulate.data_gap" | "simulate.init_scale" => {
            let v = parse_f64(key, value)?;
            check_range(key, v, "finite and nonnegative", v.is_finite() && v >= 0.0)
        }
        "simulate.checkpoints" => {
            let list = parse_u64_list(key, value)?;
            if list.is_empty() {
                return Err(Error::Config(format!("key '{key}' expects a nonempty list")));
            }
            Ok(())
        }
        "simulate.init_point" => {
            for v in parse_f64_list(key, value)? {
                check_range(key, v, "a list of finite numbers", v.is_finite())?;
            }
            Ok(())
        }
        "simulate.seed" | "verify.seed" => parse_u64(key, value).map(|_| ()),
        "verify.suite" => match value {
            "bregman" | "bbm" | "sampler" | "poincare" | "renyi" | "flow" | "all" => Ok(()),
            other => Err(Error::Config(format!(
                "key '{key}' must be a suite name \
                 (bregman, bbm, sampler, poincare, renyi, flow, all), got '{other}'"
            ))),
        },
        "output.dir" => {
            if value.is_empty() {
                Err(Error::Config(format!("key '{key}' must be a nonempty path")))
            } else {
                Ok(())
            }
        }
        other => Err(Error::Config(format!("unknown configuration key '{other}'"))),
    }
}

/// Resolved flat configuration, every entry validated on the way in.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    /// Parses an INI-style file: one `key = value` per line, `#` or `;`
    /// comments, no sections. Duplicate keys are rejected so a manifest
    /// never hides an overridden value.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let mut config = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {} of {} is not a 'key = value' pair: '{line}'",
                    lineno + 1,
                    path.display()
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if config.entries.contains_key(key) {
                return Err(Error::Config(format!(
                    "duplicate configuration key '{key}' in {}",
                    path.display()
                )));
            }
            config.set(key, value)?;
        }
        Ok(config)
    }

    /// Validates and stores one entry, replacing any previous value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        validate(key, value)?;
        self.entries.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Stores a default unless the key is already present.
    pub fn set_default(&mut self, key: &str, value: &str) -> Result<()> {
        if !self.entries.contains_key(key) {
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Fails with the key and its flag when the entry is absent.
    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| {
            Error::Config(format!(
                "missing required configuration key '{key}' (flag {})",
                flag_for(key)
            ))
        })
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        parse_f64(key, self.require(key)?)
    }

    pub fn require_u64(&self, key: &str) -> Result<u64> {
        parse_u64(key, self.require(key)?)
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key).map(|v| parse_u64(key, v)).transpose()
    }

    pub fn require_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        parse_f64_list(key, self.require(key)?)
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| parse_f64_list(key, v)).transpose()
    }

    pub fn require_u64_list(&self, key: &str) -> Result<Vec<u64>> {
        parse_u64_list(key, self.require(key)?)
    }

    /// Renders the resolved configuration as sorted `key = value` lines.
    pub fn render_manifest(&self, extra: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (k, v) in extra {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
