//! Flat `key = value` run settings. Every field is optional so that a file
//! and command-line flags can be layered with [`RunSettings::merge`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{AlgoSpec, ExperimentConfig};
use crate::action_set::ActionSet;
use crate::environment::{EnvKind, EnvironmentSpec};
use crate::error::{Error, Result};
use crate::learner::{AlgoKind, LearnerParams};

/// Which action set to build.
#[derive(Clone, Debug, PartialEq)]
pub enum SetChoice {
    Hypercube,
    MSet,
    /// Explicit vertex list loaded from a file.
    Enumerated(PathBuf),
}

impl FromStr for SetChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "hypercube" => Ok(SetChoice::Hypercube),
            "mset" | "m-set" => Ok(SetChoice::MSet),
            other => match other.strip_prefix("enumerated:") {
                Some(path) if !path.is_empty() => Ok(SetChoice::Enumerated(PathBuf::from(path))),
                _ => Err(Error::InvalidParameter(format!(
                    "unknown action set '{other}' (expected hypercube, mset or enumerated:<file>)"
                ))),
            },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSettings {
    pub env: Option<EnvKind>,
    pub set: Option<SetChoice>,
    pub algos: Option<Vec<AlgoKind>>,
    pub d: Option<usize>,
    pub m: Option<usize>,
    pub gap: Option<f64>,
    pub phase_base: Option<f64>,
    pub horizon: Option<u64>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub log_points: Option<usize>,
    pub log_times: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub summary: Option<bool>,
    pub gamma_override: Option<f64>,
    pub lr_scale: Option<f64>,
    pub lr_grid: Option<bool>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("bad value '{value}' for '{key}': {e}"))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("bad value '{value}' for '{key}': expected true or false")),
    }
}

impl RunSettings {
    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut s = RunSettings::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line: n + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            s.set_key(key, value).map_err(err)?;
        }
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    fn set_key(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "env" => self.env = Some(parse_value(key, value)?),
            "set" => self.set = Some(value.parse().map_err(|e: Error| e.to_string())?),
            "algo" | "algos" => self.algos = Some(parse_list(key, value)?),
            "d" => self.d = Some(parse_value(key, value)?),
            "m" => self.m = Some(parse_value(key, value)?),
            "gap" => self.gap = Some(parse_value(key, value)?),
            "phase_base" => self.phase_base = Some(parse_value(key, value)?),
            "horizon" | "T" => self.horizon = Some(parse_horizon(value).map_err(|e| format!("bad horizon: {e}"))?),
            "runs" => self.runs = Some(parse_value(key, value)?),
            "seed" => self.seed = Some(parse_value(key, value)?),
            "log_points" => self.log_points = Some(parse_value(key, value)?),
            "log_times" => self.log_times = Some(parse_list(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "summary" => self.summary = Some(parse_bool(key, value)?),
            "gamma_override" | "gamma" => self.gamma_override = Some(parse_value(key, value)?),
            "lr_scale" => self.lr_scale = Some(parse_value(key, value)?),
            "lr_grid" => self.lr_grid = Some(parse_bool(key, value)?),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: RunSettings) -> RunSettings {
        RunSettings {
            env: over.env.or(self.env),
            set: over.set.or(self.set),
            algos: over.algos.or(self.algos),
            d: over.d.or(self.d),
            m: over.m.or(self.m),
            gap: over.gap.or(self.gap),
            phase_base: over.phase_base.or(self.phase_base),
            horizon: over.horizon.or(self.horizon),
            runs: over.runs.or(self.runs),
            seed: over.seed.or(self.seed),
            log_points: over.log_points.or(self.log_points),
            log_times: over.log_times.or(self.log_times),
            out: over.out.or(self.out),
            summary: over.summary.or(self.summary),
            gamma_override: over.gamma_override.or(self.gamma_override),
            lr_scale: over.lr_scale.or(self.lr_scale),
            lr_grid: over.lr_grid.or(self.lr_grid),
        }
    }

    /// Fills unset fields from [`ExperimentConfig::desk_default`] and builds
    /// the experiment. The bandit environment defaults to the hypercube and
    /// the bandit-feedback learner.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let base = ExperimentConfig::desk_default();
        let env_kind = self.env.unwrap_or(base.env.kind);
        let bandit = env_kind == EnvKind::BanditStochastic;
        let set_choice = self.set.clone().unwrap_or(if bandit {
            SetChoice::Hypercube
        } else {
            SetChoice::MSet
        });
        let set = match &set_choice {
            SetChoice::Enumerated(path) => Some(ActionSet::load_enumerated(path)?),
            _ => None,
        };
        let d = match &set {
            Some(s) => {
                if let Some(d) = self.d.filter(|&d| d != s.dim()) {
                    return Err(Error::InvalidParameter(format!(
                        "d = {d} conflicts with the {}-dimensional vertex file",
                        s.dim()
                    )));
                }
                s.dim()
            }
            None => self.d.unwrap_or(base.env.d),
        };
        let m = self.m.unwrap_or(if d == base.env.d { base.env.m } else { (d / 2).max(1) });
        let set = match (set, set_choice) {
            (Some(s), _) => s,
            (None, SetChoice::Hypercube) => ActionSet::hypercube(d)?,
            (None, _) => ActionSet::mset(d, m)?,
        };
        let mut env = EnvironmentSpec::new(
            env_kind,
            d,
            m,
            self.gap.unwrap_or(base.env.gap),
            self.horizon.unwrap_or(base.env.horizon),
        )?;
        if let Some(b) = self.phase_base {
            env.phase_base = b;
        }
        let params = LearnerParams {
            gamma_override: self.gamma_override,
            lr_scale: self.lr_scale.unwrap_or(1.0),
        };
        let kinds = self.algos.clone().unwrap_or_else(|| {
            if bandit {
                vec![AlgoKind::BanditHybrid]
            } else {
                base.algorithms.iter().map(|a| a.kind).collect()
            }
        });
        let algorithms = kinds
            .into_iter()
            .flat_map(|kind| {
                if self.lr_grid.unwrap_or(false) {
                    AlgoSpec::lr_grid(kind, params)
                } else {
                    vec![AlgoSpec {
                        kind,
                        params,
                        label: kind.name().to_string(),
                    }]
                }
            })
            .collect();
        let config = ExperimentConfig {
            env,
            set,
            algorithms,
            runs: self.runs.unwrap_or(base.runs),
            base_seed: self.seed.unwrap_or(base.base_seed),
            log_points: self.log_points.unwrap_or(base.log_points),
            extra_log_times: self.log_times.clone().unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }
}

/// Accepts plain integers and scientific notation such as `1e5`.
fn parse_horizon(value: &str) -> std::result::Result<u64, String> {
    if let Ok(t) = value.parse::<u64>() {
        return Ok(t);
    }
    let f: f64 = value.parse().map_err(|_| format!("'{value}' is not a number"))?;
    if f.fract() == 0.0 && f >= 1.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(format!("'{value}' is not a positive integer"))
    }
}
