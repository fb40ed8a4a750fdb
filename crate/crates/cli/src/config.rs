//! Experiment configuration file (TOML).
//!
//! ```toml
//! [model]
//! n = 500
//! r = 2
//! mu = [0.5, 0.5]
//! K = [10, 15]
//! P = 10000
//! alpha = [[0.3, 0.2], [0.2, 0.3]]
//!
//! [sweep]
//! axis = "K1"                 # or "alpha_12", "alpha_diag"
//! range = { start = 10, end = 35, step = 1 }   # or values = [...]
//! linked_rule = "K2=K1+5"
//!
//! [run]
//! trials = 400
//! master_seed = 2016
//! workers = 8
//! output_path = "fig1.csv"
//! ```

use std::path::Path;

use keygraph_core::model::{ChannelMatrix, ClassDistribution, KeyProfile, ModelParams};
use keygraph_core::montecarlo::{ExperimentSpec, ProfileRule, SweepAxis, DEFAULT_TRIALS};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 2016;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: usize,
    pub r: usize,
    pub mu: Vec<f64>,
    #[serde(rename = "K")]
    pub ring_sizes: Vec<u32>,
    #[serde(rename = "P")]
    pub pool_size: u32,
    pub alpha: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<RangeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linked_rule: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            master_seed: DEFAULT_SEED,
            workers: None,
            output_path: None,
        }
    }
}

fn config_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let m = &self.model;
        if m.mu.len() != m.r {
            return Err(config_err("model.mu", format!("has {} entries, r = {}", m.mu.len(), m.r)));
        }
        if m.ring_sizes.len() != m.r {
            return Err(config_err("model.K", format!("has {} entries, r = {}", m.ring_sizes.len(), m.r)));
        }
        if m.alpha.len() != m.r {
            return Err(config_err("model.alpha", format!("has {} rows, r = {}", m.alpha.len(), m.r)));
        }
        let dist = ClassDistribution::new(m.mu.clone()).map_err(|e| config_err("model.mu", e))?;
        let keys = KeyProfile::new(m.ring_sizes.clone(), m.pool_size)
            .map_err(|e| config_err("model.K/P", e))?;
        let channel = ChannelMatrix::new(m.alpha.clone()).map_err(|e| config_err("model.alpha", e))?;
        ModelParams::new(m.n, dist, keys, channel).map_err(|e| config_err("model.n", e))
    }

    pub fn sweep_section(&self) -> Result<&SweepSection, CliError> {
        self.sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("sweep: section is required for this command".into()))
    }

    pub fn experiment(&self) -> Result<ExperimentSpec, CliError> {
        let base = self.model_params()?;
        let sweep = self.sweep_section()?;
        let axis = parse_axis(&sweep.axis, sweep.linked_rule.as_deref(), self.model.r)?;
        let values = sweep.sweep_values()?;
        if self.run.trials == 0 {
            return Err(config_err("run.trials", "must be at least 1"));
        }
        ExperimentSpec::new(base, axis, values, self.run.trials, self.run.master_seed)
            .map_err(|e| config_err("sweep", e))
    }

    pub fn workers(&self) -> usize {
        self.run.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }

    /// Config describing `spec` with the sweep values listed explicitly.
    pub fn from_experiment(spec: &ExperimentSpec, workers: Option<usize>) -> Result<Self, CliError> {
        let p = &spec.base_params;
        let (axis, linked_rule) = match &spec.axis {
            SweepAxis::RingSize(rule) => ("K1".to_string(), format_rule(rule)),
            SweepAxis::Explicit(_) => {
                return Err(CliError::Config(
                    "sweep.axis: explicit sweeps have no config representation".into(),
                ))
            }
            other => (other.name(), None),
        };
        Ok(Self {
            model: ModelSection {
                n: p.n(),
                r: p.num_classes(),
                mu: p.dist().probs().to_vec(),
                ring_sizes: p.keys().ring_sizes().to_vec(),
                pool_size: p.keys().pool_size(),
                alpha: p.channel().rows().to_vec(),
            },
            sweep: Some(SweepSection {
                axis,
                values: Some(spec.values.clone()),
                range: None,
                linked_rule,
            }),
            run: RunSection {
                trials: spec.trials,
                master_seed: spec.master_seed,
                workers,
                output_path: None,
            },
        })
    }
}

impl SweepSection {
    pub fn sweep_values(&self) -> Result<Vec<f64>, CliError> {
        match (&self.values, &self.range) {
            (Some(_), Some(_)) => Err(config_err("sweep", "give either `values` or `range`, not both")),
            (None, None) => Err(config_err("sweep", "one of `values` or `range` is required")),
            (Some(values), None) => Ok(values.clone()),
            (None, Some(range)) => range.expand(),
        }
    }
}

impl RangeSpec {
    /// `start, start + step, …` up to `end` inclusive, each value rounded to
    /// twelve decimals so accumulated steps land on the intended grid.
    pub fn expand(&self) -> Result<Vec<f64>, CliError> {
        let RangeSpec { start, end, step } = *self;
        if !(step.is_finite() && step > 0.0) {
            return Err(config_err("sweep.range.step", "must be positive"));
        }
        if !(start.is_finite() && end.is_finite() && start <= end) {
            return Err(config_err("sweep.range", "need finite start <= end"));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        Ok((0..=count)
            .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
            .collect())
    }
}

/// Parses `"K1"`, `"alpha_diag"`, or `"alpha_ij"` (`"alpha_12"` or `"alpha_1_2"`).
pub fn parse_axis(axis: &str, linked_rule: Option<&str>, r: usize) -> Result<SweepAxis, CliError> {
    let field = "sweep.axis";
    match axis {
        "K1" => {
            let rule = match linked_rule {
                Some(text) => parse_rule(text, r)?,
                None => ProfileRule { offsets: vec![None; r] },
            };
            Ok(SweepAxis::RingSize(rule))
        }
        "alpha_diag" => Ok(SweepAxis::ChannelDiagonal),
        _ => {
            let rest = axis
                .strip_prefix("alpha_")
                .ok_or_else(|| config_err(field, format!("unknown axis `{axis}`")))?;
            let (i, j) = match rest.split_once('_') {
                Some((i, j)) => (i.parse::<usize>(), j.parse::<usize>()),
                None if rest.len() == 2 => (rest[..1].parse(), rest[1..].parse()),
                None => return Err(config_err(field, format!("unknown axis `{axis}`"))),
            };
            let (i, j) = match (i, j) {
                (Ok(i), Ok(j)) if (1..=r).contains(&i) && (1..=r).contains(&j) => (i, j),
                _ => return Err(config_err(field, format!("`{axis}` does not name an entry of a {r}x{r} matrix"))),
            };
            if linked_rule.is_some() {
                return Err(config_err("sweep.linked_rule", "only applies to the K1 axis"));
            }
            Ok(SweepAxis::ChannelEntry { i: i - 1, j: j - 1 })
        }
    }
}

/// Parses comma-separated links such as `"K2=K1+5, K3=K1+10"`.
pub fn parse_rule(text: &str, r: usize) -> Result<ProfileRule, CliError> {
    let field = "sweep.linked_rule";
    let mut offsets = vec![None; r];
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let compact: String = part.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || config_err(field, format!("cannot parse `{part}`, expected `Ki=K1+d`"));
        let (lhs, rhs) = compact.split_once('=').ok_or_else(bad)?;
        let class: usize = lhs.strip_prefix('K').and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let offset: u32 = match rhs.strip_prefix("K1") {
            Some("") => 0,
            Some(tail) => tail.strip_prefix('+').and_then(|s| s.parse().ok()).ok_or_else(bad)?,
            None => return Err(bad()),
        };
        if !(2..=r).contains(&class) {
            return Err(config_err(field, format!("K{class} is not a linkable class for r = {r}")));
        }
        offsets[class - 1] = Some(offset);
    }
    Ok(ProfileRule { offsets })
}

fn format_rule(rule: &ProfileRule) -> Option<String> {
    let parts: Vec<String> = rule
        .offsets
        .iter()
        .enumerate()
        .skip(1)
        .filter_map(|(i, off)| off.map(|d| format!("K{}=K1+{d}", i + 1)))
        .collect();
    (!parts.is_empty()).then(|| parts.join(","))
}
