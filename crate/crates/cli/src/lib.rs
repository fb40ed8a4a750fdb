//! Experiment runner behind the `keygraph` binary.
//!
//! Every command takes a parsed [`ConfigFile`] plus command-line overrides
//! and returns the text to print, so the binary stays a thin wrapper.

pub mod config;
pub mod csv;

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use keygraph_core::graphgen::{generate, RngStream};
use keygraph_core::model::{critical_threshold, derive, theorem_prediction, ModelParams};
use keygraph_core::montecarlo::{run_sweep, run_trials, SweepAxis, SweepReport};
use thiserror::Error;

pub use config::ConfigFile;

/// Transition interval bounds reported by `sweep`.
pub const TRANSITION_LOW: f64 = 0.10;
pub const TRANSITION_HIGH: f64 = 0.95;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Runtime(#[from] keygraph_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io { .. } => 3,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, config: &ConfigFile) -> ConfigFile {
        let mut config = config.clone();
        if let Some(seed) = self.seed {
            config.run.master_seed = seed;
        }
        if let Some(workers) = self.workers {
            config.run.workers = Some(workers);
        }
        if let Some(out) = &self.out {
            config.run.output_path = Some(out.display().to_string());
        }
        config
    }
}

fn fmt_row(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| format!("{:>14}", csv::format_real(v)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Table of derived quantities for the config's base model.
pub fn cmd_derive(config: &ConfigFile) -> Result<String, CliError> {
    let params = config.model_params()?;
    let mut out = derive_table(&params);
    if config.sweep.is_some() {
        out.push_str(&cmd_threshold(config)?);
    }
    Ok(out)
}

pub fn derive_table(params: &ModelParams) -> String {
    let d = derive(params);
    let r = params.num_classes();
    let mut out = String::new();
    writeln!(
        out,
        "n = {}, r = {r}, P = {}",
        params.n(),
        params.keys().pool_size()
    )
    .unwrap();
    writeln!(out, "{:>5} {:>14} {:>6} {:>14} {:>14}", "class", "mu", "K", "lambda", "Lambda").unwrap();
    for i in 0..r {
        writeln!(
            out,
            "{:>5} {:>14} {:>6} {:>14} {:>14}",
            i + 1,
            csv::format_real(params.dist().probs()[i]),
            params.keys().ring_size(i),
            csv::format_real(d.mean_key_edge[i]),
            csv::format_real(d.mean_edge[i]),
        )
        .unwrap();
    }
    writeln!(out, "key-sharing probabilities p_ij:").unwrap();
    for row in &d.key_share {
        writeln!(out, "{}", fmt_row(row.iter().copied())).unwrap();
    }
    writeln!(
        out,
        "m = {}, d = {}, s = {}",
        d.min_class + 1,
        d.strongest_channel_class + 1,
        d.strongest_link_class + 1
    )
    .unwrap();
    writeln!(out, "c_n = {}", csv::format_real(d.scaling_constant)).unwrap();
    writeln!(out, "alpha_md * ln n = {}", csv::format_real(d.alpha_md_log_n)).unwrap();
    writeln!(out, "alpha_mm * ln n = {}", csv::format_real(d.alpha_mm_log_n)).unwrap();
    match theorem_prediction(d.scaling_constant) {
        Ok(p) => writeln!(out, "prediction = {p}").unwrap(),
        Err(e) => writeln!(out, "prediction unavailable: {e}").unwrap(),
    }
    out
}

/// Smallest swept value predicted to clear the connectivity level.
pub fn threshold_of(config: &ConfigFile) -> Result<Option<f64>, CliError> {
    let spec = config.experiment()?;
    let base = &spec.base_params;
    match &spec.axis {
        SweepAxis::RingSize(rule) => {
            let lo = spec.values.iter().copied().fold(f64::INFINITY, f64::min) as u32;
            let hi = spec.values.iter().copied().fold(f64::NEG_INFINITY, f64::max) as u32;
            let t = critical_threshold(
                base.n(),
                base.dist(),
                base.channel(),
                base.keys().pool_size(),
                |k1| rule.apply(k1, base.keys()),
                lo..=hi,
            )?;
            Ok(t.map(f64::from))
        }
        _ => {
            let level = keygraph_core::model::connectivity_level(base.n());
            for &v in &spec.values {
                if derive(&spec.params_at(v)?).min_mean_edge() > level {
                    return Ok(Some(v));
                }
            }
            Ok(None)
        }
    }
}

pub fn cmd_threshold(config: &ConfigFile) -> Result<String, CliError> {
    let spec = config.experiment()?;
    let axis = spec.axis.name();
    Ok(match threshold_of(config)? {
        Some(t) => {
            let d = derive(&spec.params_at(t)?);
            format!(
                "{axis} threshold = {} (m = {}, c_n = {})\n",
                csv::format_real(t),
                d.min_class + 1,
                csv::format_real(d.scaling_constant)
            )
        }
        None => format!("{axis} threshold: none in range\n"),
    })
}

/// Runs the sweep without touching the filesystem.
pub fn sweep_report(config: &ConfigFile) -> Result<SweepReport, CliError> {
    let spec = config.experiment()?;
    Ok(run_sweep(&spec, config.workers())?)
}

pub fn sweep_summary(report: &SweepReport) -> String {
    let mut out = String::new();
    writeln!(out, "{} rows over {}", report.rows.len(), report.axis_name).unwrap();
    writeln!(
        out,
        "{:>12} {:>12} {:>12} {:>12}",
        report.axis_name, "p_no_iso", "p_conn", "c_n"
    )
    .unwrap();
    for row in &report.rows {
        writeln!(
            out,
            "{:>12} {:>12} {:>12} {:>12}{}",
            csv::format_real(row.sweep_value),
            csv::format_real(row.p_no_isolated),
            csv::format_real(row.p_connected),
            csv::format_real(row.scaling_constant),
            if row.is_predicted_threshold { "  <- threshold" } else { "" }
        )
        .unwrap();
    }
    match report.threshold {
        Some(t) => writeln!(out, "predicted threshold: {}", csv::format_real(t)).unwrap(),
        None => writeln!(out, "predicted threshold: none in range").unwrap(),
    }
    match report.transition_interval(TRANSITION_LOW, TRANSITION_HIGH) {
        Some((lo, hi)) => writeln!(
            out,
            "transition interval (p_connected {TRANSITION_LOW} -> {TRANSITION_HIGH}): [{}, {}]",
            csv::format_real(lo),
            csv::format_real(hi)
        )
        .unwrap(),
        None => writeln!(out, "transition interval: not observed").unwrap(),
    }
    out
}

/// Writes `text` to `path`, removing the file if the write fails.
pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| {
        let _ = fs::remove_file(path);
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    })
}

/// Runs the sweep and writes the CSV to `run.output_path` when set; otherwise
/// the CSV is returned ahead of the summary.
pub fn cmd_sweep(config: &ConfigFile) -> Result<String, CliError> {
    let report = sweep_report(config)?;
    let table = csv::render(&report);
    let summary = sweep_summary(&report);
    match &config.run.output_path {
        Some(path) => {
            write_file(Path::new(path), &table)?;
            Ok(format!("wrote {path}\n{summary}"))
        }
        None => Ok(format!("{table}\n{summary}")),
    }
}

/// Trials on the base model; optionally dumps the first sampled graph.
pub fn cmd_trial(config: &ConfigFile, dump: Option<&Path>) -> Result<String, CliError> {
    let params = config.model_params()?;
    let seed = config.run.master_seed;
    let trials = config.run.trials;
    if trials == 0 {
        return Err(CliError::Config("run.trials: must be at least 1".into()));
    }
    let s = run_trials(&params, trials, seed, config.workers())?;
    let mut out = String::new();
    writeln!(out, "trials = {}, master_seed = {seed}", s.trials).unwrap();
    writeln!(
        out,
        "no isolated nodes: {}/{}, connected: {}/{}",
        s.no_isolated_successes, s.trials, s.connected_successes, s.trials
    )
    .unwrap();
    writeln!(
        out,
        "mean isolated = {} (sd {}), analytic = {}",
        csv::format_real(s.mean_isolated),
        csv::format_real(s.isolated_std),
        csv::format_real(keygraph_core::model::expected_isolated(&params))
    )
    .unwrap();
    writeln!(
        out,
        "mean class-{} isolated = {}, analytic = {}",
        s.min_class + 1,
        csv::format_real(s.mean_class_m_isolated),
        csv::format_real(keygraph_core::model::expected_class_m_isolated(&params))
    )
    .unwrap();
    writeln!(out, "mean edge count = {}", csv::format_real(s.mean_edge_count)).unwrap();

    if let Some(path) = dump {
        let g = generate(&params, &mut RngStream::new(seed, 0));
        let io_err = |source| CliError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = fs::File::create(path).map_err(io_err)?;
        if let Err(e) = g.write_edge_list(BufWriter::new(file)) {
            let _ = fs::remove_file(path);
            return Err(e.into());
        }
        writeln!(out, "wrote trial 0 graph to {}", path.display()).unwrap();
    }
    Ok(out)
}
