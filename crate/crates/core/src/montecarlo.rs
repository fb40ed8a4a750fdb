//! Repeated trials and parameter sweeps.
//!
//! Trial `k` of a run always draws from `RngStream::new(master_seed, first + k)`,
//! where `first` is fixed before any work is scheduled. Outcomes are collected
//! in trial order and reduced on one thread, so every statistic is identical
//! for any worker count.

use rayon::prelude::*;
use rayon::ThreadPool;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analysis::{analyze, TrialOutcome};
use crate::error::{invalid, Error, Result};
use crate::graphgen::{generate, RngStream};
use crate::model::{
    connectivity_level, critical_threshold, derive, expected_class_m_isolated_from,
    expected_isolated_from, KeyProfile, ModelParams,
};

pub const DEFAULT_TRIALS: usize = 400;
pub const CONFIDENCE: f64 = 0.95;

/// Aggregate of `trials` independent realizations of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trials: usize,
    pub no_isolated_successes: usize,
    pub connected_successes: usize,
    pub mean_isolated: f64,
    /// Sample standard deviation (`T - 1` denominator) of the isolated count.
    pub isolated_std: f64,
    /// The minimizing class `m` whose isolated nodes are tracked below.
    pub min_class: usize,
    pub mean_class_m_isolated: f64,
    pub class_m_isolated_std: f64,
    pub mean_edge_count: f64,
    /// Intra-class edges per class, summed over all trials.
    pub intra_class_edges: Vec<usize>,
    /// Trials that were connected yet had an isolated node. Always 0 for n ≥ 2.
    pub implication_violations: usize,
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (t - 1.0)).sqrt())
}

fn summarize(outcomes: &[TrialOutcome], min_class: usize, r: usize) -> TrialSummary {
    let isolated: Vec<f64> = outcomes.iter().map(|o| o.isolated_count as f64).collect();
    let class_m: Vec<f64> = outcomes
        .iter()
        .map(|o| o.class_isolated_counts[min_class] as f64)
        .collect();
    let edges: Vec<f64> = outcomes.iter().map(|o| o.edge_count as f64).collect();
    let (mean_isolated, isolated_std) = mean_and_std(&isolated);
    let (mean_class_m_isolated, class_m_isolated_std) = mean_and_std(&class_m);
    let mut intra_class_edges = vec![0; r];
    for o in outcomes {
        for (total, c) in intra_class_edges.iter_mut().zip(&o.intra_class_edge_counts) {
            *total += c;
        }
    }
    TrialSummary {
        trials: outcomes.len(),
        no_isolated_successes: outcomes.iter().filter(|o| o.isolated_count == 0).count(),
        connected_successes: outcomes.iter().filter(|o| o.is_connected).count(),
        mean_isolated,
        isolated_std,
        min_class,
        mean_class_m_isolated,
        class_m_isolated_std,
        mean_edge_count: mean_and_std(&edges).0,
        intra_class_edges,
        implication_violations: outcomes
            .iter()
            .filter(|o| o.is_connected && o.isolated_count > 0)
            .count(),
    }
}

fn worker_pool(workers: usize) -> Result<ThreadPool> {
    if workers == 0 {
        return Err(invalid("worker count must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::WorkerPool(e.to_string()))
}

/// Runs trials `first_stream..first_stream + trials` and returns the
/// per-trial outcomes in trial order.
pub fn trial_outcomes(
    params: &ModelParams,
    trials: usize,
    master_seed: u64,
    first_stream: u64,
    workers: usize,
) -> Result<Vec<TrialOutcome>> {
    let pool = worker_pool(workers)?;
    Ok(outcomes_in(&pool, params, trials, master_seed, first_stream))
}

fn outcomes_in(
    pool: &ThreadPool,
    params: &ModelParams,
    trials: usize,
    master_seed: u64,
    first_stream: u64,
) -> Vec<TrialOutcome> {
    pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = RngStream::new(master_seed, first_stream + k);
                analyze(&generate(params, &mut rng))
            })
            .collect()
    })
}

/// Runs `trials` realizations on streams `0..trials` of `master_seed`.
pub fn run_trials(
    params: &ModelParams,
    trials: usize,
    master_seed: u64,
    workers: usize,
) -> Result<TrialSummary> {
    if trials == 0 {
        return Err(invalid("trial count must be at least 1"));
    }
    let outcomes = trial_outcomes(params, trials, master_seed, 0, workers)?;
    Ok(summarize(
        &outcomes,
        derive(params).min_class,
        params.num_classes(),
    ))
}

/// `K_1` sweep where other ring sizes either follow `K_1` with a fixed
/// offset or keep their base value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileRule {
    /// `offsets[i] = Some(δ)` sets `K_{i+1} = K_1 + δ`. Entry 0 is ignored.
    pub offsets: Vec<Option<u32>>,
}

impl ProfileRule {
    /// Every class `i ≥ 2` follows `K_i = K_1 + (i - 1) δ`.
    pub fn uniform_step(r: usize, step: u32) -> Self {
        Self {
            offsets: (0..r).map(|i| Some(i as u32 * step)).collect(),
        }
    }

    pub fn apply(&self, k1: u32, base: &KeyProfile) -> Result<KeyProfile> {
        if self.offsets.len() != base.num_classes() {
            return Err(invalid(format!(
                "profile rule covers {} classes, model has {}",
                self.offsets.len(),
                base.num_classes()
            )));
        }
        let sizes = base
            .ring_sizes()
            .iter()
            .zip(&self.offsets)
            .enumerate()
            .map(|(i, (&k, off))| match (i, off) {
                (0, _) => k1,
                (_, Some(delta)) => k1 + delta,
                (_, None) => k,
            })
            .collect();
        KeyProfile::new(sizes, base.pool_size())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Sweep `K_1`, with the other ring sizes linked by the rule.
    RingSize(ProfileRule),
    /// Sweep `α_ij = α_ji` (0-based indices).
    ChannelEntry { i: usize, j: usize },
    /// Sweep every diagonal entry `α_ii` jointly.
    ChannelDiagonal,
    /// One full configuration per swept value; the value is the list index.
    Explicit(Vec<ModelParams>),
}

impl SweepAxis {
    /// Column label, with 1-based class indices.
    pub fn name(&self) -> String {
        match self {
            SweepAxis::RingSize(_) => "K1".to_string(),
            SweepAxis::ChannelEntry { i, j } => format!("alpha_{}{}", i + 1, j + 1),
            SweepAxis::ChannelDiagonal => "alpha_diag".to_string(),
            SweepAxis::Explicit(_) => "explicit".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base_params: ModelParams,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
}

impl ExperimentSpec {
    /// Validates every swept value up front.
    pub fn new(
        base_params: ModelParams,
        axis: SweepAxis,
        values: Vec<f64>,
        trials: usize,
        master_seed: u64,
    ) -> Result<Self> {
        if trials == 0 {
            return Err(invalid("trial count must be at least 1"));
        }
        let values = match (&axis, values.is_empty()) {
            (SweepAxis::Explicit(list), true) => (0..list.len()).map(|i| i as f64).collect(),
            (_, true) => return Err(invalid("sweep needs at least one value")),
            _ => values,
        };
        let spec = Self {
            base_params,
            axis,
            values,
            trials,
            master_seed,
        };
        for &v in &spec.values {
            spec.params_at(v)?;
        }
        Ok(spec)
    }

    /// Configuration for one swept value.
    pub fn params_at(&self, value: f64) -> Result<ModelParams> {
        let base = &self.base_params;
        let built = match &self.axis {
            SweepAxis::RingSize(rule) => ring_size_value(value)
                .and_then(|k1| rule.apply(k1, base.keys()))
                .and_then(|keys| base.with_keys(keys)),
            SweepAxis::ChannelEntry { i, j } => base
                .channel()
                .with_entry(*i, *j, value)
                .and_then(|c| base.with_channel(c)),
            SweepAxis::ChannelDiagonal => base
                .channel()
                .with_diagonal(value)
                .and_then(|c| base.with_channel(c)),
            SweepAxis::Explicit(list) => {
                let idx = value as usize;
                if value.fract() != 0.0 || value < 0.0 || idx >= list.len() {
                    Err(invalid(format!("no explicit configuration at index {value}")))
                } else {
                    Ok(list[idx].clone())
                }
            }
        };
        built.map_err(|e| Error::SweepValue {
            value,
            source: Box::new(e),
        })
    }
}

fn ring_size_value(value: f64) -> Result<u32> {
    if value.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&value) {
        return Err(invalid(format!("K1 = {value} is not a positive integer")));
    }
    Ok(value as u32)
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub params: ModelParams,
    pub summary: TrialSummary,
    pub p_no_isolated: f64,
    pub p_no_isolated_ci: (f64, f64),
    pub p_connected: f64,
    pub p_connected_ci: (f64, f64),
    pub analytic_expected_isolated: f64,
    pub analytic_expected_class_m_isolated: f64,
    pub scaling_constant: f64,
    pub is_predicted_threshold: bool,
}

impl SweepRow {
    pub fn n(&self) -> usize {
        self.params.n()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub axis_name: String,
    pub rows: Vec<SweepRow>,
    /// Swept value predicted to first clear `Λ_m > ln n / n`.
    pub threshold: Option<f64>,
}

impl SweepReport {
    /// Values `(lo, hi)` bracketing the rise of the connectivity curve: `lo`
    /// is the last value with `p_connected ≤ low` and `hi` the first later
    /// value with `p_connected ≥ high`.
    pub fn transition_interval(&self, low: f64, high: f64) -> Option<(f64, f64)> {
        let lo = self.rows.iter().rposition(|r| r.p_connected <= low)?;
        let hi = self.rows[lo..].iter().position(|r| r.p_connected >= high)? + lo;
        Some((self.rows[lo].sweep_value, self.rows[hi].sweep_value))
    }
}

fn predicted_threshold(spec: &ExperimentSpec, rows_params: &[ModelParams]) -> Result<Option<f64>> {
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
        _ => Ok(spec
            .values
            .iter()
            .zip(rows_params)
            .find(|(_, p)| derive(p).min_mean_edge() > connectivity_level(p.n()))
            .map(|(v, _)| *v)),
    }
}

/// Runs every swept value; value `i` uses streams `i·T .. (i+1)·T`.
pub fn run_sweep(spec: &ExperimentSpec, workers: usize) -> Result<SweepReport> {
    let pool = worker_pool(workers)?;
    let params: Vec<ModelParams> = spec
        .values
        .iter()
        .map(|&v| spec.params_at(v))
        .collect::<Result<_>>()?;
    let threshold = predicted_threshold(spec, &params)?;
    let t = spec.trials;

    let mut rows = Vec::with_capacity(params.len());
    for (idx, (value, p)) in spec.values.iter().zip(params).enumerate() {
        let derived = derive(&p);
        let outcomes = outcomes_in(&pool, &p, t, spec.master_seed, (idx * t) as u64);
        let summary = summarize(&outcomes, derived.min_class, p.num_classes());
        let p_no_isolated = summary.no_isolated_successes as f64 / t as f64;
        let p_connected = summary.connected_successes as f64 / t as f64;
        rows.push(SweepRow {
            sweep_value: *value,
            p_no_isolated,
            p_no_isolated_ci: wilson_interval(summary.no_isolated_successes, t, CONFIDENCE)?,
            p_connected,
            p_connected_ci: wilson_interval(summary.connected_successes, t, CONFIDENCE)?,
            analytic_expected_isolated: expected_isolated_from(&p, &derived),
            analytic_expected_class_m_isolated: expected_class_m_isolated_from(&p, &derived),
            scaling_constant: derived.scaling_constant,
            is_predicted_threshold: threshold == Some(*value),
            summary,
            params: p,
        });
    }
    Ok(SweepReport {
        axis_name: spec.axis.name(),
        rows,
        threshold,
    })
}

/// Wilson score interval for a binomial proportion, clamped to `[0, 1]`.
pub fn wilson_interval(successes: usize, trials: usize, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(invalid(format!(
            "need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(format!("confidence {confidence} is outside (0, 1)")));
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let t = trials as f64;
    let p = successes as f64 / t;
    let z2 = z * z;
    let denom = 1.0 + z2 / t;
    let center = (p + z2 / (2.0 * t)) / denom;
    let half = z * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    let low = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let high = if successes == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    Ok((low, high))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelMatrix, ClassDistribution};

    fn params(k: [u32; 2], pool: u32, alpha: f64, n: usize, relaxed: bool) -> ModelParams {
        let keys = if relaxed {
            KeyProfile::relaxed(k.to_vec(), pool)
        } else {
            KeyProfile::new(k.to_vec(), pool)
        };
        ModelParams::new(
            n,
            ClassDistribution::new(vec![0.5, 0.5]).unwrap(),
            keys.unwrap(),
            ChannelMatrix::constant(2, alpha).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn complete_graph_every_trial() {
        let s = run_trials(&params([6, 6], 10, 1.0, 30, true), 20, 1, 2).unwrap();
        assert_eq!(s.connected_successes, 20);
        assert_eq!(s.no_isolated_successes, 20);
        assert_eq!(s.mean_edge_count, 435.0);
    }

    #[test]
    fn empty_graph_every_trial() {
        let s = run_trials(&params([10, 15], 1000, 0.0, 40, false), 25, 1, 1).unwrap();
        assert_eq!(s.no_isolated_successes, 0);
        assert_eq!(s.connected_successes, 0);
        assert_eq!(s.mean_isolated, 40.0);
        assert_eq!(s.isolated_std, 0.0);
    }

    #[test]
    fn rejects_zero_trials_and_workers() {
        let p = params([10, 15], 1000, 0.5, 40, false);
        assert!(run_trials(&p, 0, 1, 1).is_err());
        assert!(run_trials(&p, 5, 1, 0).is_err());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let p = params([8, 12], 1000, 0.5, 80, false);
        let one = run_trials(&p, 40, 99, 1).unwrap();
        let four = run_trials(&p, 40, 99, 4).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn single_value_sweep_matches_run_trials() {
        let base = params([8, 12], 1000, 0.5, 80, false);
        let spec = ExperimentSpec::new(
            base.clone(),
            SweepAxis::ChannelEntry { i: 0, j: 1 },
            vec![0.5],
            30,
            7,
        )
        .unwrap();
        let report = run_sweep(&spec, 2).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].summary, run_trials(&base, 30, 7, 1).unwrap());
        assert_eq!(report.axis_name, "alpha_12");
    }

    #[test]
    fn sweep_rejects_invalid_value() {
        let base = params([8, 12], 100, 0.5, 80, false);
        let rule = ProfileRule::uniform_step(2, 5);
        let err = ExperimentSpec::new(base, SweepAxis::RingSize(rule), vec![10.0, 46.0], 5, 1)
            .unwrap_err();
        match err {
            Error::SweepValue { value, .. } => assert_eq!(value, 46.0),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn ring_size_rule() {
        let base = KeyProfile::new(vec![5, 9, 30], 1000).unwrap();
        let rule = ProfileRule {
            offsets: vec![None, Some(5), None],
        };
        assert_eq!(rule.apply(12, &base).unwrap().ring_sizes(), &[12, 17, 30]);
        assert!(rule.apply(26, &base).is_err());
        assert!(ring_size_value(2.5).is_err());
        assert!(ring_size_value(0.0).is_err());
    }

    #[test]
    fn threshold_marker_on_ring_size_sweep() {
        let base = params([10, 15], 10_000, 0.3, 500, false);
        let values: Vec<f64> = (10..=35).map(f64::from).collect();
        let spec = ExperimentSpec::new(
            base.clone(),
            SweepAxis::RingSize(ProfileRule::uniform_step(2, 5)),
            values,
            2,
            3,
        )
        .unwrap();
        let report = run_sweep(&spec, 1).unwrap();
        let marked: Vec<_> = report.rows.iter().filter(|r| r.is_predicted_threshold).collect();
        assert_eq!(marked.len(), 1);
        let t = marked[0].sweep_value;
        assert_eq!(Some(t), report.threshold);
        for row in &report.rows {
            let above = row.scaling_constant > 1.0;
            assert_eq!(above, row.sweep_value >= t, "K1 = {}", row.sweep_value);
        }
    }

    #[test]
    fn explicit_axis_uses_indices() {
        let a = params([8, 12], 1000, 0.5, 50, false);
        let b = params([8, 12], 1000, 0.9, 50, false);
        let spec =
            ExperimentSpec::new(a.clone(), SweepAxis::Explicit(vec![a, b.clone()]), vec![], 3, 1)
                .unwrap();
        assert_eq!(spec.values, vec![0.0, 1.0]);
        assert_eq!(spec.params_at(1.0).unwrap(), b);
        assert!(spec.params_at(2.0).is_err());
    }

    #[test]
    fn wilson_examples() {
        let (lo, _) = wilson_interval(0, 400, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        let (_, hi) = wilson_interval(400, 400, 0.95).unwrap();
        assert_eq!(hi, 1.0);
        let (lo, hi) = wilson_interval(200, 400, 0.95).unwrap();
        assert!((0.5 - lo - (hi - 0.5)).abs() <= 1e-12);
        assert!(lo < 0.5 && hi > 0.5);
        // Reference value: 1.959964 score interval for 30/100.
        let (lo, hi) = wilson_interval(30, 100, 0.95).unwrap();
        assert!((lo - 0.218_949_0).abs() < 1e-6, "{lo}");
        assert!((hi - 0.395_848_5).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn wilson_rejects_bad_input() {
        assert!(wilson_interval(5, 4, 0.95).is_err());
        assert!(wilson_interval(0, 0, 0.95).is_err());
        assert!(wilson_interval(1, 4, 1.0).is_err());
        assert!(wilson_interval(1, 4, 0.0).is_err());
    }

    #[test]
    fn wilson_contains_estimate() {
        for t in [1usize, 7, 400] {
            for s in 0..=t {
                let (lo, hi) = wilson_interval(s, t, 0.95).unwrap();
                let p = s as f64 / t as f64;
                assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
            }
        }
    }

    #[test]
    fn transition_interval_brackets_rise() {
        let mk = |v: f64, p: f64| SweepRow {
            sweep_value: v,
            params: params([8, 12], 1000, 0.5, 50, false),
            summary: run_trials(&params([8, 12], 1000, 0.0, 2, false), 1, 0, 1).unwrap(),
            p_no_isolated: p,
            p_no_isolated_ci: (0.0, 1.0),
            p_connected: p,
            p_connected_ci: (0.0, 1.0),
            analytic_expected_isolated: 0.0,
            analytic_expected_class_m_isolated: 0.0,
            scaling_constant: 1.0,
            is_predicted_threshold: false,
        };
        let report = SweepReport {
            axis_name: "K1".into(),
            rows: vec![mk(1.0, 0.0), mk(2.0, 0.05), mk(3.0, 0.5), mk(4.0, 0.97), mk(5.0, 1.0)],
            threshold: None,
        };
        assert_eq!(report.transition_interval(0.10, 0.95), Some((2.0, 4.0)));
    }
}
