//! Exact (non-sampled) quantities of the intersection model.
//!
//! Everything here is a pure function of a [`ModelParams`]: key-sharing
//! probabilities between classes, mean edge probabilities, the minimizing
//! class, the scaling constant `c_n = n Λ_m / ln n`, first moments of the
//! isolated-node counts and the smallest ring size that clears the
//! `ln n / n` connectivity level.
//!
//! Class indices are 0-based throughout the API.

use std::ops::RangeInclusive;

use crate::error::{invalid, Result};

const SUM_TOLERANCE: f64 = 1e-12;
const CRITICAL_TOLERANCE: f64 = 1e-9;

/// Class probabilities `μ_1..μ_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    probs: Vec<f64>,
}

impl ClassDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("class distribution needs at least one class"));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(invalid(format!(
                "class probability mu[{}] = {p} must be strictly positive",
                i + 1
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid(format!(
                "class probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(r: usize) -> Result<Self> {
        Self::new(vec![1.0 / r as f64; r])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_classes(&self) -> usize {
        self.probs.len()
    }
}

/// Ring sizes `K_1 ≤ … ≤ K_r` and the pool size `P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyProfile {
    ring_sizes: Vec<u32>,
    pool_size: u32,
}

impl KeyProfile {
    /// Profile inside the scaling regime: `1 ≤ K_1 ≤ … ≤ K_r ≤ P/2`.
    pub fn new(ring_sizes: Vec<u32>, pool_size: u32) -> Result<Self> {
        let profile = Self::relaxed(ring_sizes, pool_size)?;
        let largest = *profile.ring_sizes.last().unwrap() as u64;
        if 2 * largest > pool_size as u64 {
            return Err(invalid(format!(
                "largest ring size {largest} exceeds half the pool size {pool_size}"
            )));
        }
        Ok(profile)
    }

    /// Same as [`KeyProfile::new`] but only requires `K_r ≤ P`.
    ///
    /// Rings may then be forced to overlap (`K_i + K_j > P`), which the
    /// scaling regime excludes. Useful for degenerate test configurations.
    pub fn relaxed(ring_sizes: Vec<u32>, pool_size: u32) -> Result<Self> {
        if ring_sizes.is_empty() {
            return Err(invalid("key profile needs at least one ring size"));
        }
        if pool_size == 0 {
            return Err(invalid("pool size must be positive"));
        }
        if ring_sizes[0] == 0 {
            return Err(invalid("ring sizes must be at least 1"));
        }
        if let Some(w) = ring_sizes.windows(2).position(|w| w[0] > w[1]) {
            return Err(invalid(format!(
                "ring sizes must be non-decreasing, got K{} = {} > K{} = {}",
                w + 1,
                ring_sizes[w],
                w + 2,
                ring_sizes[w + 1]
            )));
        }
        let largest = *ring_sizes.last().unwrap();
        if largest > pool_size {
            return Err(invalid(format!(
                "ring size {largest} exceeds the pool size {pool_size}"
            )));
        }
        Ok(Self {
            ring_sizes,
            pool_size,
        })
    }

    pub fn ring_sizes(&self) -> &[u32] {
        &self.ring_sizes
    }

    pub fn ring_size(&self, class: usize) -> u32 {
        self.ring_sizes[class]
    }

    pub fn pool_size(&self) -> u32 {
        self.pool_size
    }

    pub fn num_classes(&self) -> usize {
        self.ring_sizes.len()
    }
}

/// Symmetric channel-on probabilities `α_ij` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    alpha: Vec<Vec<f64>>,
}

impl ChannelMatrix {
    pub fn new(alpha: Vec<Vec<f64>>) -> Result<Self> {
        let r = alpha.len();
        if r == 0 {
            return Err(invalid("channel matrix needs at least one class"));
        }
        for (i, row) in alpha.iter().enumerate() {
            if row.len() != r {
                return Err(invalid(format!(
                    "channel matrix row {} has {} entries, expected {r}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &a) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&a) {
                    return Err(invalid(format!(
                        "alpha[{}][{}] = {a} is outside [0, 1]",
                        i + 1,
                        j + 1
                    )));
                }
                if a != alpha[j][i] {
                    return Err(invalid(format!(
                        "channel matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { alpha })
    }

    /// Every entry equal to `value`.
    pub fn constant(r: usize, value: f64) -> Result<Self> {
        Self::new(vec![vec![value; r]; r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.alpha[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.alpha
    }

    pub fn num_classes(&self) -> usize {
        self.alpha.len()
    }

    /// Copy with `α_ij = α_ji = value`.
    pub fn with_entry(&self, i: usize, j: usize, value: f64) -> Result<Self> {
        let r = self.num_classes();
        if i >= r || j >= r {
            return Err(invalid(format!(
                "channel entry ({}, {}) is outside a {r}x{r} matrix",
                i + 1,
                j + 1
            )));
        }
        let mut alpha = self.alpha.clone();
        alpha[i][j] = value;
        alpha[j][i] = value;
        Self::new(alpha)
    }

    /// Copy with every diagonal entry set to `value`.
    pub fn with_diagonal(&self, value: f64) -> Result<Self> {
        let mut alpha = self.alpha.clone();
        for (i, row) in alpha.iter_mut().enumerate() {
            row[i] = value;
        }
        Self::new(alpha)
    }
}

/// Full configuration: node count plus `(μ, K, P, α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    n: usize,
    dist: ClassDistribution,
    keys: KeyProfile,
    channel: ChannelMatrix,
}

impl ModelParams {
    pub fn new(
        n: usize,
        dist: ClassDistribution,
        keys: KeyProfile,
        channel: ChannelMatrix,
    ) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("node count must be at least 2, got {n}")));
        }
        let r = dist.num_classes();
        if keys.num_classes() != r || channel.num_classes() != r {
            return Err(invalid(format!(
                "class count mismatch: {r} class probabilities, {} ring sizes, {}x{} channel matrix",
                keys.num_classes(),
                channel.num_classes(),
                channel.num_classes()
            )));
        }
        Ok(Self {
            n,
            dist,
            keys,
            channel,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_classes(&self) -> usize {
        self.dist.num_classes()
    }

    pub fn dist(&self) -> &ClassDistribution {
        &self.dist
    }

    pub fn keys(&self) -> &KeyProfile {
        &self.keys
    }

    pub fn channel(&self) -> &ChannelMatrix {
        &self.channel
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.dist.clone(), self.keys.clone(), self.channel.clone())
    }

    pub fn with_keys(&self, keys: KeyProfile) -> Result<Self> {
        Self::new(self.n, self.dist.clone(), keys, self.channel.clone())
    }

    pub fn with_channel(&self, channel: ChannelMatrix) -> Result<Self> {
        Self::new(self.n, self.dist.clone(), self.keys.clone(), channel)
    }
}

/// Probability that rings of sizes `ki` and `kj`, drawn uniformly without
/// replacement from a pool of `pool` keys, share at least one key.
///
/// Evaluates `1 - C(P-Ki, Kj) / C(P, Kj)` as the product of the `min(Ki, Kj)`
/// factors `1 - max(Ki, Kj) / (P - l)`, accumulated through `ln_1p` and
/// closed with `exp_m1` so that small probabilities keep full relative
/// precision.
pub fn pairwise_key_prob(ki: u32, kj: u32, pool: u32) -> Result<f64> {
    if ki == 0 || kj == 0 {
        return Err(invalid(format!(
            "ring sizes must be positive, got ({ki}, {kj})"
        )));
    }
    if ki > pool || kj > pool {
        return Err(invalid(format!(
            "ring sizes ({ki}, {kj}) exceed the pool size {pool}"
        )));
    }
    if ki as u64 + kj as u64 > pool as u64 {
        return Ok(1.0);
    }
    let (small, large) = if ki <= kj { (ki, kj) } else { (kj, ki) };
    let large = large as f64;
    let pool = pool as f64;
    let log_disjoint: f64 = (0..small)
        .map(|l| (-large / (pool - l as f64)).ln_1p())
        .sum();
    Ok(-log_disjoint.exp_m1())
}

/// Everything `derive` computes from a [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedQuantities {
    /// `p_ij`, probability that a class-i and a class-j ring intersect.
    pub key_share: Vec<Vec<f64>>,
    /// `λ_i = Σ_j μ_j p_ij`.
    pub mean_key_edge: Vec<f64>,
    /// `Λ_i = Σ_j μ_j α_ij p_ij`.
    pub mean_edge: Vec<f64>,
    /// `m`, argmin of `Λ`.
    pub min_class: usize,
    /// `d`, argmax over `j` of `α_mj`.
    pub strongest_channel_class: usize,
    /// `s`, argmax over `j` of `α_mj p_mj`. Diagnostic only.
    pub strongest_link_class: usize,
    /// `c_n = n Λ_m / ln n`.
    pub scaling_constant: f64,
    /// `α_md ln n`.
    pub alpha_md_log_n: f64,
    /// `α_mm ln n`.
    pub alpha_mm_log_n: f64,
}

impl DerivedQuantities {
    pub fn min_mean_edge(&self) -> f64 {
        self.mean_edge[self.min_class]
    }
}

// First index wins on ties.
fn argmin(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

pub fn key_share_matrix(keys: &KeyProfile) -> Vec<Vec<f64>> {
    let sizes = keys.ring_sizes();
    sizes
        .iter()
        .map(|&ki| {
            sizes
                .iter()
                .map(|&kj| {
                    pairwise_key_prob(ki, kj, keys.pool_size())
                        .expect("validated key profile yields valid ring sizes")
                })
                .collect()
        })
        .collect()
}

pub fn derive(params: &ModelParams) -> DerivedQuantities {
    let r = params.num_classes();
    let mu = params.dist().probs();
    let alpha = params.channel();
    let key_share = key_share_matrix(params.keys());

    let mean_key_edge: Vec<f64> = (0..r)
        .map(|i| (0..r).map(|j| mu[j] * key_share[i][j]).sum())
        .collect();
    let mean_edge: Vec<f64> = (0..r)
        .map(|i| (0..r).map(|j| mu[j] * alpha.get(i, j) * key_share[i][j]).sum())
        .collect();

    let m = argmin(mean_edge.iter().copied());
    let d = argmax((0..r).map(|j| alpha.get(m, j)));
    let s = argmax((0..r).map(|j| alpha.get(m, j) * key_share[m][j]));

    let n = params.n() as f64;
    let log_n = n.ln();
    DerivedQuantities {
        scaling_constant: n * mean_edge[m] / log_n,
        alpha_md_log_n: alpha.get(m, d) * log_n,
        alpha_mm_log_n: alpha.get(m, m) * log_n,
        key_share,
        mean_key_edge,
        mean_edge,
        min_class: m,
        strongest_channel_class: d,
        strongest_link_class: s,
    }
}

/// `(1 - x)^k` for `x ∈ [0, 1]`.
fn survival_pow(x: f64, k: usize) -> f64 {
    ((k as f64) * (-x).ln_1p()).exp()
}

/// First moment of the isolated-node count: `n Σ_i μ_i (1 - Λ_i)^(n-1)`.
pub fn expected_isolated(params: &ModelParams) -> f64 {
    expected_isolated_from(params, &derive(params))
}

pub fn expected_isolated_from(params: &ModelParams, derived: &DerivedQuantities) -> f64 {
    let n = params.n();
    let sum: f64 = params
        .dist()
        .probs()
        .iter()
        .zip(&derived.mean_edge)
        .map(|(mu, lambda)| mu * survival_pow(*lambda, n - 1))
        .sum();
    n as f64 * sum
}

/// First moment of the number of isolated class-m nodes: `n μ_m (1 - Λ_m)^(n-1)`.
pub fn expected_class_m_isolated(params: &ModelParams) -> f64 {
    expected_class_m_isolated_from(params, &derive(params))
}

pub fn expected_class_m_isolated_from(params: &ModelParams, derived: &DerivedQuantities) -> f64 {
    let n = params.n();
    let m = derived.min_class;
    n as f64 * params.dist().probs()[m] * survival_pow(derived.mean_edge[m], n - 1)
}

/// The level `ln n / n` that `Λ_m` has to exceed.
pub fn connectivity_level(n: usize) -> f64 {
    let n = n as f64;
    n.ln() / n
}

/// Smallest `K_1` in `search_range` whose induced configuration has
/// `Λ_m > ln n / n`, or `None` when no candidate qualifies.
///
/// Every candidate profile is validated before the scan, so a family that
/// leaves the valid region anywhere in the range is rejected.
pub fn critical_threshold<F>(
    n: usize,
    dist: &ClassDistribution,
    channel: &ChannelMatrix,
    pool_size: u32,
    profile_family: F,
    search_range: RangeInclusive<u32>,
) -> Result<Option<u32>>
where
    F: Fn(u32) -> Result<KeyProfile>,
{
    let mut candidates = Vec::new();
    for k1 in search_range {
        let profile = profile_family(k1)
            .map_err(|e| invalid(format!("profile for K1 = {k1}: {e}")))?;
        if profile.pool_size() != pool_size {
            return Err(invalid(format!(
                "profile for K1 = {k1} uses pool size {}, expected {pool_size}",
                profile.pool_size()
            )));
        }
        let params = ModelParams::new(n, dist.clone(), profile, channel.clone())?;
        candidates.push((k1, params));
    }
    let level = connectivity_level(n);
    Ok(candidates
        .into_iter()
        .find(|(_, params)| derive(params).min_mean_edge() > level)
        .map(|(k1, _)| k1))
}

/// Asymptotic outcome for the absence of isolated nodes given `lim c_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prediction {
    /// Isolated nodes exist whp (`c < 1`).
    ZeroLaw,
    /// No isolated nodes whp (`c > 1`).
    OneLaw,
    /// `c = 1`; no claim.
    Critical,
}

impl std::fmt::Display for Prediction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Prediction::ZeroLaw => "zero-law",
            Prediction::OneLaw => "one-law",
            Prediction::Critical => "critical",
        })
    }
}

/// Prediction from `c` alone. The side conditions on `α_md ln n` and
/// `α_mm ln n` for the zero-law are left to the caller.
pub fn theorem_prediction(c: f64) -> Result<Prediction> {
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid(format!("scaling constant must be positive, got {c}")));
    }
    Ok(if (c - 1.0).abs() <= CRITICAL_TOLERANCE {
        Prediction::Critical
    } else if c > 1.0 {
        Prediction::OneLaw
    } else {
        Prediction::ZeroLaw
    })
}
