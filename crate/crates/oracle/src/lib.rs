//! Slow, independent reference checkers for `keygraph-core`.
//!
//! Nothing here is on a hot path. Key-sharing probabilities are evaluated as
//! exact big rationals, connectivity by a plain depth-first search, and edge
//! probabilities by brute-force sampling of two-node graphs.

use keygraph_core::graphgen::{generate, generate_with_classes, ClassAssignment, IntersectionGraph, RngStream};
use keygraph_core::model::ModelParams;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Exact rational in canonical form (reduced, positive denominator).
pub type ExactRational = BigRational;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("comparison is within rounding error and cannot be decided")]
    Indeterminate,
}

fn check_sizes(ki: u64, kj: u64, pool: u64) -> Result<(), OracleError> {
    if ki == 0 || kj == 0 || ki > pool || kj > pool {
        return Err(OracleError::InvalidParameter(format!(
            "ring sizes ({ki}, {kj}) must lie in 1..={pool}"
        )));
    }
    Ok(())
}

/// `C(P - excluded, K) / C(P, K)` as `∏_{l<K} (P - excluded - l) / (P - l)`.
fn disjoint_ratio(excluded: u64, k: u64, pool: u64) -> ExactRational {
    if excluded + k > pool {
        return ExactRational::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for l in 0..k {
        num *= pool - excluded - l;
        den *= pool - l;
    }
    ExactRational::new(num, den)
}

/// `1 - C(P - Ki, Kj) / C(P, Kj)`, exactly.
pub fn exact_key_prob(ki: u64, kj: u64, pool: u64) -> Result<ExactRational, OracleError> {
    check_sizes(ki, kj, pool)?;
    Ok(ExactRational::one() - disjoint_ratio(ki, kj, pool))
}

fn ln_disjoint(excluded: u64, k: u64, pool: u64) -> f64 {
    (0..k)
        .map(|l| (-(excluded as f64) / (pool - l) as f64).ln_1p())
        .sum()
}

/// Checks `C(P - ⌈a Ki⌉, Kj) / C(P, Kj) ≤ (C(P - Ki, Kj) / C(P, Kj))^a`.
///
/// Integral `a` is compared exactly with rational powers. Other values are
/// compared in the log domain against an explicit rounding bound, and
/// [`OracleError::Indeterminate`] is returned when the gap is inside it.
pub fn combinatorial_bound_check(ki: u64, kj: u64, pool: u64, a: f64) -> Result<bool, OracleError> {
    if !(a.is_finite() && a >= 1.0) {
        return Err(OracleError::InvalidParameter(format!("exponent a = {a} must be >= 1")));
    }
    check_sizes(ki, kj, pool)?;
    let scaled = (a * ki as f64).ceil() as u64;
    if scaled + kj > pool {
        return Err(OracleError::InvalidParameter(format!(
            "ceil(a Ki) + Kj = {} exceeds the pool size {pool}",
            scaled + kj
        )));
    }

    if a.fract() == 0.0 && a <= 64.0 {
        let lhs = disjoint_ratio(scaled, kj, pool);
        let rhs = num_traits::pow(disjoint_ratio(ki, kj, pool), a as usize);
        return Ok(lhs <= rhs);
    }

    let lhs = ln_disjoint(scaled, kj, pool);
    let rhs = a * ln_disjoint(ki, kj, pool);
    let slack = 8.0 * (kj as f64 + 2.0) * f64::EPSILON * (lhs.abs() + rhs.abs());
    let gap = rhs - lhs;
    if gap > slack {
        Ok(true)
    } else if gap < -slack {
        Ok(false)
    } else {
        Err(OracleError::Indeterminate)
    }
}

/// Connected-component census by iterative depth-first search.
pub fn dfs_connectivity(g: &IntersectionGraph) -> (bool, usize) {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    (components == 1, components)
}

/// Adjacency tallies per unordered class pair `(i, j)`, `i ≤ j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairTallies {
    pub adjacent: Vec<Vec<u64>>,
    pub samples: Vec<Vec<u64>>,
}

impl PairTallies {
    pub fn frequency(&self, i: usize, j: usize) -> Option<f64> {
        let (i, j) = (i.min(j), i.max(j));
        let s = self.samples[i][j];
        (s > 0).then(|| self.adjacent[i][j] as f64 / s as f64)
    }
}

fn require_two_nodes(params: &ModelParams) -> Result<(), OracleError> {
    if params.n() != 2 {
        return Err(OracleError::InvalidParameter(format!(
            "two-node model required, got n = {}",
            params.n()
        )));
    }
    Ok(())
}

/// Samples the two-node graph `samples` times from one stream and tallies
/// adjacency by the drawn class pair.
pub fn exhaustive_edge_distribution(
    params: &ModelParams,
    samples: u64,
    seed: u64,
) -> Result<PairTallies, OracleError> {
    require_two_nodes(params)?;
    let r = params.num_classes();
    let mut tallies = PairTallies {
        adjacent: vec![vec![0; r]; r],
        samples: vec![vec![0; r]; r],
    };
    let mut rng = RngStream::new(seed, 0);
    for _ in 0..samples {
        let g = generate(params, &mut rng);
        let (a, b) = (g.classes().class_of(0), g.classes().class_of(1));
        let (i, j) = (a.min(b), a.max(b));
        tallies.samples[i][j] += 1;
        tallies.adjacent[i][j] += g.edge_count() as u64;
    }
    Ok(tallies)
}

/// Number of adjacent pairs among `samples` fresh (class `i`, class `j`)
/// two-node graphs.
pub fn conditional_edge_count(
    params: &ModelParams,
    i: usize,
    j: usize,
    samples: u64,
    seed: u64,
) -> Result<u64, OracleError> {
    require_two_nodes(params)?;
    let classes = ClassAssignment::new(vec![i, j], params.num_classes())
        .map_err(|e| OracleError::InvalidParameter(e.to_string()))?;
    let mut rng = RngStream::new(seed, 0);
    let mut hits = 0;
    for _ in 0..samples {
        let g = generate_with_classes(params, classes.clone(), &mut rng)
            .map_err(|e| OracleError::InvalidParameter(e.to_string()))?;
        hits += g.edge_count() as u64;
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn exact_examples() {
        assert_eq!(exact_key_prob(1, 1, 2).unwrap(), ExactRational::new(1.into(), 2.into()));
        assert_eq!(exact_key_prob(6, 6, 10).unwrap(), ExactRational::one());
        assert_eq!(exact_key_prob(10, 3, 10).unwrap(), ExactRational::one());
        let v1 = exact_key_prob(20, 25, 10_000).unwrap();
        assert_eq!(v1.to_f64().unwrap(), 0.048_875_476_511_338_146);
        assert!(exact_key_prob(0, 1, 5).is_err());
        assert!(exact_key_prob(6, 1, 5).is_err());
    }

    #[test]
    fn exact_is_canonical() {
        let v = exact_key_prob(2, 2, 4).unwrap();
        // 1 - (2·1)/(4·3) = 5/6
        assert_eq!(v.numer(), &BigInt::from(5));
        assert_eq!(v.denom(), &BigInt::from(6));
    }

    #[test]
    fn bound_examples() {
        assert!(combinatorial_bound_check(5, 5, 100, 1.0).unwrap());
        assert!(combinatorial_bound_check(5, 5, 100, 2.0).unwrap());
        assert!(combinatorial_bound_check(5, 5, 100, 1.7).unwrap());
        assert!(combinatorial_bound_check(30, 50, 100, 2.0).is_err());
        assert!(combinatorial_bound_check(5, 5, 100, 0.5).is_err());
    }

    #[test]
    fn bound_is_tight_at_one() {
        let lhs = disjoint_ratio(7, 9, 300);
        let rhs = num_traits::pow(disjoint_ratio(7, 9, 300), 1);
        assert_eq!(lhs, rhs);
    }
}
