//! Restricted isometry constants by support enumeration.

use itertools::Itertools;
use nalgebra::SymmetricEigen;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{IndexSet, SensingMatrix};
use crate::rng::{stream, stream_rng};

/// Largest number of supports `exact_ric` will enumerate by default.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RicMethod {
    Exact,
    LowerBoundSampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicEstimate {
    pub order: usize,
    pub delta: f64,
    pub method: RicMethod,
    pub supports_examined: u128,
    /// A support attaining `delta` (smallest in lexicographic order on ties).
    pub worst_support: IndexSet,
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c · (n − i) is divisible by (i + 1) at every step.
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// `max(λ_max − 1, 1 − λ_min)` of `Φ_Sᵗ Φ_S`.
pub fn support_delta(a: &SensingMatrix, support: &IndexSet) -> f64 {
    let eigen = SymmetricEigen::new(a.gram(support));
    let lo = eigen.eigenvalues.min();
    let hi = eigen.eigenvalues.max();
    (hi - 1.0).max(1.0 - lo).max(0.0)
}

fn check_order(a: &SensingMatrix, k: usize) -> Result<()> {
    if k == 0 || k > a.n() || k > a.m() {
        return Err(Error::InvalidParams(format!(
            "RIC order must satisfy 1 <= k <= min(m, n) = {}, got {k}",
            a.m().min(a.n())
        )));
    }
    Ok(())
}

/// Larger delta wins; equal deltas go to the lexicographically smaller support.
fn worse(x: (f64, IndexSet), y: (f64, IndexSet)) -> (f64, IndexSet) {
    if y.0 > x.0 || (y.0 == x.0 && y.1.as_slice() < x.1.as_slice()) {
        y
    } else {
        x
    }
}

fn enumerate_all(a: &SensingMatrix, k: usize) -> (f64, IndexSet) {
    (0..a.n())
        .combinations(k)
        .par_bridge()
        .map(|s| {
            let s = IndexSet::from_iter(s);
            (support_delta(a, &s), s)
        })
        .reduce(|| (f64::NEG_INFINITY, IndexSet::empty()), worse)
}

pub fn exact_ric(a: &SensingMatrix, k: usize) -> Result<RicEstimate> {
    exact_ric_with_budget(a, k, DEFAULT_ENUMERATION_BUDGET)
}

pub fn exact_ric_with_budget(a: &SensingMatrix, k: usize, budget: u128) -> Result<RicEstimate> {
    check_order(a, k)?;
    let supports = binomial(a.n(), k);
    if supports > budget {
        return Err(Error::BudgetExceeded { supports, budget });
    }
    let (delta, worst_support) = enumerate_all(a, k);
    Ok(RicEstimate {
        order: k,
        delta,
        method: RicMethod::Exact,
        supports_examined: supports,
        worst_support,
    })
}

/// Max per-support delta over `samples` seeded random `k`-subsets.
///
/// Samples are drawn sequentially from one stream, so the first `s` subsets
/// do not depend on `samples` and the bound is nondecreasing in `samples`.
/// When `samples ≥ C(n, k)` every subset is examined instead.
pub fn sampled_ric_lower_bound(
    a: &SensingMatrix,
    k: usize,
    samples: u64,
    seed: u64,
) -> Result<RicEstimate> {
    check_order(a, k)?;
    if samples == 0 {
        return Err(Error::InvalidParams("samples must be at least 1".into()));
    }
    let total = binomial(a.n(), k);
    if samples as u128 >= total {
        let (delta, worst_support) = enumerate_all(a, k);
        return Ok(RicEstimate {
            order: k,
            delta,
            method: RicMethod::LowerBoundSampled,
            supports_examined: total,
            worst_support,
        });
    }
    let mut rng = stream_rng(seed, stream::SAMPLED_SUPPORTS);
    let mut best = (f64::NEG_INFINITY, IndexSet::empty());
    for _ in 0..samples {
        let s: IndexSet = index::sample(&mut rng, a.n(), k).into_iter().collect();
        let d = support_delta(a, &s);
        best = worse(best, (d, s));
    }
    Ok(RicEstimate {
        order: k,
        delta: best.0,
        method: RicMethod::LowerBoundSampled,
        supports_examined: samples as u128,
        worst_support: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{generate, DictionaryKind, DictionarySpec};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn gaussian(m: usize, n: usize, seed: u64) -> SensingMatrix {
        generate(&DictionarySpec {
            m,
            n,
            kind: DictionaryKind::Gaussian,
            seed,
        })
        .unwrap()
    }

    fn pair(rho: f64) -> SensingMatrix {
        let s = (1.0 - rho * rho).sqrt();
        SensingMatrix::new(DMatrix::from_column_slice(2, 2, &[1.0, 0.0, rho, s])).unwrap()
    }

    /// Eigenvalues of a symmetric 3×3 matrix from the roots of its
    /// characteristic polynomial (trigonometric form of the cubic).
    fn cubic_eigenvalues(g: &DMatrix<f64>) -> [f64; 3] {
        let q = (g[(0, 0)] + g[(1, 1)] + g[(2, 2)]) / 3.0;
        let p1 = g[(0, 1)].powi(2) + g[(0, 2)].powi(2) + g[(1, 2)].powi(2);
        let p2 = (g[(0, 0)] - q).powi(2) + (g[(1, 1)] - q).powi(2) + (g[(2, 2)] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = (g - DMatrix::identity(3, 3) * q) / p;
        let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [e1, 3.0 * q - e1 - e3, e3]
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(14, 4), 1001);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(256, 78), u128::MAX);
    }

    #[test]
    fn orthonormal_columns_have_zero_ric() {
        let a = SensingMatrix::identity(6);
        for k in 1..=6 {
            let r = exact_ric(&a, k).unwrap();
            assert_eq!(r.delta, 0.0);
            assert_eq!(r.supports_examined, binomial(6, k));
            assert_eq!(r.method, RicMethod::Exact);
        }
    }

    #[test]
    fn correlated_pair() {
        let r = exact_ric(&pair(0.5), 2).unwrap();
        assert_abs_diff_eq!(r.delta, 0.5, epsilon = 1e-12);
        assert_eq!(r.worst_support, IndexSet::full(2));
    }

    #[test]
    fn matches_characteristic_polynomial_oracle() {
        let a = gaussian(6, 10, 17);
        let mut oracle = 0.0f64;
        for s in (0..10).combinations(3) {
            let sub = a.entries().select_columns(&s);
            let ev = cubic_eigenvalues(&sub.tr_mul(&sub));
            let hi = ev.iter().cloned().fold(f64::MIN, f64::max);
            let lo = ev.iter().cloned().fold(f64::MAX, f64::min);
            oracle = oracle.max((hi - 1.0).max(1.0 - lo));
        }
        assert_abs_diff_eq!(exact_ric(&a, 3).unwrap().delta, oracle, epsilon = 1e-10);
    }

    #[test]
    fn ric_is_monotone_in_order() {
        let a = gaussian(6, 10, 3);
        let deltas: Vec<f64> = (1..=6).map(|k| exact_ric(&a, k).unwrap().delta).collect();
        assert!(deltas[0] < 1e-12);
        for w in deltas.windows(2) {
            assert!(w[0] <= w[1] + 1e-12, "{deltas:?}");
        }
    }

    #[test]
    fn order_and_budget_errors() {
        let a = gaussian(4, 30, 1);
        assert!(matches!(exact_ric(&a, 0), Err(Error::InvalidParams(_))));
        assert!(matches!(exact_ric(&a, 5), Err(Error::InvalidParams(_))));
        assert!(matches!(
            exact_ric_with_budget(&a, 3, 100),
            Err(Error::BudgetExceeded { supports: 4060, budget: 100 })
        ));
        assert!(sampled_ric_lower_bound(&a, 2, 0, 0).is_err());
    }

    #[test]
    fn exhaustive_sampling_equals_exact() {
        let a = gaussian(6, 9, 5);
        let exact = exact_ric(&a, 3).unwrap();
        let sampled = sampled_ric_lower_bound(&a, 3, 84, 11).unwrap();
        assert_eq!(sampled.delta, exact.delta);
        assert_eq!(sampled.method, RicMethod::LowerBoundSampled);
    }

    #[test]
    fn single_sample_on_orthonormal_columns() {
        let r = sampled_ric_lower_bound(&SensingMatrix::identity(8), 3, 1, 0).unwrap();
        assert_eq!(r.delta, 0.0);
        assert_eq!(r.supports_examined, 1);
    }

    #[test]
    fn nested_samples_are_nondecreasing_and_below_exact() {
        let a = gaussian(8, 16, 9);
        let exact = exact_ric(&a, 4).unwrap().delta;
        let mut last = 0.0;
        for samples in [1, 2, 5, 10, 50, 200, 1000] {
            let d = sampled_ric_lower_bound(&a, 4, samples, 42).unwrap().delta;
            assert!(d >= last, "samples = {samples}");
            assert!(d <= exact);
            last = d;
        }
    }

    #[test]
    fn enumeration_is_deterministic() {
        let a = gaussian(5, 12, 2);
        assert_eq!(exact_ric(&a, 3).unwrap(), exact_ric(&a, 3).unwrap());
    }
}
