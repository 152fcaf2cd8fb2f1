//! Numerical checks of the RIP lemmas used by the recovery argument.
//!
//! With `δ_s` the exact RIC of order `s`:
//!
//! * monotonicity: `δ_{k1} ≤ δ_{k2}` for `k1 ≤ k2`;
//! * cross-correlation: for disjoint `S1, S2` and `x` supported on `S2`,
//!   `‖Φ_{S1}ᵗ Φ x‖ ≤ δ_{|S1|+|S2|} ‖x‖`;
//! * projected sandwich: for disjoint `I1, I2`, `u` supported on `I2` and
//!   `A u = P⊥_{I1} Φ u`, with `δ = δ_{|I1|+|I2|}`,
//!   `(1 − (δ/(1−δ))²)‖Φu‖² ≤ ‖Au‖² ≤ (1+δ)‖Φu‖²` and
//!   `(1 − δ/(1−δ))‖u‖² ≤ ‖Au‖² ≤ (1+δ)‖u‖²`.
//!
//! The sandwich needs `δ < 1`; orders with `δ ≥ 1` are skipped for it.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analysis::ric::{exact_ric, RicEstimate};
use crate::error::{Error, Result};
use crate::linalg::{orthogonal_complement_apply, IndexSet, SensingMatrix};
use crate::rng::{stream, stream_rng};

/// Relative allowance for rounding in every comparison.
pub const LEMMA_TOLERANCE: f64 = 1e-10;

/// Default highest RIC order used by [`check_lemma_bounds`].
pub const DEFAULT_MAX_ORDER: usize = 4;

/// Random vectors drawn per trial for the sandwich bounds.
const VECTORS_PER_TRIAL: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTally {
    pub checks: usize,
    pub violations: usize,
    /// Smallest `rhs − lhs` seen, normalized by the scale of the compared terms.
    pub worst_slack: f64,
}

impl Default for BoundTally {
    fn default() -> Self {
        BoundTally {
            checks: 0,
            violations: 0,
            worst_slack: f64::INFINITY,
        }
    }
}

impl BoundTally {
    /// Record `lhs ≤ rhs`.
    fn record(&mut self, lhs: f64, rhs: f64) {
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        let slack = (rhs - lhs) / scale;
        self.checks += 1;
        if slack < -LEMMA_TOLERANCE {
            self.violations += 1;
        }
        self.worst_slack = self.worst_slack.min(slack);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub max_order: usize,
    pub trials: usize,
    pub seed: u64,
    pub ric: Vec<RicEstimate>,
    pub monotonicity: BoundTally,
    pub cross_correlation: BoundTally,
    pub sandwich_measurement: BoundTally,
    pub sandwich_coefficient: BoundTally,
    pub sandwich_skipped: usize,
}

impl LemmaReport {
    pub fn total_checks(&self) -> usize {
        self.tallies().iter().map(|t| t.checks).sum()
    }

    pub fn total_violations(&self) -> usize {
        self.tallies().iter().map(|t| t.violations).sum()
    }

    pub fn worst_slack(&self) -> f64 {
        self.tallies().iter().map(|t| t.worst_slack).fold(f64::INFINITY, f64::min)
    }

    fn tallies(&self) -> [BoundTally; 4] {
        [
            self.monotonicity,
            self.cross_correlation,
            self.sandwich_measurement,
            self.sandwich_coefficient,
        ]
    }
}

pub fn check_lemma_bounds(a: &SensingMatrix, trials: usize, seed: u64) -> Result<LemmaReport> {
    let max_order = DEFAULT_MAX_ORDER.min(a.m()).min(a.n());
    check_lemma_bounds_up_to(a, max_order, trials, seed)
}

/// Lemma checks with exact RICs of orders `1..=max_order`. Each trial draws
/// disjoint `S1, S2` with `|S1| + |S2| ≤ max_order` and Gaussian coefficients.
pub fn check_lemma_bounds_up_to(
    a: &SensingMatrix,
    max_order: usize,
    trials: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if max_order < 2 || max_order > a.n() || max_order > a.m() {
        return Err(Error::InvalidParams(format!(
            "lemma checks need 2 <= max_order <= min(m, n) = {}, got {max_order}",
            a.m().min(a.n())
        )));
    }
    let ric = (1..=max_order)
        .map(|k| exact_ric(a, k))
        .collect::<Result<Vec<_>>>()?;
    let delta = |s: usize| ric[s - 1].delta;

    let mut monotonicity = BoundTally::default();
    for k1 in 1..=max_order {
        for k2 in k1..=max_order {
            monotonicity.record(delta(k1), delta(k2));
        }
    }

    let mut rng = stream_rng(seed, stream::AUXILIARY);
    let mut cross_correlation = BoundTally::default();
    let mut sandwich_measurement = BoundTally::default();
    let mut sandwich_coefficient = BoundTally::default();
    let mut sandwich_skipped = 0;
    for _ in 0..trials {
        let total = rng.random_range(2..=max_order);
        let s1_len = rng.random_range(1..total);
        let drawn = index::sample(&mut rng, a.n(), total).into_vec();
        let s1: IndexSet = drawn[..s1_len].iter().copied().collect();
        let s2: IndexSet = drawn[s1_len..].iter().copied().collect();
        let d = delta(total);

        for _ in 0..VECTORS_PER_TRIAL {
            let values: Vec<f64> = (0..s2.len()).map(|_| rng.sample(StandardNormal)).collect();
            let x_norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            let phi_x = a.apply_on_support(&s2, &values)?;

            let cross: f64 = s1.iter().map(|i| a.column(i).dot(&phi_x).powi(2)).sum::<f64>().sqrt();
            cross_correlation.record(cross, d * x_norm);

            if d >= 1.0 {
                sandwich_skipped += 1;
                continue;
            }
            let projected = orthogonal_complement_apply(a, &s1, &phi_x)?.norm_squared();
            let phi_sq = phi_x.norm_squared();
            let u_sq = x_norm * x_norm;
            let ratio = d / (1.0 - d);
            sandwich_measurement.record((1.0 - ratio * ratio) * phi_sq, projected);
            sandwich_measurement.record(projected, (1.0 + d) * phi_sq);
            sandwich_coefficient.record((1.0 - ratio) * u_sq, projected);
            sandwich_coefficient.record(projected, (1.0 + d) * u_sq);
        }
    }

    Ok(LemmaReport {
        max_order,
        trials,
        seed,
        ric,
        monotonicity,
        cross_correlation,
        sandwich_measurement,
        sandwich_coefficient,
        sandwich_skipped,
    })
}
