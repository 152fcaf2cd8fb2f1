//! Per-iteration quantities from the m²OLS success argument.
//!
//! At iteration `k` with residual `r = P⊥_{T^k} y`:
//!
//! | quantity | definition |
//! |----------|------------|
//! | `β₁`     | `max_{i∈T} ⟨φ_i, r⟩²` |
//! | `W`      | the `N` indices of `H∖T` with the largest `|⟨φ_i, r⟩|` |
//! | `α_N`    | `min_{i∈W} ⟨φ_i, r⟩²` |
//! | `S`      | next preselection: top `N` of `|⟨φ_i, r⟩|` outside `T^k` |
//! | `u₁`     | `max_{i∈S∩T} |⟨φ_i, r⟩| / ‖P⊥_{T^k} φ_i‖` |
//! | `V`      | the `L` indices of `S∖T` with the largest ratio |
//! | `v_L`    | `min_{i∈V}` of the same ratio |
//! | `x′`     | `(x_{T∖T^k}, −u_{T^k})` with `r = Φ_{T∪T^k} x′` |
//!
//! In the noiseless model `r = Φ_{T∖T^k} x_{T∖T^k} − Φ_{T^k} u_{T^k}` where
//! `u_{T^k} = Φ_{T^k}† Φ_{T∖T^k} x_{T∖T^k}`; `representation_error` reports
//! how far `r` is from that form (zero up to rounding when `e = 0`).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::{preselect, IterationTrace, RecoveryResult};
use crate::linalg::{least_squares_on_support, ColumnQr, IndexSet, SensingMatrix};
use crate::signals::SparseSignal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofDiagnostics {
    pub k: usize,
    pub alpha_n: f64,
    pub beta_1: f64,
    /// `None` when `S ∩ T` has no admissible index.
    pub u_1: Option<f64>,
    /// `None` when `S ∖ T` has no admissible index.
    pub v_l: Option<f64>,
    pub c_k: usize,
    pub m_k: usize,
    pub x_prime_norm: f64,
    pub representation_error: f64,
    pub w: IndexSet,
    pub next_preselected: IndexSet,
    pub v_set: IndexSet,
    /// `LK + N`, the order in the stated theorem.
    pub theorem_order: usize,
    /// `LK + N − 1`, the order used by some intermediate steps.
    pub intermediate_order: usize,
}

impl ProofDiagnostics {
    /// Upper bound on `α_N`: `δ² ‖x′‖² / N`.
    pub fn alpha_bound(&self, delta: f64, big_n: usize) -> f64 {
        delta * delta * self.x_prime_norm.powi(2) / big_n as f64
    }

    /// Lower bound on `β₁`: `(1 − δ)² ‖x′‖² / K`.
    pub fn beta_bound(&self, delta: f64, k: usize) -> f64 {
        (1.0 - delta).powi(2) * self.x_prime_norm.powi(2) / k as f64
    }
}

fn top_ranked(mut scored: Vec<(usize, f64)>, count: usize) -> Vec<(usize, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(count);
    scored
}

/// Proof quantities at one iteration. `trace` supplies `k`, `T^k` and `S^k`;
/// `r` must be `P⊥_{T^k} y`.
pub fn iteration_diagnostics(
    a: &SensingMatrix,
    x: Option<&SparseSignal>,
    trace: &IterationTrace,
    r: &DVector<f64>,
    big_n: usize,
    l: usize,
) -> Result<ProofDiagnostics> {
    let x = x.ok_or(Error::GroundTruthRequired)?;
    if x.n() != a.n() {
        return Err(Error::DimensionMismatch(format!(
            "signal has dimension {} but the matrix has {} columns",
            x.n(),
            a.n()
        )));
    }
    if big_n == 0 || l == 0 || l > big_n {
        return Err(Error::InvalidParams(format!(
            "need 1 <= L <= N, got N = {big_n}, L = {l}"
        )));
    }
    let t = x.support();
    let tk = &trace.support;
    tk.check_bounds(a.n())?;
    let corr = a.correlations(r)?;

    let beta_1 = t.iter().map(|i| corr[i] * corr[i]).fold(0.0, f64::max);

    let outside: Vec<(usize, f64)> = t.complement(a.n()).iter().map(|i| (i, corr[i].abs())).collect();
    let w_ranked = top_ranked(outside, big_n);
    let alpha_n = w_ranked.iter().map(|&(_, c)| c * c).fold(f64::INFINITY, f64::min);
    let alpha_n = if w_ranked.is_empty() { 0.0 } else { alpha_n };
    let w: IndexSet = w_ranked.iter().map(|&(i, _)| i).collect();

    let remaining = a.n() - tk.len();
    let next_preselected = if remaining == 0 {
        IndexSet::empty()
    } else {
        preselect(a, r, tk, big_n.min(remaining))?
    };

    let qr = ColumnQr::for_support(a, tk)?;
    let ratio = |i: usize| {
        let pn = qr.projected_norm(a, i);
        (pn > qr.tolerance()).then(|| corr[i].abs() / pn)
    };
    let u_1 = next_preselected
        .intersection(t)
        .iter()
        .filter_map(ratio)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let wrong: Vec<(usize, f64)> = next_preselected
        .difference(t)
        .iter()
        .filter_map(|i| ratio(i).map(|v| (i, v)))
        .collect();
    let v_ranked = top_ranked(wrong, l);
    let v_l = v_ranked.iter().map(|&(_, v)| v).reduce(f64::min);
    let v_set: IndexSet = v_ranked.iter().map(|&(i, _)| i).collect();

    let missed = t.difference(tk);
    let missed_values = x.restricted(&missed);
    let phi_missed = a.apply_on_support(&missed, &missed_values)?;
    let u = least_squares_on_support(a, &(&phi_missed - r), tk)?;
    let x_prime_norm = (missed_values.iter().map(|v| v * v).sum::<f64>()
        + u.iter().map(|v| v * v).sum::<f64>())
    .sqrt();
    let representation_error = (&phi_missed - a.apply_on_support(tk, &u)? - r).norm();

    let big_k = x.k();
    Ok(ProofDiagnostics {
        k: trace.k,
        alpha_n,
        beta_1,
        u_1,
        v_l,
        c_k: t.intersection(tk).len(),
        m_k: t.intersection(&trace.preselected).len(),
        x_prime_norm,
        representation_error,
        w,
        next_preselected,
        v_set,
        theorem_order: l * big_k + big_n,
        intermediate_order: l * big_k + big_n - 1,
    })
}

/// Diagnostics at `k = 0` and after every recorded iteration of `result`.
/// Residuals are recomputed as `P⊥_{T^k} y`.
pub fn diagnose_run(
    a: &SensingMatrix,
    x: Option<&SparseSignal>,
    y: &DVector<f64>,
    result: &RecoveryResult,
) -> Result<Vec<ProofDiagnostics>> {
    let alg = result.config.algorithm;
    let big_n = alg.big_n().unwrap_or(a.n());
    let l = alg.l().unwrap_or(big_n).min(big_n);
    let mut traces = vec![IterationTrace::initial(y.norm())];
    traces.extend(result.iterations.iter().cloned());
    traces
        .iter()
        .map(|trace| {
            let qr = ColumnQr::for_support(a, &trace.support)?;
            let r = qr.project_out(y);
            iteration_diagnostics(a, x, trace, &r, big_n, l)
        })
        .collect()
}

/// First-iteration energy comparisons. Each slack is `lhs − rhs` and is
/// nonnegative when the inequality holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstIterationBounds {
    /// `‖Φ_{S¹}ᵗy‖/√N − ‖Φ_Tᵗy‖/√K` when `N ≤ K`, else `‖Φ_{S¹}ᵗy‖ − ‖Φ_Tᵗy‖`.
    pub preselection_slack: f64,
    /// `‖Φ_{T¹}ᵗy‖/√L − ‖Φ_Tᵗy‖/√K`.
    pub identification_slack: f64,
}

/// Compares the first preselection `S¹` and identification `T¹` (each given
/// by the caller, typically from a run's first trace) against the true support.
pub fn first_iteration_bounds(
    a: &SensingMatrix,
    y: &DVector<f64>,
    truth: &IndexSet,
    s1: &IndexSet,
    t1: &IndexSet,
) -> Result<FirstIterationBounds> {
    let corr = a.correlations(y)?;
    let energy = |s: &IndexSet| s.iter().map(|i| corr[i] * corr[i]).sum::<f64>().sqrt();
    let (k, big_n, l) = (truth.len() as f64, s1.len() as f64, t1.len() as f64);
    if truth.is_empty() || s1.is_empty() || t1.is_empty() {
        return Err(Error::InvalidParams("first-iteration sets must be nonempty".into()));
    }
    let on_truth = energy(truth);
    let preselection_slack = if big_n <= k {
        energy(s1) / big_n.sqrt() - on_truth / k.sqrt()
    } else {
        energy(s1) - on_truth
    };
    Ok(FirstIterationBounds {
        preselection_slack,
        identification_slack: energy(t1) / l.sqrt() - on_truth / k.sqrt(),
    })
}
