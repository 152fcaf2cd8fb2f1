//! Closed-form recovery conditions for m²OLS.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryBound {
    /// Noiseless recovery is guaranteed when `δ_order < bound`.
    pub bound: f64,
    /// `LK + N`.
    pub order: usize,
}

fn check_kln(k: usize, big_n: usize, l: usize) -> Result<()> {
    if l == 0 || l > big_n || l > k {
        return Err(Error::InvalidParams(format!(
            "need 1 <= L <= N and L <= K, got K = {k}, N = {big_n}, L = {l}"
        )));
    }
    Ok(())
}

/// `√L / (√(K+L) + √L)` and the RIC order `LK + N` it constrains.
pub fn recovery_bound(k: usize, big_n: usize, l: usize) -> Result<RecoveryBound> {
    check_kln(k, big_n, l)?;
    let sl = (l as f64).sqrt();
    Ok(RecoveryBound {
        bound: sl / (((k + l) as f64).sqrt() + sl),
        order: l * k + big_n,
    })
}

/// Minimal snr for support recovery from `y = Φx + e`:
/// `[(√N + √K)(1 + δ)√K / (κ(√(L(1 − 2δ)) − δ√K))]²`, with `δ = δ_{LK+N}`
/// and `κ` the signal's MAR.
pub fn snr_threshold(k: usize, big_n: usize, l: usize, delta: f64, kappa: f64) -> Result<f64> {
    check_kln(k, big_n, l)?;
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidParams(format!("kappa must lie in (0, 1], got {kappa}")));
    }
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParams(format!("delta must be nonnegative, got {delta}")));
    }
    if delta >= 0.5 {
        return Err(Error::NoGuarantee(format!("delta = {delta} is not below 1/2")));
    }
    let (kf, nf, lf) = (k as f64, big_n as f64, l as f64);
    let denominator = (lf * (1.0 - 2.0 * delta)).sqrt() - delta * kf.sqrt();
    if denominator <= 0.0 {
        return Err(Error::NoGuarantee(format!(
            "delta = {delta} leaves a nonpositive denominator for K = {k}, L = {l}"
        )));
    }
    let root = (nf.sqrt() + kf.sqrt()) * (1.0 + delta) * kf.sqrt() / (kappa * denominator);
    Ok(root * root)
}

/// The delta at which the noisy threshold's denominator vanishes:
/// the positive root of `Kδ² + 2Lδ − L = 0`.
pub fn snr_pole(k: usize, l: usize) -> f64 {
    let (kf, lf) = (k as f64, l as f64);
    (-lf + (lf * lf + kf * lf).sqrt()) / kf
}
