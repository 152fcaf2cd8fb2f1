//! Closed-form flop counts.

use crate::error::{Error, Result};
use crate::greedy::Algorithm;

/// OMP: `2Kmn + 3K²m`. gOMP: `2smn + (2N² + N)s²m` for `s` iterations.
/// `k` is used by OMP and `s` by gOMP; other algorithms have no closed form.
pub fn flop_estimate(algorithm: &Algorithm, k: u64, m: u64, n: u64, s: u64) -> Result<u128> {
    if k == 0 || m == 0 || n == 0 || s == 0 {
        return Err(Error::InvalidParams(format!(
            "flop parameters must be positive, got K = {k}, m = {m}, n = {n}, s = {s}"
        )));
    }
    let (k, m, n, s) = (k as u128, m as u128, n as u128, s as u128);
    match *algorithm {
        Algorithm::Omp => Ok(2 * k * m * n + 3 * k * k * m),
        Algorithm::Gomp { n: big_n } => {
            let big_n = big_n as u128;
            Ok(2 * s * m * n + (2 * big_n * big_n + big_n) * s * s * m)
        }
        other => Err(Error::NotModeled(other.to_string())),
    }
}
