//! Random sensing-matrix construction.
//!
//! Gaussian dictionaries draw `n_ij ~ N(0, 1/m)`; correlated dictionaries add a
//! per-column offset `t_j ~ U[0, T]` before normalizing, which pushes every
//! column toward the all-ones direction as `T` grows.
//!
//! Stream layout: the `n_ij` are drawn in column-major order from
//! [`stream::DICTIONARY_ENTRIES`], the `t_j` from [`stream::DICTIONARY_OFFSETS`],
//! and replacement columns for the (probability zero) zero-norm case from
//! [`stream::DICTIONARY_REDRAW`]. `Correlated(0)` therefore reproduces
//! `Gaussian` bit for bit.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SensingMatrix;
use crate::rng::{stream, stream_rng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DictionaryKind {
    Gaussian,
    /// Column offsets drawn from `U[0, t]`.
    Correlated { t: f64 },
}

impl DictionaryKind {
    /// `Gaussian` for `t == 0`, `Correlated` otherwise.
    pub fn with_offset(t: f64) -> Self {
        if t == 0.0 {
            DictionaryKind::Gaussian
        } else {
            DictionaryKind::Correlated { t }
        }
    }

    pub fn offset(&self) -> f64 {
        match *self {
            DictionaryKind::Gaussian => 0.0,
            DictionaryKind::Correlated { t } => t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionarySpec {
    pub m: usize,
    pub n: usize,
    pub kind: DictionaryKind,
    pub seed: u64,
}

impl DictionarySpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidSpec(format!(
                "dimensions must be positive, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        let t = self.kind.offset();
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "correlation offset must be finite and nonnegative, got {t}"
            )));
        }
        Ok(())
    }
}

pub fn generate(spec: &DictionarySpec) -> Result<SensingMatrix> {
    spec.validate()?;
    let DictionarySpec { m, n, kind, seed } = *spec;
    let sd = (1.0 / m as f64).sqrt();
    let t = kind.offset();

    let mut entries_rng = stream_rng(seed, stream::DICTIONARY_ENTRIES);
    let mut entries = DMatrix::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            let z: f64 = entries_rng.sample(StandardNormal);
            entries[(i, j)] = sd * z;
        }
    }

    if t > 0.0 {
        let mut offsets_rng = stream_rng(seed, stream::DICTIONARY_OFFSETS);
        for mut col in entries.column_iter_mut() {
            let u: f64 = offsets_rng.random();
            col.add_scalar_mut(t * u);
        }
    }

    let mut redraw_rng = None;
    for j in 0..n {
        while entries.column(j).norm() == 0.0 {
            log::warn!("dictionary seed {seed}: column {j} has zero norm, redrawing");
            let rng = redraw_rng.get_or_insert_with(|| stream_rng(seed, stream::DICTIONARY_REDRAW));
            let offset = if t > 0.0 { t * rng.random::<f64>() } else { 0.0 };
            for i in 0..m {
                let z: f64 = rng.sample(StandardNormal);
                entries[(i, j)] = sd * z + offset;
            }
        }
    }

    SensingMatrix::normalized(entries)
}

/// Mutual coherence `max_{i≠j} |⟨φ_i, φ_j⟩|`.
pub fn coherence(a: &SensingMatrix) -> Result<f64> {
    if a.n() < 2 {
        return Err(Error::DimensionMismatch(
            "coherence needs at least two columns".into(),
        ));
    }
    let gram = a.entries().tr_mul(a.entries());
    let mut best = 0.0f64;
    for j in 0..a.n() {
        for i in 0..j {
            best = best.max(gram[(i, j)].abs());
        }
    }
    Ok(best.min(1.0))
}

/// Mean of `|⟨φ_i, φ_j⟩|` over unordered pairs `i ≠ j`.
pub fn mean_pairwise_coherence(a: &SensingMatrix) -> Result<f64> {
    if a.n() < 2 {
        return Err(Error::DimensionMismatch(
            "coherence needs at least two columns".into(),
        ));
    }
    let gram = a.entries().tr_mul(a.entries());
    let mut sum = 0.0;
    for j in 0..a.n() {
        for i in 0..j {
            sum += gram[(i, j)].abs();
        }
    }
    let pairs = a.n() * (a.n() - 1) / 2;
    Ok(sum / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(m: usize, n: usize, kind: DictionaryKind, seed: u64) -> DictionarySpec {
        DictionarySpec { m, n, kind, seed }
    }

    #[test]
    fn columns_are_unit_norm() {
        for kind in [
            DictionaryKind::Gaussian,
            DictionaryKind::Correlated { t: 4.0 },
            DictionaryKind::Correlated { t: 8.0 },
        ] {
            let a = generate(&spec(16, 40, kind, 3)).unwrap();
            for col in a.entries().column_iter() {
                assert!((col.norm() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let s = spec(12, 30, DictionaryKind::Correlated { t: 4.0 }, 99);
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        let other = spec(12, 30, DictionaryKind::Correlated { t: 4.0 }, 100);
        assert_ne!(generate(&s).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn zero_offset_matches_gaussian() {
        for seed in [0, 1, 12345] {
            let g = generate(&spec(9, 17, DictionaryKind::Gaussian, seed)).unwrap();
            let c = generate(&spec(9, 17, DictionaryKind::Correlated { t: 0.0 }, seed)).unwrap();
            assert_eq!(g, c);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(generate(&spec(0, 4, DictionaryKind::Gaussian, 0)).is_err());
        assert!(generate(&spec(4, 0, DictionaryKind::Gaussian, 0)).is_err());
        assert!(generate(&spec(4, 4, DictionaryKind::Correlated { t: -1.0 }, 0)).is_err());
        assert!(generate(&spec(4, 4, DictionaryKind::Correlated { t: f64::NAN }, 0)).is_err());
    }

    #[test]
    fn gaussian_entries_are_centered() {
        let m = 64;
        let a = generate(&spec(m, 400, DictionaryKind::Gaussian, 5)).unwrap();
        let mean: f64 = a.entries().iter().sum::<f64>() / (m * 400) as f64;
        assert!(mean.abs() < 0.01);
    }

    #[test]
    fn coherence_of_orthonormal_columns_is_zero() {
        assert_eq!(coherence(&SensingMatrix::identity(5)).unwrap(), 0.0);
    }

    #[test]
    fn coherence_of_duplicate_columns_is_one() {
        let m = DMatrix::from_column_slice(2, 3, &[0.6, 0.8, 0.6, 0.8, 1.0, 0.0]);
        let a = SensingMatrix::new(m).unwrap();
        assert_abs_diff_eq!(coherence(&a).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn coherence_matches_pairwise_enumeration() {
        let a = generate(&spec(4, 6, DictionaryKind::Gaussian, 8)).unwrap();
        let mut oracle = 0.0f64;
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    let dot: f64 = (0..4).map(|r| a.entries()[(r, i)] * a.entries()[(r, j)]).sum();
                    oracle = oracle.max(dot.abs());
                }
            }
        }
        assert_abs_diff_eq!(coherence(&a).unwrap(), oracle, epsilon = 1e-14);
        assert!(coherence(&SensingMatrix::identity(1)).is_err());
    }

    #[test]
    fn mean_coherence_increases_with_offset() {
        let mut means = [0.0; 3];
        let seeds = 200;
        for (slot, t) in [0.0, 4.0, 8.0].into_iter().enumerate() {
            for seed in 0..seeds {
                let a = generate(&spec(32, 64, DictionaryKind::with_offset(t), seed)).unwrap();
                means[slot] += mean_pairwise_coherence(&a).unwrap();
            }
            means[slot] /= seeds as f64;
        }
        assert!(means[0] <= means[1] && means[1] <= means[2], "{means:?}");
        assert!(means[2] > means[0]);
    }
}
