//! Sparse test signals, noise injection and the scalar measures `snr` and MAR.

use nalgebra::DVector;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{IndexSet, SensingMatrix};
use crate::rng::{stream, stream_rng};

/// A K-sparse vector over `[0, n)` with every listed value nonzero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    n: usize,
    support: IndexSet,
    values: Vec<f64>,
}

impl SparseSignal {
    pub fn new(n: usize, support: IndexSet, values: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() > n {
            return Err(Error::InvalidSparsity {
                k: support.len(),
                n,
            });
        }
        support.check_bounds(n)?;
        if values.len() != support.len() {
            return Err(Error::DimensionMismatch(format!(
                "support has {} indices but {} values were given",
                support.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v == 0.0) {
            return Err(Error::InvalidParams(format!(
                "signal values must be finite and nonzero, got {bad}"
            )));
        }
        Ok(Self { n, support, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sparsity level `K`.
    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (i, &v) in self.support.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }

    /// `c · x`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.n,
            self.support.clone(),
            self.values.iter().map(|v| c * v).collect(),
        )
    }

    /// Values restricted to `subset`, in ascending index order. Indices outside
    /// the support contribute 0.
    pub fn restricted(&self, subset: &IndexSet) -> Vec<f64> {
        subset
            .iter()
            .map(|i| match self.support.as_slice().binary_search(&i) {
                Ok(pos) => self.values[pos],
                Err(_) => 0.0,
            })
            .collect()
    }
}

/// A vector over `[0, n)` stored by support; unlike [`SparseSignal`] the
/// listed values may be zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub n: usize,
    pub support: IndexSet,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            support: IndexSet::empty(),
            values: Vec::new(),
        }
    }

    pub fn to_dense(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (i, &v) in self.support.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }
}

impl From<&SparseSignal> for SparseVector {
    fn from(x: &SparseSignal) -> Self {
        Self {
            n: x.n(),
            support: x.support().clone(),
            values: x.values().to_vec(),
        }
    }
}

/// Distribution of the nonzero magnitudes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalValues {
    /// i.i.d. standard Gaussian.
    #[default]
    Gaussian,
    /// Independent random signs, unit magnitude (MAR = 1).
    Rademacher,
}

/// Uniformly random K-subset support with i.i.d. standard Gaussian values.
pub fn random_sparse_signal(n: usize, k: usize, seed: u64) -> Result<SparseSignal> {
    random_sparse_signal_with(n, k, seed, SignalValues::Gaussian)
}

pub fn random_sparse_signal_with(
    n: usize,
    k: usize,
    seed: u64,
    values: SignalValues,
) -> Result<SparseSignal> {
    if k == 0 || k > n {
        return Err(Error::InvalidSparsity { k, n });
    }
    let mut support_rng = stream_rng(seed, stream::SIGNAL_SUPPORT);
    let support: IndexSet = index::sample(&mut support_rng, n, k).into_iter().collect();

    let mut value_rng = stream_rng(seed, stream::SIGNAL_VALUES);
    let draws = (0..k)
        .map(|_| match values {
            SignalValues::Gaussian => loop {
                let v: f64 = value_rng.sample(StandardNormal);
                if v != 0.0 {
                    break v;
                }
            },
            SignalValues::Rademacher => {
                if value_rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect();
    SparseSignal::new(n, support, draws)
}

/// Noiseless measurements `Φ x`.
pub fn measure(a: &SensingMatrix, x: &SparseSignal) -> Result<DVector<f64>> {
    if x.n() != a.n() {
        return Err(Error::DimensionMismatch(format!(
            "signal dimension {} does not match matrix with {} columns",
            x.n(),
            a.n()
        )));
    }
    a.apply_on_support(x.support(), x.values())
}

/// `‖Φx‖² / ‖e‖²`, infinite when `e = 0`.
pub fn snr(a: &SensingMatrix, x: &SparseSignal, e: &DVector<f64>) -> Result<f64> {
    a.check_measurement_len(e.len())?;
    let signal = measure(a, x)?.norm_squared();
    let noise = e.norm_squared();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(signal / noise)
}

/// Minimum-to-average ratio `min_j |x_j| / (‖x‖ / √K)`.
pub fn mar(x: &SparseSignal) -> f64 {
    let min = x.values().iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    let energy: f64 = x.values().iter().map(|v| v * v).sum();
    (min * min * x.k() as f64 / energy).sqrt().min(1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisySample {
    pub y: DVector<f64>,
    pub e: DVector<f64>,
    pub x: SparseSignal,
    pub achieved_snr: f64,
}

/// Measurements `y = Φx + e` with `e` along a seeded isotropic Gaussian
/// direction, scaled so that `‖Φx‖² / ‖e‖² = target_snr`.
pub fn add_noise_at_snr(
    a: &SensingMatrix,
    x: &SparseSignal,
    target_snr: f64,
    seed: u64,
) -> Result<NoisySample> {
    if !(target_snr > 0.0 && target_snr.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "target snr must be positive and finite, got {target_snr}"
        )));
    }
    let clean = measure(a, x)?;
    let signal_norm = clean.norm();
    if signal_norm == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let mut rng = stream_rng(seed, stream::NOISE);
    let mut g = DVector::from_fn(a.m(), |_, _| rng.sample::<f64, _>(StandardNormal));
    while g.norm() == 0.0 {
        g = DVector::from_fn(a.m(), |_, _| rng.sample::<f64, _>(StandardNormal));
    }
    let e = &g * (signal_norm / (target_snr.sqrt() * g.norm()));
    let y = clean + &e;
    let achieved_snr = snr(a, x, &e)?;
    Ok(NoisySample {
        y,
        e,
        x: x.clone(),
        achieved_snr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{generate, DictionaryKind, DictionarySpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn matrix(m: usize, n: usize, seed: u64) -> SensingMatrix {
        generate(&DictionarySpec {
            m,
            n,
            kind: DictionaryKind::Gaussian,
            seed,
        })
        .unwrap()
    }

    /// Neumaier-compensated sum of squares.
    fn compensated_sum_sq(v: impl IntoIterator<Item = f64>) -> f64 {
        let (mut sum, mut c) = (0.0f64, 0.0f64);
        for x in v {
            let t = sum + x * x;
            if sum.abs() >= (x * x).abs() {
                c += (sum - t) + x * x;
            } else {
                c += (x * x - t) + sum;
            }
            sum = t;
        }
        sum + c
    }

    #[test]
    fn full_sparsity_covers_every_index() {
        let x = random_sparse_signal(7, 7, 3).unwrap();
        assert_eq!(x.support(), &IndexSet::full(7));
    }

    #[test]
    fn signal_generation_is_deterministic() {
        assert_eq!(
            random_sparse_signal(256, 10, 42).unwrap(),
            random_sparse_signal(256, 10, 42).unwrap()
        );
        assert_ne!(
            random_sparse_signal(256, 10, 42).unwrap(),
            random_sparse_signal(256, 10, 43).unwrap()
        );
    }

    #[test]
    fn invalid_sparsity_is_rejected() {
        assert!(matches!(
            random_sparse_signal(5, 0, 0),
            Err(Error::InvalidSparsity { .. })
        ));
        assert!(matches!(
            random_sparse_signal(5, 6, 0),
            Err(Error::InvalidSparsity { .. })
        ));
        assert!(SparseSignal::new(4, [1].into_iter().collect(), vec![0.0]).is_err());
    }

    #[test]
    fn support_inclusion_frequencies_are_uniform() {
        let (n, k, seeds) = (256usize, 10usize, 10_000u64);
        let mut counts = vec![0u32; n];
        for seed in 0..seeds {
            for i in random_sparse_signal(n, k, seed).unwrap().support().iter() {
                counts[i] += 1;
            }
        }
        let p = k as f64 / n as f64;
        let mean = seeds as f64 * p;
        let sd = (seeds as f64 * p * (1.0 - p)).sqrt();
        // 3σ per index would flag ~0.7 of 256 indices by chance; allow a handful.
        let outliers = counts
            .iter()
            .filter(|&&c| (c as f64 - mean).abs() > 3.0 * sd)
            .count();
        assert!(outliers <= 4, "{outliers} indices outside 3σ");
        assert!(counts.iter().all(|&c| (c as f64 - mean).abs() < 5.0 * sd));
    }

    #[test]
    fn rademacher_signals_have_unit_mar() {
        let x = random_sparse_signal_with(50, 6, 1, SignalValues::Rademacher).unwrap();
        assert!(x.values().iter().all(|v| v.abs() == 1.0));
        assert_eq!(mar(&x), 1.0);
    }

    #[test]
    fn snr_with_zero_noise_is_infinite() {
        let a = matrix(6, 10, 1);
        let x = random_sparse_signal(10, 2, 1).unwrap();
        assert_eq!(snr(&a, &x, &DVector::zeros(6)).unwrap(), f64::INFINITY);
        assert!(snr(&a, &x, &DVector::zeros(5)).is_err());
    }

    #[test]
    fn snr_is_the_direct_ratio() {
        let a = SensingMatrix::identity(3);
        let x = SparseSignal::new(3, [1].into_iter().collect(), vec![2.0]).unwrap();
        let e = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        assert_eq!(snr(&a, &x, &e).unwrap(), 4.0);
    }

    #[test]
    fn snr_matches_compensated_recomputation() {
        let a = matrix(20, 40, 9);
        let x = random_sparse_signal(40, 5, 9).unwrap();
        let e = DVector::from_fn(20, |i, _| ((i as f64) * 0.37).sin() * 0.1);
        let phi_x = measure(&a, &x).unwrap();
        let expected = compensated_sum_sq(phi_x.iter().copied()) / compensated_sum_sq(e.iter().copied());
        assert_abs_diff_eq!(snr(&a, &x, &e).unwrap(), expected, epsilon = 1e-12 * expected);
    }

    #[test]
    fn mar_examples() {
        let x = SparseSignal::new(5, [0, 3].into_iter().collect(), vec![3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(mar(&x), 3.0 / (5.0 / 2f64.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(mar(&x), 0.848_528_137_423_857, epsilon = 1e-12);
        let flat = SparseSignal::new(5, [0, 1, 4].into_iter().collect(), vec![-2.5, 2.5, 2.5]).unwrap();
        assert_eq!(mar(&flat), 1.0);
    }

    #[test]
    fn noise_hits_target_snr() {
        let a = matrix(16, 32, 2);
        let x = random_sparse_signal(32, 3, 2).unwrap();
        let sample = add_noise_at_snr(&a, &x, 4.0, 7).unwrap();
        assert_abs_diff_eq!(sample.achieved_snr, 4.0, epsilon = 1e-10);
        let resid = &sample.y - measure(&a, &x).unwrap();
        assert_abs_diff_eq!(resid, sample.e, epsilon = 1e-15);

        let scaled = add_noise_at_snr(&a, &x.scaled(10.0).unwrap(), 4.0, 7).unwrap();
        assert_abs_diff_eq!(scaled.achieved_snr, 4.0, epsilon = 1e-10);
    }

    #[test]
    fn noise_rejects_bad_targets() {
        let a = matrix(4, 8, 2);
        let x = random_sparse_signal(8, 2, 2).unwrap();
        assert!(add_noise_at_snr(&a, &x, 0.0, 1).is_err());
        assert!(add_noise_at_snr(&a, &x, f64::INFINITY, 1).is_err());
    }

    #[test]
    fn zero_measurement_energy_is_rejected() {
        // Columns 0 and 1 are identical, so x = e0 − e1 is invisible.
        let m = nalgebra::DMatrix::from_column_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let a = SensingMatrix::new(m).unwrap();
        let x = SparseSignal::new(3, [0, 1].into_iter().collect(), vec![1.0, -1.0]).unwrap();
        assert!(matches!(add_noise_at_snr(&a, &x, 2.0, 0), Err(Error::ZeroSignal)));
    }

    proptest! {
        #[test]
        fn mar_is_scale_invariant(seed in 0u64..500, p in -20i32..20, negate in any::<bool>()) {
            let c = if negate { -(2f64.powi(p)) } else { 2f64.powi(p) };
            let x = random_sparse_signal(30, 4, seed).unwrap();
            let k = mar(&x);
            prop_assert!(k > 0.0 && k <= 1.0);
            // Recompute directly.
            let min = x.values().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
            let avg = x.norm() / 2.0;
            prop_assert!((k - (min / avg).min(1.0)).abs() < 1e-15);
            let scaled = mar(&x.scaled(c).unwrap());
            prop_assert_eq!(scaled, k);
        }

        #[test]
        fn snr_is_homogeneous(seed in 0u64..200, c in prop_oneof![Just(2.0f64), Just(0.5), Just(-4.0)]) {
            let a = matrix(8, 16, seed);
            let x = random_sparse_signal(16, 3, seed).unwrap();
            let e = DVector::from_fn(8, |i, _| (i as f64 + 1.0) * 0.01);
            let base = snr(&a, &x, &e).unwrap();
            let scaled = snr(&a, &x.scaled(c).unwrap(), &(&e * c)).unwrap();
            prop_assert_eq!(base, scaled);
        }
    }
}
