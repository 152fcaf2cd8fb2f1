//! End-to-end checks of the noiseless and noisy recovery guarantees on tiny
//! instances where the exact RIC is computable.
//!
//! Attempts draw a Gaussian dictionary and a sparse signal from per-attempt
//! seeds; an instance is *certified* when `δ_{LK+N} < √L/(√(K+L)+√L)`.
//! Uncertified instances are discarded. A counterexample is a certified
//! instance on which m²OLS misses the true support.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::bounds::{recovery_bound, snr_threshold};
use crate::analysis::ric::exact_ric;
use crate::dictionary::{generate, DictionaryKind, DictionarySpec};
use crate::error::{Error, Result};
use crate::greedy::{run, Algorithm, GreedyConfig};
use crate::linalg::SensingMatrix;
use crate::rng::{derive_seed, stream, stream_rng};
use crate::signals::{add_noise_at_snr, mar, measure, random_sparse_signal, SparseSignal};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheckConfig {
    pub k: usize,
    pub l: usize,
    /// Candidate values of `N`, one drawn per attempt.
    pub big_n_choices: Vec<usize>,
    /// Inclusive range of `n`, one value drawn per attempt.
    pub n_min: usize,
    pub n_max: usize,
    pub m: usize,
    /// Stop after this many certified instances.
    pub wanted: usize,
    pub max_attempts: usize,
    pub seed: u64,
    /// Noise is injected at `snr_factor` times the threshold.
    pub snr_factor: f64,
}

impl Default for TheoremCheckConfig {
    fn default() -> Self {
        TheoremCheckConfig {
            k: 2,
            l: 1,
            big_n_choices: vec![1, 2],
            n_min: 10,
            n_max: 14,
            m: 128,
            wanted: 25,
            max_attempts: 2000,
            seed: 0,
            snr_factor: 2.0,
        }
    }
}

impl TheoremCheckConfig {
    pub fn validate(&self) -> Result<()> {
        if self.big_n_choices.is_empty() || self.n_min > self.n_max || self.wanted == 0 {
            return Err(Error::InvalidParams(
                "need at least one N, a nonempty n range and wanted >= 1".into(),
            ));
        }
        for &big_n in &self.big_n_choices {
            let b = recovery_bound(self.k, big_n, self.l)?;
            if b.order > self.m || b.order > self.n_min {
                return Err(Error::InvalidParams(format!(
                    "RIC order {} exceeds m = {} or n = {}",
                    b.order, self.m, self.n_min
                )));
            }
        }
        if self.snr_factor.is_nan() || self.snr_factor <= 1.0 {
            return Err(Error::InvalidParams(format!(
                "snr_factor must exceed 1, got {}",
                self.snr_factor
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedInstance {
    pub attempt: usize,
    pub dictionary_seed: u64,
    pub signal_seed: u64,
    pub noise_seed: u64,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub big_n: usize,
    pub l: usize,
    pub delta: f64,
    pub bound: f64,
}

impl CertifiedInstance {
    pub fn matrix(&self) -> Result<SensingMatrix> {
        generate(&DictionarySpec {
            m: self.m,
            n: self.n,
            kind: DictionaryKind::Gaussian,
            seed: self.dictionary_seed,
        })
    }

    pub fn signal(&self) -> Result<SparseSignal> {
        random_sparse_signal(self.n, self.k, self.signal_seed)
    }

    pub fn config(&self) -> GreedyConfig {
        GreedyConfig::new(
            Algorithm::M2ols {
                n: self.big_n,
                l: self.l,
            },
            self.k,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub config: TheoremCheckConfig,
    pub attempts: usize,
    pub instances: Vec<CertifiedInstance>,
}

/// Draw attempts until `wanted` instances are certified or attempts run out.
pub fn certify_instances(cfg: &TheoremCheckConfig) -> Result<Certification> {
    cfg.validate()?;
    let mut instances = Vec::new();
    let mut attempts = 0;
    while instances.len() < cfg.wanted && attempts < cfg.max_attempts {
        let attempt = attempts;
        attempts += 1;
        let seed = derive_seed(cfg.seed, &[attempt as u64]);
        let mut rng = stream_rng(seed, stream::AUXILIARY);
        let n = rng.random_range(cfg.n_min..=cfg.n_max);
        let big_n = cfg.big_n_choices[rng.random_range(0..cfg.big_n_choices.len())];
        let bound = recovery_bound(cfg.k, big_n, cfg.l)?;
        let instance = CertifiedInstance {
            attempt,
            dictionary_seed: derive_seed(seed, &[0]),
            signal_seed: derive_seed(seed, &[1]),
            noise_seed: derive_seed(seed, &[2]),
            m: cfg.m,
            n,
            k: cfg.k,
            big_n,
            l: cfg.l,
            delta: 0.0,
            bound: bound.bound,
        };
        let delta = exact_ric(&instance.matrix()?, bound.order)?.delta;
        if delta < bound.bound {
            instances.push(CertifiedInstance { delta, ..instance });
        }
    }
    Ok(Certification {
        config: cfg.clone(),
        attempts,
        instances,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremOutcome {
    pub attempt: usize,
    pub n: usize,
    pub big_n: usize,
    pub delta: f64,
    pub recovered: bool,
    /// Noisy check only.
    pub kappa: Option<f64>,
    pub snr_threshold: Option<f64>,
    pub achieved_snr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub noisy: bool,
    pub attempts: usize,
    pub certified: usize,
    pub recoveries: usize,
    pub counterexamples: usize,
    pub outcomes: Vec<TheoremOutcome>,
}

impl TheoremReport {
    fn from_outcomes(noisy: bool, attempts: usize, outcomes: Vec<TheoremOutcome>) -> Self {
        let recoveries = outcomes.iter().filter(|o| o.recovered).count();
        TheoremReport {
            noisy,
            attempts,
            certified: outcomes.len(),
            recoveries,
            counterexamples: outcomes.len() - recoveries,
            outcomes,
        }
    }
}

/// Noiseless m²OLS on every certified instance.
pub fn check_noiseless(cert: &Certification) -> Result<TheoremReport> {
    let outcomes = cert
        .instances
        .iter()
        .map(|inst| {
            let a = inst.matrix()?;
            let x = inst.signal()?;
            let y = measure(&a, &x)?;
            let result = run(&a, &y, &inst.config())?;
            Ok(TheoremOutcome {
                attempt: inst.attempt,
                n: inst.n,
                big_n: inst.big_n,
                delta: inst.delta,
                recovered: &result.support_hat == x.support(),
                kappa: None,
                snr_threshold: None,
                achieved_snr: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoremReport::from_outcomes(false, cert.attempts, outcomes))
}

/// m²OLS on every certified instance with noise at `snr_factor` times the
/// threshold computed from the exact `δ` and the signal's MAR.
pub fn check_noisy(cert: &Certification) -> Result<TheoremReport> {
    let outcomes = cert
        .instances
        .iter()
        .map(|inst| {
            let a = inst.matrix()?;
            let x = inst.signal()?;
            let kappa = mar(&x);
            let threshold = snr_threshold(inst.k, inst.big_n, inst.l, inst.delta, kappa)?;
            let sample = add_noise_at_snr(&a, &x, cert.config.snr_factor * threshold, inst.noise_seed)?;
            let result = run(&a, &sample.y, &inst.config())?;
            Ok(TheoremOutcome {
                attempt: inst.attempt,
                n: inst.n,
                big_n: inst.big_n,
                delta: inst.delta,
                recovered: &result.support_hat == x.support(),
                kappa: Some(kappa),
                snr_threshold: Some(threshold),
                achieved_snr: Some(sample.achieved_snr),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoremReport::from_outcomes(true, cert.attempts, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TheoremCheckConfig {
        TheoremCheckConfig {
            wanted: 5,
            seed: 3,
            ..TheoremCheckConfig::default()
        }
    }

    #[test]
    fn certified_instances_satisfy_the_condition() {
        let cert = certify_instances(&small()).unwrap();
        assert_eq!(cert.instances.len(), 5);
        for inst in &cert.instances {
            assert!(inst.delta < inst.bound);
            assert!((10..=14).contains(&inst.n));
            assert!([1, 2].contains(&inst.big_n));
        }
        assert_eq!(cert, certify_instances(&small()).unwrap());
    }

    #[test]
    fn guarantees_hold_on_a_few_instances() {
        let cert = certify_instances(&small()).unwrap();
        let clean = check_noiseless(&cert).unwrap();
        assert_eq!(clean.counterexamples, 0);
        let noisy = check_noisy(&cert).unwrap();
        assert_eq!(noisy.counterexamples, 0);
        for o in &noisy.outcomes {
            let achieved = o.achieved_snr.unwrap();
            assert!((achieved / o.snr_threshold.unwrap() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = small();
        cfg.big_n_choices = vec![];
        assert!(certify_instances(&cfg).is_err());
        let mut cfg = small();
        cfg.snr_factor = 1.0;
        assert!(certify_instances(&cfg).is_err());
        let mut cfg = small();
        cfg.l = 3;
        assert!(certify_instances(&cfg).is_err());
    }
}
