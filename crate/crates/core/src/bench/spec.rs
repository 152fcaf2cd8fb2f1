//! Sweep definitions and their flat key-value file form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::{Algorithm, DEFAULT_EPSILON};
use crate::signals::SignalValues;

pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_WARMUP_TRIALS: usize = 5;

/// `m ∈ {40, 50, …, 130}`.
pub fn default_measurement_grid() -> Vec<usize> {
    (40..=130).step_by(10).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sweep {
    /// Vary `m` at fixed sparsity `k`.
    Measurements { ms: Vec<usize>, k: usize },
    /// Vary `K` at fixed `m`.
    Sparsity { ks: Vec<usize>, m: usize },
}

impl Sweep {
    /// `(m, K)` for every cell, in grid order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        match self {
            Sweep::Measurements { ms, k } => ms.iter().map(|&m| (m, *k)).collect(),
            Sweep::Sparsity { ks, m } => ks.iter().map(|&k| (*m, k)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SweepFile", into = "SweepFile")]
pub struct ExperimentSpec {
    pub n: usize,
    pub sweep: Sweep,
    pub trials: usize,
    pub dictionary_t: f64,
    pub algorithms: Vec<Algorithm>,
    pub master_seed: u64,
    pub epsilon: f64,
    pub signal_values: SignalValues,
    /// Wall-clock timing is off by default so outputs stay reproducible.
    pub measure_runtime: bool,
    pub warmup_trials: usize,
}

impl ExperimentSpec {
    pub fn new(n: usize, sweep: Sweep, algorithms: Vec<Algorithm>) -> Self {
        ExperimentSpec {
            n,
            sweep,
            trials: DEFAULT_TRIALS,
            dictionary_t: 0.0,
            algorithms,
            master_seed: 0,
            epsilon: DEFAULT_EPSILON,
            signal_values: SignalValues::Gaussian,
            measure_runtime: false,
            warmup_trials: DEFAULT_WARMUP_TRIALS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.dictionary_t.is_finite() && self.dictionary_t >= 0.0) {
            return bad(format!("dictionary_t must be finite and nonnegative, got {}", self.dictionary_t));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad(format!("epsilon must be finite and nonnegative, got {}", self.epsilon));
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required".into());
        }
        let cells = self.sweep.cells();
        if cells.is_empty() {
            return bad("the sweep grid is empty".into());
        }
        for (m, k) in cells {
            if m == 0 {
                return bad("every m must be positive".into());
            }
            if k == 0 || k > self.n {
                return bad(format!("every K must satisfy 1 <= K <= n = {}, got {k}", self.n));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat sweep spec serializes to TOML")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SweepAxis {
    Measurements,
    Sparsity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<usize> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }

    fn single(self, key: &str) -> Result<usize> {
        match self {
            OneOrMany::One(v) => Ok(v),
            OneOrMany::Many(v) if v.len() == 1 => Ok(v[0]),
            OneOrMany::Many(_) => Err(Error::ConfigInvalid(format!(
                "{key} is the fixed parameter of this sweep and must be a single value"
            ))),
        }
    }
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_warmup() -> usize {
    DEFAULT_WARMUP_TRIALS
}

/// On-disk layout: one flat table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    n: usize,
    sweep: SweepAxis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<OneOrMany>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<OneOrMany>,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default)]
    dictionary_t: f64,
    algorithms: Vec<String>,
    #[serde(default)]
    master_seed: u64,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default)]
    signal_values: SignalValues,
    #[serde(default)]
    measure_runtime: bool,
    #[serde(default = "default_warmup")]
    warmup_trials: usize,
}

impl TryFrom<SweepFile> for ExperimentSpec {
    type Error = Error;

    fn try_from(f: SweepFile) -> Result<Self> {
        let sweep = match f.sweep {
            SweepAxis::Measurements => Sweep::Measurements {
                ms: f.m.map_or_else(default_measurement_grid, OneOrMany::into_vec),
                k: f
                    .k
                    .ok_or_else(|| Error::ConfigInvalid("a measurement sweep needs k".into()))?
                    .single("k")?,
            },
            SweepAxis::Sparsity => Sweep::Sparsity {
                ks: f
                    .k
                    .ok_or_else(|| Error::ConfigInvalid("a sparsity sweep needs k".into()))?
                    .into_vec(),
                m: f
                    .m
                    .ok_or_else(|| Error::ConfigInvalid("a sparsity sweep needs m".into()))?
                    .single("m")?,
            },
        };
        let algorithms = f
            .algorithms
            .iter()
            .map(|s| Algorithm::parse(s))
            .collect::<Result<Vec<_>>>()?;
        let spec = ExperimentSpec {
            n: f.n,
            sweep,
            trials: f.trials,
            dictionary_t: f.dictionary_t,
            algorithms,
            master_seed: f.master_seed,
            epsilon: f.epsilon,
            signal_values: f.signal_values,
            measure_runtime: f.measure_runtime,
            warmup_trials: f.warmup_trials,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<ExperimentSpec> for SweepFile {
    fn from(s: ExperimentSpec) -> Self {
        let (sweep, m, k) = match s.sweep {
            Sweep::Measurements { ms, k } => (SweepAxis::Measurements, OneOrMany::Many(ms), OneOrMany::One(k)),
            Sweep::Sparsity { ks, m } => (SweepAxis::Sparsity, OneOrMany::One(m), OneOrMany::Many(ks)),
        };
        SweepFile {
            n: s.n,
            sweep,
            m: Some(m),
            k: Some(k),
            trials: s.trials,
            dictionary_t: s.dictionary_t,
            algorithms: s.algorithms.iter().map(|a| a.to_string()).collect(),
            master_seed: s.master_seed,
            epsilon: s.epsilon,
            signal_values: s.signal_values,
            measure_runtime: s.measure_runtime,
            warmup_trials: s.warmup_trials,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MEASUREMENTS: &str = r#"
        n = 256
        sweep = "measurements"
        m = [40, 60, 80]
        k = 10
        trials = 50
        dictionary_t = 8.0
        algorithms = ["omp", "gomp:3", "m2ols:48:3"]
        master_seed = 7
    "#;

    #[test]
    fn parses_a_measurement_sweep() {
        let s = ExperimentSpec::from_toml_str(MEASUREMENTS).unwrap();
        assert_eq!(s.sweep, Sweep::Measurements { ms: vec![40, 60, 80], k: 10 });
        assert_eq!(s.algorithms[2], Algorithm::M2ols { n: 48, l: 3 });
        assert_eq!(s.epsilon, DEFAULT_EPSILON);
        assert_eq!(s.warmup_trials, DEFAULT_WARMUP_TRIALS);
        assert!(!s.measure_runtime);
        assert_eq!(s.sweep.cells(), vec![(40, 10), (60, 10), (80, 10)]);
    }

    #[test]
    fn defaults_fill_the_grid_and_trials() {
        let s = ExperimentSpec::from_toml_str("n = 256\nsweep = \"measurements\"\nk = 10\nalgorithms = [\"ols\"]\n").unwrap();
        assert_eq!(s.trials, DEFAULT_TRIALS);
        assert_eq!(s.sweep, Sweep::Measurements { ms: default_measurement_grid(), k: 10 });
        assert_eq!(default_measurement_grid().len(), 10);
    }

    #[test]
    fn parses_a_sparsity_sweep() {
        let text = "n = 256\nsweep = \"sparsity\"\nm = 128\nk = [10, 20, 30]\nalgorithms = [\"ols\", \"mols:3\"]\nmeasure_runtime = true\n";
        let s = ExperimentSpec::from_toml_str(text).unwrap();
        assert_eq!(s.sweep, Sweep::Sparsity { ks: vec![10, 20, 30], m: 128 });
        assert!(s.measure_runtime);
    }

    #[test]
    fn round_trips_through_toml_and_json() {
        let s = ExperimentSpec::from_toml_str(MEASUREMENTS).unwrap();
        assert_eq!(ExperimentSpec::from_toml_str(&s.to_toml_string()).unwrap(), s);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentSpec>(&json).unwrap(), s);
    }

    #[test]
    fn rejects_malformed_files() {
        for text in [
            "n = 256\nsweep = \"measurements\"\nalgorithms = [\"omp\"]\n",
            "n = 256\nsweep = \"measurements\"\nk = [1, 2]\nalgorithms = [\"omp\"]\n",
            "n = 256\nsweep = \"sparsity\"\nk = [1, 2]\nalgorithms = [\"omp\"]\n",
            "n = 256\nsweep = \"measurements\"\nk = 3\nalgorithms = [\"cosamp\"]\n",
            "n = 256\nsweep = \"measurements\"\nk = 3\nalgorithms = []\n",
            "n = 256\nsweep = \"measurements\"\nk = 3\ntrials = 0\nalgorithms = [\"omp\"]\n",
            "n = 256\nsweep = \"measurements\"\nk = 300\nalgorithms = [\"omp\"]\n",
            "n = 256\nsweep = \"measurements\"\nk = 3\nalgorithms = [\"omp\"]\nbogus = 1\n",
            "n = 256\nsweep = \"diagonal\"\nk = 3\nalgorithms = [\"omp\"]\n",
        ] {
            assert!(ExperimentSpec::from_toml_str(text).is_err(), "{text}");
        }
    }
}
