//! Greedy support recovery: OMP, OLS, gOMP, mOLS and m²OLS.
//!
//! All five share one loop. Each iteration picks a set `h^k` of new indices,
//! appends the matching columns to a running QR factorization of `Φ_{T^k}`,
//! re-solves the least-squares estimate on `T^k` and updates the residual.
//! They differ only in how `h^k` is picked:
//!
//! | algorithm | selection                                                       |
//! |-----------|-----------------------------------------------------------------|
//! | gOMP(N)   | `N` largest `\|⟨φ_i, r⟩\|` among unselected indices              |
//! | mOLS(L)   | `L` largest `⟨φ_i, r⟩² / ‖P⊥_T φ_i‖²` among unselected indices   |
//! | m²OLS     | gOMP preselection of `N`, then the mOLS rule restricted to those |
//!
//! OMP is gOMP(1) and OLS is mOLS(1). The ratio rule is the closed form of
//! "pick the `L` indices whose individual addition leaves the smallest
//! residual", because `‖P⊥_{T∪{i}} y‖² = ‖P⊥_T y‖² − ⟨φ_i, r⟩² / ‖P⊥_T φ_i‖²`.
//!
//! Already-selected indices are never offered again; `Φ_Tᵗ r = 0` means they
//! could only be picked through ties at zero. Every ranking breaks ties toward
//! the smaller index.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DVector;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{ColumnQr, IndexSet, SensingMatrix};
use crate::signals::SparseVector;

/// Default residual threshold, relative to `‖y‖`.
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Algorithm {
    Omp,
    Ols,
    Gomp { n: usize },
    Mols { l: usize },
    M2ols { n: usize, l: usize },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Omp => "omp",
            Algorithm::Ols => "ols",
            Algorithm::Gomp { .. } => "gomp",
            Algorithm::Mols { .. } => "mols",
            Algorithm::M2ols { .. } => "m2ols",
        }
    }

    /// Preselection width `N`, where the algorithm has one.
    pub fn big_n(&self) -> Option<usize> {
        match *self {
            Algorithm::Omp => Some(1),
            Algorithm::Gomp { n } | Algorithm::M2ols { n, .. } => Some(n),
            Algorithm::Ols | Algorithm::Mols { .. } => None,
        }
    }

    /// Identification width `L`, where the algorithm has one.
    pub fn l(&self) -> Option<usize> {
        match *self {
            Algorithm::Ols => Some(1),
            Algorithm::Mols { l } | Algorithm::M2ols { l, .. } => Some(l),
            Algorithm::Omp | Algorithm::Gomp { .. } => None,
        }
    }

    /// Most indices added to the support in one iteration.
    pub fn per_iteration(&self) -> usize {
        match *self {
            Algorithm::Omp | Algorithm::Ols => 1,
            Algorithm::Gomp { n } => n,
            Algorithm::Mols { l } | Algorithm::M2ols { l, .. } => l,
        }
    }

    /// The underlying selection rule, with OMP/OLS unfolded.
    fn rule(&self) -> Rule {
        match *self {
            Algorithm::Omp => Rule::Correlation { n: 1 },
            Algorithm::Gomp { n } => Rule::Correlation { n },
            Algorithm::Ols => Rule::Ratio { l: 1 },
            Algorithm::Mols { l } => Rule::Ratio { l },
            Algorithm::M2ols { n, l } => Rule::Preselected { n, l },
        }
    }

    /// Parse `omp`, `ols`, `gomp:N`, `mols:L` or `m2ols:N:L`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| Error::ConfigInvalid(format!("bad integer {p:?} in algorithm {s:?}")))
        };
        match parts.as_slice() {
            ["omp"] => Ok(Algorithm::Omp),
            ["ols"] => Ok(Algorithm::Ols),
            ["gomp", n] => Ok(Algorithm::Gomp { n: num(n)? }),
            ["mols", l] => Ok(Algorithm::Mols { l: num(l)? }),
            ["m2ols", n, l] => Ok(Algorithm::M2ols {
                n: num(n)?,
                l: num(l)?,
            }),
            _ => Err(Error::ConfigInvalid(format!(
                "unknown algorithm {s:?}; expected omp, ols, gomp:N, mols:L or m2ols:N:L"
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Algorithm::Omp => write!(f, "omp"),
            Algorithm::Ols => write!(f, "ols"),
            Algorithm::Gomp { n } => write!(f, "gomp:{n}"),
            Algorithm::Mols { l } => write!(f, "mols:{l}"),
            Algorithm::M2ols { n, l } => write!(f, "m2ols:{n}:{l}"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Rule {
    Correlation { n: usize },
    Ratio { l: usize },
    Preselected { n: usize, l: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub algorithm: Algorithm,
    /// Sparsity level `K`.
    pub k: usize,
    /// Loop runs while `‖r‖ ≥ epsilon · ‖y‖`.
    pub epsilon: f64,
    /// Defaults to `k`.
    pub max_iterations: Option<usize>,
}

impl GreedyConfig {
    pub fn new(algorithm: Algorithm, k: usize) -> Self {
        Self {
            algorithm,
            k,
            epsilon: DEFAULT_EPSILON,
            max_iterations: None,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = Some(max_iterations);
        self
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations.unwrap_or(self.k)
    }

    /// Parameter constraints that do not depend on the matrix.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.k == 0 {
            return bad("sparsity K must be at least 1".into());
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be finite and nonnegative, got {}", self.epsilon));
        }
        if self.max_iterations() == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        match self.algorithm {
            Algorithm::Omp | Algorithm::Ols => {}
            Algorithm::Gomp { n: 0 } => return bad("gOMP needs N >= 1".into()),
            Algorithm::Mols { l } if l == 0 || l > self.k => {
                return bad(format!("mOLS needs 1 <= L <= K, got L = {l}, K = {}", self.k))
            }
            Algorithm::M2ols { n, l } if l == 0 || l > n || l > self.k => {
                return bad(format!(
                    "m2OLS needs 1 <= L <= N and L <= K, got N = {n}, L = {l}, K = {}",
                    self.k
                ))
            }
            _ => {}
        }
        Ok(())
    }

    /// Full validation against the matrix the run will use.
    pub fn validate_for(&self, a: &SensingMatrix) -> Result<()> {
        self.validate()?;
        if self.k > a.n() {
            return Err(Error::ConfigInvalid(format!(
                "sparsity K = {} exceeds dimension n = {}",
                self.k,
                a.n()
            )));
        }
        let budget = self.algorithm.per_iteration().saturating_mul(self.max_iterations());
        if budget > a.m() {
            return Err(Error::ConfigInvalid(format!(
                "{} selects up to {} indices per iteration over {} iterations, more than m = {}",
                self.algorithm,
                self.algorithm.per_iteration(),
                self.max_iterations(),
                a.m()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub k: usize,
    /// `S^k`; empty for algorithms without a preselection step.
    pub preselected: IndexSet,
    /// `h^k`.
    pub identified: IndexSet,
    /// `T^k`.
    pub support: IndexSet,
    pub residual_norm: f64,
}

impl IterationTrace {
    /// State before the first iteration: `T^0 = S^0 = ∅`, `r^0 = y`.
    pub fn initial(y_norm: f64) -> Self {
        Self {
            k: 0,
            preselected: IndexSet::empty(),
            identified: IndexSet::empty(),
            support: IndexSet::empty(),
            residual_norm: y_norm,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryResult {
    pub config: GreedyConfig,
    /// K-sparse output `x̂`, supported on `support_hat`.
    pub x_hat: SparseVector,
    pub support_hat: IndexSet,
    pub iterations: Vec<IterationTrace>,
    /// Whether the residual threshold was reached.
    pub converged: bool,
    /// Set by [`RecoveryResult::with_ground_truth`].
    pub exact_support_match: Option<bool>,
    /// Least-squares estimate `x^k` on the final `T^k`, ascending index order.
    pub estimate: SparseVector,
    pub residual: DVector<f64>,
}

impl RecoveryResult {
    pub fn with_ground_truth(mut self, truth: &IndexSet) -> Self {
        self.exact_support_match = Some(&self.support_hat == truth);
        self
    }

    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }

    /// `T^k` after the last iteration.
    pub fn final_support(&self) -> &IndexSet {
        &self.estimate.support
    }

    /// Support trajectory `T^1, T^2, ...`.
    pub fn support_trajectory(&self) -> Vec<&IndexSet> {
        self.iterations.iter().map(|t| &t.support).collect()
    }
}

impl Serialize for RecoveryResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Params<'a>(&'a GreedyConfig);
        impl Serialize for Params<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let c = self.0;
                let mut map = s.serialize_map(None)?;
                map.serialize_entry("K", &c.k)?;
                if let Some(n) = c.algorithm.big_n() {
                    map.serialize_entry("N", &n)?;
                }
                if let Some(l) = c.algorithm.l() {
                    map.serialize_entry("L", &l)?;
                }
                map.serialize_entry("epsilon", &c.epsilon)?;
                map.serialize_entry("max_iterations", &c.max_iterations())?;
                map.end()
            }
        }
        struct ByIndex<'a>(&'a SparseVector);
        impl Serialize for ByIndex<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some(self.0.values.len()))?;
                for (i, v) in self.0.support.iter().zip(&self.0.values) {
                    map.serialize_entry(&i.to_string(), v)?;
                }
                map.end()
            }
        }

        let fields = if self.exact_support_match.is_some() { 7 } else { 6 };
        let mut st = serializer.serialize_struct("RecoveryResult", fields)?;
        st.serialize_field("algorithm", self.config.algorithm.name())?;
        st.serialize_field("params", &Params(&self.config))?;
        st.serialize_field("iterations", &self.iterations)?;
        st.serialize_field("support_hat", &self.support_hat)?;
        st.serialize_field("x_hat", &ByIndex(&self.x_hat))?;
        st.serialize_field("converged", &self.converged)?;
        if let Some(hit) = self.exact_support_match {
            st.serialize_field("exact_support_match", &hit)?;
        }
        st.end()
    }
}

fn by_score_then_index(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

/// The `count` highest-scoring entries, ties to the smaller index.
fn top_by_score(mut scored: Vec<(usize, f64)>, count: usize) -> IndexSet {
    scored.sort_by(by_score_then_index);
    scored.into_iter().take(count).map(|(i, _)| i).collect()
}

fn preselect_from_correlations(
    correlations: &DVector<f64>,
    forbidden: &IndexSet,
    count: usize,
) -> IndexSet {
    let scored = (0..correlations.len())
        .filter(|&i| !forbidden.contains(i))
        .map(|i| (i, correlations[i].abs()))
        .collect();
    top_by_score(scored, count)
}

/// The `big_n` indices outside `forbidden` with the largest `|⟨φ_i, r⟩|`.
pub fn preselect(
    a: &SensingMatrix,
    r: &DVector<f64>,
    forbidden: &IndexSet,
    big_n: usize,
) -> Result<IndexSet> {
    forbidden.check_bounds(a.n())?;
    let available = a.n() - forbidden.len();
    if big_n == 0 || big_n > available {
        return Err(Error::NotEnoughCandidates {
            wanted: big_n,
            available,
        });
    }
    let correlations = a.correlations(r)?;
    Ok(preselect_from_correlations(&correlations, forbidden, big_n))
}

/// Identification scores `⟨φ_i, r⟩² / ‖P⊥_T φ_i‖²`, or `-∞` when `φ_i` lies
/// in `span(Φ_T)` up to the rank tolerance. `qr` factors `Φ_T`.
pub fn ratio_scores(
    a: &SensingMatrix,
    qr: &ColumnQr,
    correlations: &DVector<f64>,
    candidates: &IndexSet,
) -> Vec<(usize, f64)> {
    candidates
        .iter()
        .map(|i| {
            let pn = qr.projected_norm(a, i);
            let score = if pn > qr.tolerance() {
                let c = correlations[i];
                (c * c) / (pn * pn)
            } else {
                f64::NEG_INFINITY
            };
            (i, score)
        })
        .collect()
}

/// Up to `l` finite-score candidates, best first by ratio score.
fn identify_up_to(scored: Vec<(usize, f64)>, l: usize) -> IndexSet {
    let finite: Vec<_> = scored.into_iter().filter(|(_, s)| s.is_finite()).collect();
    top_by_score(finite, l)
}

/// The `l` candidates with the largest `⟨φ_i, r⟩² / ‖P⊥_support φ_i‖²`.
///
/// Equivalently, the `l`-subset minimizing `Σ_i ‖P⊥_{support ∪ {i}} y‖²` when
/// `r = P⊥_support y`.
pub fn identify(
    a: &SensingMatrix,
    r: &DVector<f64>,
    support: &IndexSet,
    candidates: &IndexSet,
    l: usize,
) -> Result<IndexSet> {
    candidates.check_bounds(a.n())?;
    if !candidates.is_disjoint(support) {
        return Err(Error::InvalidParams(format!(
            "candidates {candidates} intersect support {support}"
        )));
    }
    if l == 0 || l > candidates.len() {
        return Err(Error::NotEnoughCandidates {
            wanted: l,
            available: candidates.len(),
        });
    }
    let qr = ColumnQr::for_support(a, support)?;
    let correlations = a.correlations(r)?;
    let scored = ratio_scores(a, &qr, &correlations, candidates);
    let available = scored.iter().filter(|(_, s)| s.is_finite()).count();
    if available < l {
        return Err(Error::DegenerateCandidates {
            wanted: l,
            available,
        });
    }
    Ok(identify_up_to(scored, l))
}

/// Keep the `k` largest-magnitude entries of `x` (ties to the smaller index).
/// Returns fewer than `k` entries only when `x` is shorter than `k`.
pub fn top_k_truncate(x: &[f64], k: usize) -> (IndexSet, Vec<f64>) {
    let scored = x.iter().enumerate().map(|(i, v)| (i, v.abs())).collect();
    let support = top_by_score(scored, k);
    let values = support.iter().map(|i| x[i]).collect();
    (support, values)
}

/// Output step: K-sparse `x̂` from the estimate on `T^k`, padded with the
/// smallest unused indices (and zero values) when `|T^k| < K`.
fn k_sparse_output(estimate: &SparseVector, k: usize) -> SparseVector {
    let scored = estimate
        .support
        .iter()
        .zip(&estimate.values)
        .map(|(i, v)| (i, v.abs()))
        .collect();
    let mut support = top_by_score(scored, k);
    if support.len() < k {
        let pad: Vec<usize> = (0..estimate.n)
            .filter(|&i| !support.contains(i))
            .take(k - support.len())
            .collect();
        support = support.iter().chain(pad).collect();
    }
    let values = support
        .iter()
        .map(|i| match estimate.support.as_slice().binary_search(&i) {
            Ok(pos) => estimate.values[pos],
            Err(_) => 0.0,
        })
        .collect();
    SparseVector {
        n: estimate.n,
        support,
        values,
    }
}

/// Run the configured greedy algorithm on `y ≈ Φx`.
pub fn run(a: &SensingMatrix, y: &DVector<f64>, config: &GreedyConfig) -> Result<RecoveryResult> {
    config.validate_for(a)?;
    a.check_measurement_len(y.len())?;

    let n = a.n();
    let y_norm = y.norm();
    let threshold = config.epsilon * y_norm;
    let reached = |r_norm: f64| y_norm == 0.0 || r_norm < threshold;
    let rule = config.algorithm.rule();

    let mut qr = ColumnQr::new(a);
    let mut support = IndexSet::empty();
    let mut coefficients: Vec<f64> = Vec::new();
    let mut residual = y.clone();
    let mut residual_norm = y_norm;
    let mut iterations = Vec::new();

    while !reached(residual_norm) && iterations.len() < config.max_iterations() {
        let k = iterations.len() + 1;
        let remaining = n - support.len();
        if remaining == 0 {
            break;
        }
        let correlations = a.correlations(&residual)?;
        let (preselected, identified) = match rule {
            Rule::Correlation { n: big_n } => {
                let h = preselect_from_correlations(&correlations, &support, big_n.min(remaining));
                (IndexSet::empty(), h)
            }
            Rule::Ratio { l } => {
                let candidates = support.complement(n);
                let scored = ratio_scores(a, &qr, &correlations, &candidates);
                (IndexSet::empty(), identify_up_to(scored, l))
            }
            Rule::Preselected { n: big_n, l } => {
                let s = preselect_from_correlations(&correlations, &support, big_n.min(remaining));
                let scored = ratio_scores(a, &qr, &correlations, &s);
                let h = identify_up_to(scored, l);
                (s, h)
            }
        };
        if identified.is_empty() {
            log::debug!("iteration {k}: no admissible candidate left, stopping");
            break;
        }

        for j in identified.iter() {
            qr.push(a, j)?;
        }
        support = support.union(&identified);
        coefficients = qr.coefficients(y)?;
        residual = y.clone();
        for (&j, &c) in qr.columns().iter().zip(&coefficients) {
            residual.axpy(-c, &a.column(j), 1.0);
        }
        residual_norm = residual.norm();

        iterations.push(IterationTrace {
            k,
            preselected,
            identified,
            support: support.clone(),
            residual_norm,
        });
    }

    // Coefficients follow insertion order; re-sort by index.
    let mut pairs: Vec<(usize, f64)> = qr.columns().iter().copied().zip(coefficients).collect();
    pairs.sort_by_key(|&(i, _)| i);
    let estimate = SparseVector {
        n,
        support: pairs.iter().map(|&(i, _)| i).collect(),
        values: pairs.iter().map(|&(_, v)| v).collect(),
    };
    let x_hat = k_sparse_output(&estimate, config.k);

    Ok(RecoveryResult {
        config: *config,
        support_hat: x_hat.support.clone(),
        x_hat,
        iterations,
        converged: reached(residual_norm),
        exact_support_match: None,
        estimate,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{generate, DictionaryKind, DictionarySpec};
    use crate::linalg::{least_squares_on_support, orthogonal_complement_apply};
    use crate::signals::{measure, random_sparse_signal, SparseSignal};
    use itertools::Itertools;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn gaussian(m: usize, n: usize, seed: u64) -> SensingMatrix {
        generate(&DictionarySpec {
            m,
            n,
            kind: DictionaryKind::Gaussian,
            seed,
        })
        .unwrap()
    }

    fn set(v: &[usize]) -> IndexSet {
        v.iter().copied().collect()
    }

    // With Φ = I the correlations are r itself.
    #[test]
    fn preselect_picks_largest_magnitudes() {
        let a = SensingMatrix::identity(3);
        let r = DVector::from_vec(vec![0.1, -0.9, 0.5]);
        assert_eq!(preselect(&a, &r, &IndexSet::empty(), 2).unwrap(), set(&[1, 2]));
        assert_eq!(preselect(&a, &r, &IndexSet::empty(), 3).unwrap(), IndexSet::full(3));
        assert_eq!(preselect(&a, &r, &set(&[1]), 1).unwrap(), set(&[2]));
        assert!(matches!(
            preselect(&a, &r, &set(&[0, 1]), 2),
            Err(Error::NotEnoughCandidates { .. })
        ));
    }

    #[test]
    fn preselect_breaks_ties_toward_smaller_index() {
        let a = SensingMatrix::identity(4);
        let r = DVector::from_vec(vec![0.5, -0.5, 0.5, 0.1]);
        assert_eq!(preselect(&a, &r, &IndexSet::empty(), 2).unwrap(), set(&[0, 1]));
    }

    #[test]
    fn preselect_matches_full_sort() {
        let a = gaussian(8, 16, 21);
        let r = DVector::from_fn(8, |i, _| (i as f64 * 1.3).cos());
        let corr = a.entries().tr_mul(&r);
        let mut order: Vec<usize> = (0..16).collect();
        order.sort_by(|&i, &j| corr[j].abs().partial_cmp(&corr[i].abs()).unwrap());
        let oracle: IndexSet = order[..4].iter().copied().collect();
        assert_eq!(preselect(&a, &r, &IndexSet::empty(), 4).unwrap(), oracle);
    }

    #[test]
    fn identify_with_empty_support_reduces_to_correlation() {
        let a = gaussian(10, 20, 3);
        let y = DVector::from_fn(10, |i, _| (i as f64 - 4.5) * 0.2);
        let candidates = set(&[0, 2, 4, 6, 8, 10, 12]);
        let by_ratio = identify(&a, &y, &IndexSet::empty(), &candidates, 3).unwrap();
        let corr = a.correlations(&y).unwrap();
        let by_corr = preselect_from_correlations(&corr, &candidates.complement(20), 3);
        assert_eq!(by_ratio, by_corr);
    }

    #[test]
    fn identify_single_candidate() {
        let a = gaussian(6, 9, 4);
        let y = DVector::from_element(6, 1.0);
        assert_eq!(
            identify(&a, &y, &set(&[1]), &set(&[5]), 1).unwrap(),
            set(&[5])
        );
    }

    #[test]
    fn identify_matches_residual_minimization_oracle() {
        let a = gaussian(10, 20, 5);
        let y = DVector::from_fn(10, |i, _| ((i * i) as f64 * 0.7).sin());
        let support = set(&[3, 11]);
        let candidates = set(&[0, 4, 7, 9, 15, 19]);
        let r = orthogonal_complement_apply(&a, &support, &y).unwrap();
        let got = identify(&a, &r, &support, &candidates, 2).unwrap();

        let residual_sq = |i: usize| {
            orthogonal_complement_apply(&a, &support.union(&set(&[i])), &y)
                .unwrap()
                .norm_squared()
        };
        let best = candidates
            .iter()
            .combinations(2)
            .min_by(|s, t| {
                let fs: f64 = s.iter().map(|&i| residual_sq(i)).sum();
                let ft: f64 = t.iter().map(|&i| residual_sq(i)).sum();
                fs.partial_cmp(&ft).unwrap()
            })
            .unwrap();
        assert_eq!(got, best.into_iter().collect::<IndexSet>());
    }

    #[test]
    fn identify_skips_columns_inside_the_span() {
        // Column 2 duplicates column 0.
        let m = DMatrix::from_column_slice(
            3,
            4,
            &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.6, 0.8],
        );
        let a = SensingMatrix::new(m).unwrap();
        let y = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let support = set(&[0]);
        let r = orthogonal_complement_apply(&a, &support, &y).unwrap();
        assert_eq!(identify(&a, &r, &support, &set(&[1, 2, 3]), 2).unwrap(), set(&[1, 3]));
        assert!(matches!(
            identify(&a, &r, &support, &set(&[2, 3]), 2),
            Err(Error::DegenerateCandidates { wanted: 2, available: 1 })
        ));
    }

    #[test]
    fn top_k_examples() {
        let (s, v) = top_k_truncate(&[0.1, -5.0, 0.0, 2.0], 2);
        assert_eq!(s, set(&[1, 3]));
        assert_eq!(v, vec![-5.0, 2.0]);
        let (s, v) = top_k_truncate(&[1.0, -1.0, 1.0], 2);
        assert_eq!(s, set(&[0, 1]));
        assert_eq!(v, vec![1.0, -1.0]);
    }

    #[test]
    fn zero_measurements_converge_immediately() {
        let a = gaussian(8, 16, 1);
        let res = run(&a, &DVector::zeros(8), &GreedyConfig::new(Algorithm::M2ols { n: 4, l: 2 }, 3)).unwrap();
        assert!(res.converged);
        assert!(res.iterations.is_empty());
        assert_eq!(res.support_hat.len(), 3);
        assert!(res.x_hat.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn orthonormal_dictionary_recovers_exactly() {
        let a = SensingMatrix::identity(8);
        let x = SparseSignal::new(8, set(&[1, 4, 6]), vec![1.5, -0.3, 2.0]).unwrap();
        let y = measure(&a, &x).unwrap();
        let cfg = GreedyConfig::new(Algorithm::M2ols { n: 4, l: 1 }, 3).with_epsilon(1e-10);
        let res = run(&a, &y, &cfg).unwrap().with_ground_truth(x.support());
        assert!(res.converged);
        assert!(res.iterations.len() <= 3);
        assert_eq!(res.exact_support_match, Some(true));
        assert_eq!(res.x_hat.values, vec![1.5, -0.3, 2.0]);
    }

    #[test]
    fn small_gaussian_instance_matches_exhaustive_best_support() {
        let a = gaussian(20, 40, 7);
        let x = random_sparse_signal(40, 3, 7).unwrap();
        let y = measure(&a, &x).unwrap();
        let cfg = GreedyConfig::new(Algorithm::M2ols { n: 6, l: 2 }, 3);
        let res = run(&a, &y, &cfg).unwrap().with_ground_truth(x.support());

        // Best 3-support by exhaustive least squares.
        let oracle = (0..40)
            .combinations(3)
            .map(|s| {
                let s: IndexSet = s.into_iter().collect();
                let r = orthogonal_complement_apply(&a, &s, &y).unwrap().norm();
                (s, r)
            })
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(&oracle, x.support());
        assert_eq!(res.support_hat, oracle);
        let u = least_squares_on_support(&a, &y, &oracle).unwrap();
        for (got, want) in res.x_hat.values.iter().zip(&u) {
            assert!((got - want).abs() < 1e-8);
        }
        for (got, want) in res.x_hat.values.iter().zip(x.values()) {
            assert!((got - want).abs() < 1e-8);
        }
    }

    #[test]
    fn config_validation() {
        let a = gaussian(12, 30, 1);
        let ok = GreedyConfig::new(Algorithm::M2ols { n: 5, l: 2 }, 4);
        assert!(ok.validate_for(&a).is_ok());
        for bad in [
            GreedyConfig::new(Algorithm::M2ols { n: 2, l: 3 }, 4),
            GreedyConfig::new(Algorithm::M2ols { n: 5, l: 5 }, 4),
            GreedyConfig::new(Algorithm::Mols { l: 0 }, 4),
            GreedyConfig::new(Algorithm::Gomp { n: 0 }, 4),
            GreedyConfig::new(Algorithm::Omp, 0),
            GreedyConfig::new(Algorithm::Omp, 4).with_epsilon(-1.0),
            // 4 indices x 4 iterations > m = 12.
            GreedyConfig::new(Algorithm::Gomp { n: 4 }, 4),
        ] {
            assert!(matches!(bad.validate_for(&a), Err(Error::ConfigInvalid(_))), "{bad:?}");
        }
    }

    #[test]
    fn algorithm_labels_round_trip() {
        for alg in [
            Algorithm::Omp,
            Algorithm::Ols,
            Algorithm::Gomp { n: 3 },
            Algorithm::Mols { l: 2 },
            Algorithm::M2ols { n: 48, l: 3 },
        ] {
            assert_eq!(Algorithm::parse(&alg.to_string()).unwrap(), alg);
        }
        assert!(Algorithm::parse("cosamp").is_err());
        assert!(Algorithm::parse("gomp:x").is_err());
    }

    #[test]
    fn json_shape() {
        let a = gaussian(10, 20, 2);
        let x = random_sparse_signal(20, 2, 2).unwrap();
        let y = measure(&a, &x).unwrap();
        let res = run(&a, &y, &GreedyConfig::new(Algorithm::M2ols { n: 4, l: 1 }, 2)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&res).unwrap();
        assert_eq!(v["algorithm"], "m2ols");
        assert_eq!(v["params"]["N"], 4);
        assert_eq!(v["params"]["L"], 1);
        assert_eq!(v["params"]["K"], 2);
        assert!(v["iterations"][0]["residual_norm"].is_number());
        assert!(v["iterations"][0]["preselected"].is_array());
        assert_eq!(v["x_hat"].as_object().unwrap().len(), 2);
        assert!(v["converged"].is_boolean());
        assert!(v.get("exact_support_match").is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trace_invariants(seed in 0u64..10_000, alg in 0usize..5) {
            let algorithm = [
                Algorithm::Omp,
                Algorithm::Ols,
                Algorithm::Gomp { n: 2 },
                Algorithm::Mols { l: 2 },
                Algorithm::M2ols { n: 5, l: 2 },
            ][alg];
            let a = gaussian(24, 48, seed);
            let x = random_sparse_signal(48, 4, seed).unwrap();
            let y = measure(&a, &x).unwrap();
            let cfg = GreedyConfig::new(algorithm, 4).with_epsilon(0.0);
            let res = run(&a, &y, &cfg).unwrap();

            prop_assert_eq!(res.support_hat.len(), 4);
            prop_assert_eq!(&res.x_hat.support, &res.support_hat);
            let mut prev_support = IndexSet::empty();
            let mut prev_norm = y.norm();
            for t in &res.iterations {
                if !t.preselected.is_empty() {
                    prop_assert!(t.identified.is_subset(&t.preselected));
                }
                prop_assert!(t.identified.is_disjoint(&prev_support));
                prop_assert_eq!(&t.support, &prev_support.union(&t.identified));
                prop_assert!(t.residual_norm <= prev_norm * (1.0 + 1e-12) + 1e-12);
                prev_support = t.support.clone();
                prev_norm = t.residual_norm;
            }
            let corr = a.correlations(&res.residual).unwrap();
            for j in res.final_support().iter() {
                prop_assert!(corr[j].abs() < 1e-8);
            }
        }
    }
}
