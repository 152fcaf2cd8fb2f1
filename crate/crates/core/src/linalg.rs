//! Dense linear algebra shared by every recovery step.
//!
//! Least squares and projections onto `span(Φ_S)` go through [`ColumnQr`], a
//! thin QR factorization built by Gram-Schmidt with one full
//! reorthogonalization pass per column. The greedy loop keeps one instance alive
//! and appends the newly identified columns each iteration.

use std::fmt;

use nalgebra::{DMatrix, DVector, DVectorView};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column-norm tolerance for [`SensingMatrix`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// An `m x n` real matrix whose columns all have unit l2 norm.
#[derive(Clone, Debug, PartialEq)]
pub struct SensingMatrix {
    entries: DMatrix<f64>,
}

impl SensingMatrix {
    /// Wrap `entries`, checking that they are finite and column-normalized.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        check_shape(&entries)?;
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("matrix has non-finite entries".into()));
        }
        for (j, col) in entries.column_iter().enumerate() {
            let norm = col.norm();
            if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(Error::InvalidSpec(format!(
                    "column {j} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Divide every column by its l2 norm.
    pub fn normalized(mut entries: DMatrix<f64>) -> Result<Self> {
        check_shape(&entries)?;
        for (j, mut col) in entries.column_iter_mut().enumerate() {
            let norm = col.norm();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "column {j} has norm {norm} and cannot be normalized"
                )));
            }
            col /= norm;
        }
        Self::new(entries)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
        }
    }

    /// Number of measurements (rows).
    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    /// Ambient dimension (columns).
    pub fn n(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn column(&self, j: usize) -> DVectorView<'_, f64> {
        self.entries.column(j)
    }

    /// `Φ_S` as an owned matrix, columns in ascending index order.
    pub fn submatrix(&self, support: &IndexSet) -> DMatrix<f64> {
        self.entries.select_columns(support.as_slice())
    }

    /// `Φᵗ v`.
    pub fn correlations(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_measurement_len(v.len())?;
        Ok(self.entries.tr_mul(v))
    }

    /// `Φ_S u_S` for a coefficient vector aligned with `support`.
    pub fn apply_on_support(&self, support: &IndexSet, values: &[f64]) -> Result<DVector<f64>> {
        if support.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "support has {} indices but {} values were given",
                support.len(),
                values.len()
            )));
        }
        support.check_bounds(self.n())?;
        let mut out = DVector::zeros(self.m());
        for (j, &v) in support.iter().zip(values) {
            out.axpy(v, &self.entries.column(j), 1.0);
        }
        Ok(out)
    }

    /// Gram matrix `Φ_Sᵗ Φ_S`.
    pub fn gram(&self, support: &IndexSet) -> DMatrix<f64> {
        let sub = self.submatrix(support);
        sub.tr_mul(&sub)
    }

    /// Rank tolerance for subsets of this matrix: `m · ε · max column norm`,
    /// and the column norms are all 1.
    pub fn rank_tolerance(&self) -> f64 {
        self.m() as f64 * f64::EPSILON
    }

    pub(crate) fn check_measurement_len(&self, len: usize) -> Result<()> {
        if len != self.m() {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {len}, matrix has {} rows",
                self.m()
            )));
        }
        Ok(())
    }
}

fn check_shape(entries: &DMatrix<f64>) -> Result<()> {
    if entries.nrows() == 0 || entries.ncols() == 0 {
        return Err(Error::InvalidSpec(format!(
            "matrix must be non-empty, got {}x{}",
            entries.nrows(),
            entries.ncols()
        )));
    }
    Ok(())
}

/// A sorted set of distinct column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Build from indices already sorted ascending without duplicates.
    pub fn from_sorted(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(format!(
                "index set {indices:?} is not strictly ascending"
            )));
        }
        Ok(Self(indices))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = usize> + Clone + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| other.contains(i)).collect())
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| !other.contains(i))
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Indices in `[0, n)` not in this set.
    pub fn complement(&self, n: usize) -> IndexSet {
        IndexSet((0..n).filter(|&i| !self.contains(i)).collect())
    }

    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&max) if max >= n => Err(Error::DimensionMismatch(format!(
                "index {max} out of bounds for dimension {n}"
            ))),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }
}

impl TryFrom<Vec<usize>> for IndexSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        IndexSet::from_sorted(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

/// Thin QR factorization `Φ_S = Q R` that grows one column at a time.
///
/// Columns are kept in insertion order; `coefficients` returns the least-squares
/// solution in that same order.
#[derive(Clone, Debug)]
pub struct ColumnQr {
    m: usize,
    tolerance: f64,
    basis: Vec<DVector<f64>>,
    // r[j] holds column j of R, entries 0..=j.
    r: Vec<Vec<f64>>,
    columns: Vec<usize>,
}

impl ColumnQr {
    pub fn new(a: &SensingMatrix) -> Self {
        Self {
            m: a.m(),
            tolerance: a.rank_tolerance(),
            basis: Vec::new(),
            r: Vec::new(),
            columns: Vec::new(),
        }
    }

    /// Factorize `Φ_S`, appending columns in ascending index order.
    pub fn for_support(a: &SensingMatrix, support: &IndexSet) -> Result<Self> {
        support.check_bounds(a.n())?;
        if support.len() > a.m() {
            return Err(rank_deficient(support.as_slice()[a.m()], 0.0, a.rank_tolerance()));
        }
        let mut qr = Self::new(a);
        for j in support.iter() {
            qr.push(a, j)?;
        }
        Ok(qr)
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Column indices in insertion order.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// Append column `j` of `a`. Fails without modifying `self` when the
    /// column is numerically inside the current span.
    pub fn push(&mut self, a: &SensingMatrix, j: usize) -> Result<()> {
        if j >= a.n() {
            return Err(Error::DimensionMismatch(format!(
                "column {j} out of bounds for dimension {}",
                a.n()
            )));
        }
        if a.m() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "factorization has {} rows, matrix has {}",
                self.m,
                a.m()
            )));
        }
        let mut w: DVector<f64> = a.column(j).into_owned();
        let mut coeffs = vec![0.0; self.basis.len() + 1];
        for _ in 0..2 {
            for (c, q) in coeffs.iter_mut().zip(&self.basis) {
                let d = q.dot(&w);
                w.axpy(-d, q, 1.0);
                *c += d;
            }
        }
        let norm = w.norm();
        if self.basis.len() >= self.m || norm.is_nan() || norm <= self.tolerance {
            return Err(rank_deficient(j, norm, self.tolerance));
        }
        w /= norm;
        *coeffs.last_mut().expect("nonempty") = norm;
        self.basis.push(w);
        self.r.push(coeffs);
        self.columns.push(j);
        Ok(())
    }

    /// `P⊥_S v`, the component of `v` orthogonal to the factored columns.
    pub fn project_out(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut w = v.clone();
        self.project_out_in_place(&mut w);
        w
    }

    pub(crate) fn project_out_in_place(&self, w: &mut DVector<f64>) {
        for _ in 0..2 {
            for q in &self.basis {
                let d = q.dot(w);
                w.axpy(-d, q, 1.0);
            }
        }
    }

    /// `‖P⊥_S φ_j‖₂`.
    pub fn projected_norm(&self, a: &SensingMatrix, j: usize) -> f64 {
        let mut w = a.column(j).into_owned();
        self.project_out_in_place(&mut w);
        w.norm()
    }

    /// Least-squares coefficients `argmin ‖y − Φ_S u‖`, in insertion order.
    pub fn coefficients(&self, y: &DVector<f64>) -> Result<Vec<f64>> {
        if y.len() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {}, factorization has {} rows",
                y.len(),
                self.m
            )));
        }
        let k = self.basis.len();
        let qty: Vec<f64> = self.basis.iter().map(|q| q.dot(y)).collect();
        let mut x = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = qty[i];
            for (jj, xj) in x.iter().enumerate().skip(i + 1) {
                s -= self.r[jj][i] * xj;
            }
            x[i] = s / self.r[i][i];
        }
        Ok(x)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

fn rank_deficient(column: usize, residual: f64, tolerance: f64) -> Error {
    Error::RankDeficient {
        column,
        residual,
        tolerance,
    }
}

/// Coefficients `u_S` minimizing `‖y − Φ_S u_S‖₂`, aligned with `support`.
pub fn least_squares_on_support(
    a: &SensingMatrix,
    y: &DVector<f64>,
    support: &IndexSet,
) -> Result<Vec<f64>> {
    a.check_measurement_len(y.len())?;
    let qr = ColumnQr::for_support(a, support)?;
    qr.coefficients(y)
}

/// `P⊥_S v = v − Φ_S Φ_S† v`.
pub fn orthogonal_complement_apply(
    a: &SensingMatrix,
    support: &IndexSet,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    a.check_measurement_len(v.len())?;
    let qr = ColumnQr::for_support(a, support)?;
    Ok(qr.project_out(v))
}

/// `‖P⊥_S φ_i‖₂` for each candidate `i`. Candidates inside `span(Φ_S)` give 0.
pub fn projected_column_norms(
    a: &SensingMatrix,
    support: &IndexSet,
    candidates: &IndexSet,
) -> Result<Vec<f64>> {
    candidates.check_bounds(a.n())?;
    if !candidates.is_disjoint(support) {
        return Err(Error::InvalidParams(format!(
            "candidates {candidates} intersect support {support}"
        )));
    }
    let qr = ColumnQr::for_support(a, support)?;
    Ok(candidates.iter().map(|i| qr.projected_norm(a, i)).collect())
}
