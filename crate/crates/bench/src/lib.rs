//! Seeded fixtures shared by the criterion benchmarks.

use m2ols_core::dictionary::generate;
use m2ols_core::signals::{measure, random_sparse_signal};
use m2ols_core::{DictionaryKind, DictionarySpec, SensingMatrix, SparseSignal};
use nalgebra::DVector;

/// One noiseless recovery problem.
pub struct Instance {
    pub a: SensingMatrix,
    pub x: SparseSignal,
    pub y: DVector<f64>,
}

/// Matrix with offset `t` (0 for Gaussian), a `k`-sparse Gaussian signal and `y = A x`.
pub fn instance(m: usize, n: usize, k: usize, t: f64, seed: u64) -> Instance {
    let a = generate(&DictionarySpec {
        m,
        n,
        kind: DictionaryKind::with_offset(t),
        seed,
    })
    .expect("valid dictionary spec");
    let x = random_sparse_signal(n, k, seed.wrapping_add(1)).expect("valid sparsity");
    let y = measure(&a, &x).expect("matching dimensions");
    Instance { a, x, y }
}
