//! Greedy sparse recovery with RIP-based guarantees.
//!
//! The crate implements OMP, OLS, gOMP, mOLS and m²OLS (gOMP preselection
//! followed by mOLS identification) over one shared iteration skeleton, plus
//! the tooling needed to check their recovery guarantees numerically: exact
//! and sampled restricted isometry constants, the noiseless and noisy recovery
//! bounds, per-iteration proof quantities, and a deterministic Monte-Carlo
//! harness for recovery-probability sweeps.

pub mod analysis;
pub mod bench;
pub mod dictionary;
pub mod error;
pub mod greedy;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod signals;

pub use analysis::{ProofDiagnostics, RicEstimate};
pub use bench::{ExperimentRecord, ExperimentSpec, Sweep};
pub use dictionary::{DictionaryKind, DictionarySpec};
pub use error::{Error, Result};
pub use greedy::{Algorithm, GreedyConfig, IterationTrace, RecoveryResult};
pub use linalg::{IndexSet, SensingMatrix};
pub use signals::{SparseSignal, SparseVector};
