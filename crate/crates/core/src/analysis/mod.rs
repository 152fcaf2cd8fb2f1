//! Restricted isometry constants, recovery conditions, and numerical checks of
//! the quantities that appear in the m²OLS recovery argument.

pub mod bounds;
pub mod diagnostics;
pub mod lemmas;
pub mod ric;
pub mod theorems;

pub use bounds::{recovery_bound, snr_threshold, RecoveryBound};
pub use diagnostics::{
    diagnose_run, first_iteration_bounds, iteration_diagnostics, FirstIterationBounds,
    ProofDiagnostics,
};
pub use lemmas::{check_lemma_bounds, check_lemma_bounds_up_to, BoundTally, LemmaReport};
pub use ric::{exact_ric, exact_ric_with_budget, sampled_ric_lower_bound, RicEstimate, RicMethod};
pub use theorems::{
    certify_instances, check_noiseless, check_noisy, Certification, TheoremCheckConfig,
    TheoremReport,
};
