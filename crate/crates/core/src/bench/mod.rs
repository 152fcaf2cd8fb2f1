//! Monte-Carlo recovery sweeps over random dictionaries and signals.

pub mod emit;
pub mod flops;
pub mod run;
pub mod spec;

pub use emit::{emit, emit_to_path, to_csv_string, to_json_string, write_csv, Format, CSV_HEADER};
pub use flops::flop_estimate;
pub use run::{
    iteration_cap, run_experiment, run_experiment_with_threads, score_instance, ExperimentRecord,
    TrialOutcome,
};
pub use spec::{default_measurement_grid, ExperimentSpec, Sweep};
