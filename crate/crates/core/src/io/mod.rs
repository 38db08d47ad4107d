//! Scenarios, run manifests, experiment drivers and CSV datasets.

pub mod manifest;
pub mod output;
pub mod runs;
pub mod scenario;
pub mod validate;

pub use manifest::{Method, MethodOverride, Outputs, RunManifest, SamplingBox, OUTPUT_DIR_ENV};
pub use output::{CsvWriter, Dataset, Metadata, VERSION};
pub use runs::{
    benchmark, reference_states, run_benchmark, run_flow_field, run_propagation, run_reference, run_trajectories,
    write_results, BenchmarkRow, JobResult, MethodSeries, ReferenceRun,
};
pub use scenario::{load_table_i, InitialState, Scenario, TableRow};
pub use validate::{validate_suite, Check};
