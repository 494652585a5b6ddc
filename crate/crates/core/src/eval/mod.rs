//! Map accuracy, trajectory quality and batch success-rate evaluation.

mod accuracy;
mod bench;
mod metrics;

pub use accuracy::{map_accuracy, GroundTruth, MapAccuracyReport, PatchError};
pub use bench::{
    generate_pairs, run_benchmark, write_pairs_csv, write_timings_csv, BenchReport, BenchSummary,
    PairOutcome, PairStatus, PAIRS_CSV_HEADER,
};
pub use metrics::{discrete_curvatures, trajectory_metrics, TrajectoryReport};
