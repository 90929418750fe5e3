//! Monte Carlo harness: experiment specifications, paired replications,
//! metrics and CSV/JSON output.

mod metrics;
mod output;
mod run;
mod spec;

pub use metrics::{exact_kl_discrete, kl_between, scaled_mse};
pub use output::{
    render_summary, summary_json, trials_csv, write_outputs, CSV_HEADER, SCHEMA_VERSION,
};
pub use run::{
    mean_sd, prepare_fit, run_experiment, ExperimentOutput, PreparedFit, SummaryRow, SummaryTable,
    TrialResult, TrialStatus,
};
pub use spec::{DensityPolicy, EstimatorKind, EstimatorSpec, ExperimentSpec, Metric, ModelSpec};
