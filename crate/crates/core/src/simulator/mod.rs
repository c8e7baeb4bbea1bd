//! Desk-scale reproduction harness: study environments, scripted trials and
//! batches.

mod batch;
mod environment;
mod trial;

pub use batch::{
    run_batch, BatchConfig, BatchError, BatchOutput, SceneKey, SummaryRow, TrialRecord,
    SUMMARY_COLUMNS,
};
pub use environment::{
    diameter_for_angle, generate_environment, EnvKind, Environment, EnvironmentError,
    EnvironmentSpec, BOUNDARY_MARGIN, CENTER_CLEARANCE, EYE, TARGET_ID,
};
pub use trial::{
    effective_config, ready_pointer, run_trial, TrajectoryParams, TrialMode, TrialResult,
    TrialSwitch,
};
