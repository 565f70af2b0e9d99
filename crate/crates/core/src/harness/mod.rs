//! Training and evaluation orchestration.

mod ablate;
mod config;
mod metrics;
mod train;

pub use ablate::{ablate, AblationCell, AblationGrid, ABLATION_HEADER};
pub use config::{Algorithm, RunConfig};
pub use metrics::{read_metrics, steps_to_fraction, MetricsRow, METRICS_HEADER};
pub use train::{evaluate, evaluate_random_policy, evaluate_with_beam, train, TrainOutcome};
