//! Training, evaluation, point-cloud fusion and instrumentation around the
//! depth network.

pub mod config;
pub mod error;
pub mod fusion;
pub mod gradcheck;
pub mod measure;
pub mod metrics;
pub mod planted;
pub mod predict;
pub mod sample;
pub mod train;

pub use config::TrainConfig;
pub use error::{HarnessError, Result};
pub use fusion::{fuse_points, FusionView, Point, PointCloud};
pub use gradcheck::{registry, run_suite, CaseOutcome, GradCase};
pub use measure::{measure_run, Measurement};
pub use metrics::{evaluate_depth, MetricsAccumulator, MetricsReport, METRICS_HEADER};
pub use planted::{planted_plane, PlantedConfig, PlantedUnit};
pub use predict::{evaluate_dirs, fuse_dir, predict_sample, write_prediction, Prediction};
pub use sample::Sample;
pub use train::{train, LossRecord, TrainSummary, Trainer, LOSS_LOG_HEADER};
