//! Training configuration and learning-rate schedule.

use std::path::PathBuf;

use skysweep_rednet::Resolution;

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Multiplier applied once per `decay_period` iterations.
    pub decay: f64,
    pub decay_period: usize,
    pub epochs: usize,
    pub views: usize,
    pub depth_samples: usize,
    pub resolution: Resolution,
    pub seed: u64,
    /// Stops after this many iterations even if epochs remain.
    pub max_iterations: Option<usize>,
    pub dataset: PathBuf,
    pub checkpoint: PathBuf,
    pub loss_log: PathBuf,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            decay: 0.9,
            decay_period: 500,
            epochs: 3,
            views: 3,
            depth_samples: 32,
            resolution: Resolution::Full,
            seed: 1,
            max_iterations: None,
            dataset: PathBuf::from("dataset"),
            checkpoint: PathBuf::from("model.ckpt"),
            loss_log: PathBuf::from("loss.csv"),
        }
    }
}

/// RMSProp smoothing constant and denominator guard.
pub const RMSPROP_RHO: f64 = 0.9;
pub const RMSPROP_EPSILON: f64 = 1e-8;

impl TrainConfig {
    /// Full-scale schedule: decay every 5000 iterations.
    pub fn full_scale() -> Self {
        TrainConfig { decay_period: 5000, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HarnessError::Contract(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return fail(format!("decay must be in (0, 1], got {}", self.decay));
        }
        if self.decay_period == 0 {
            return fail("decay period must be positive".into());
        }
        if self.views != 3 && self.views != 5 {
            return fail(format!("views must be 3 or 5, got {}", self.views));
        }
        if self.depth_samples < 2 {
            return fail(format!("need at least 2 depth samples, got {}", self.depth_samples));
        }
        Ok(())
    }

    /// Learning rate in effect at zero-based `iteration`.
    pub fn learning_rate_at(&self, iteration: usize) -> f64 {
        self.learning_rate * self.decay.powi((iteration / self.decay_period) as i32)
    }
}
