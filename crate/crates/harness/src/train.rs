//! RMSProp training over dataset samples.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skysweep_diffcore::optim::rmsprop_step;
use skysweep_diffcore::{backward, checkpoint, ParamStore, Tape};
use skysweep_rednet::{depth_loss, forward_train, NetConfig, RedNet};
use skysweep_synthgen::{read_dataset, Split};

use crate::config::{TrainConfig, RMSPROP_EPSILON, RMSPROP_RHO};
use crate::error::{HarnessError, Result};
use crate::sample::Sample;

pub const LOSS_LOG_HEADER: &str = "iter,lr,loss";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossRecord {
    pub iteration: usize,
    pub learning_rate: f64,
    pub loss: f64,
}

impl LossRecord {
    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.iteration, self.learning_rate, self.loss)
    }
}

/// Network, parameters and the iteration counter that drives the schedule.
pub struct Trainer {
    pub config: TrainConfig,
    pub net: RedNet,
    pub store: ParamStore<f32>,
    pub iteration: usize,
}

impl Trainer {
    /// Fresh parameters seeded from the configuration.
    pub fn new(config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let (net, store) = RedNet::init(NetConfig { resolution: config.resolution }, config.seed)?;
        Ok(Trainer { config, net, store, iteration: 0 })
    }

    /// One forward, loss, backward and RMSProp update.
    pub fn step(&mut self, sample: &Sample) -> Result<LossRecord> {
        if sample.resolution != self.config.resolution {
            return Err(HarnessError::Contract(format!(
                "sample {} prepared for {} resolution, trainer uses {}",
                sample.name,
                sample.resolution.name(),
                self.config.resolution.name()
            )));
        }
        let lr = self.config.learning_rate_at(self.iteration);
        let tape = Tape::new();
        let volume = forward_train(&tape, &self.net, &self.store, &sample.input, &sample.plan)?;
        let loss = depth_loss(&tape, &volume, &sample.truth.depth, &sample.truth.valid, &sample.plan)?;
        let value = loss.value().item() as f64;
        if !value.is_finite() {
            return Err(HarnessError::Numeric(format!("loss is {value} at iteration {} on {}", self.iteration, sample.name)));
        }
        drop(volume);
        backward(&tape, &loss, &mut self.store)?;
        rmsprop_step(&mut self.store, lr, RMSPROP_RHO, RMSPROP_EPSILON);
        let record = LossRecord { iteration: self.iteration, learning_rate: lr, loss: value };
        self.iteration += 1;
        Ok(record)
    }

    /// Runs `epochs` passes over `samples` in a seeded shuffled order,
    /// stopping early at `max_iterations`. `on_epoch` sees each finished epoch.
    pub fn run(
        &mut self,
        samples: &[Sample],
        mut on_step: impl FnMut(&LossRecord) -> Result<()>,
        mut on_epoch: impl FnMut(usize, &Trainer) -> Result<()>,
    ) -> Result<()> {
        if samples.is_empty() {
            return Err(HarnessError::Degenerate("no training samples".into()));
        }
        for epoch in 0..self.config.epochs {
            let mut order: Vec<usize> = (0..samples.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed.wrapping_mul(1_000_003).wrapping_add(epoch as u64));
            order.shuffle(&mut rng);
            for i in order {
                if self.config.max_iterations.is_some_and(|m| self.iteration >= m) {
                    return on_epoch(epoch + 1, self);
                }
                let record = self.step(&samples[i])?;
                on_step(&record)?;
            }
            on_epoch(epoch + 1, self)?;
        }
        Ok(())
    }
}

pub fn save_checkpoint(store: &ParamStore<f32>, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    checkpoint::save(store, path).map_err(|e| HarnessError::format(path, e.to_string()))
}

pub fn load_checkpoint(path: &Path) -> Result<ParamStore<f32>> {
    if !path.exists() {
        return Err(HarnessError::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "checkpoint not found")));
    }
    checkpoint::load(path).map_err(|e| HarnessError::format(path, e.to_string()))
}

/// `model.ckpt` -> `model.epoch2.ckpt`.
pub fn epoch_checkpoint_path(path: &Path, epoch: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.epoch{epoch}.{}", ext.to_string_lossy()),
        None => format!("{stem}.epoch{epoch}"),
    };
    path.with_file_name(name)
}

/// Loads the training split of the dataset into samples.
pub fn load_training_samples(config: &TrainConfig) -> Result<Vec<Sample>> {
    let dataset = read_dataset(&config.dataset)?;
    if dataset.views != config.views {
        return Err(HarnessError::Contract(format!(
            "dataset {} has {}-view units, configuration expects {}",
            config.dataset.display(),
            dataset.views,
            config.views
        )));
    }
    dataset
        .split(Split::Train)
        .map(|s| Sample::from_subunit(s, config.depth_samples, config.resolution))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSummary {
    pub iterations: usize,
    pub samples: usize,
    pub final_loss: f64,
}

/// Trains on the dataset's training split, writing the loss log as it goes
/// and a checkpoint after every epoch (`checkpoint` always holds the latest).
pub fn train(config: &TrainConfig) -> Result<TrainSummary> {
    config.validate()?;
    let samples = load_training_samples(config)?;
    let mut trainer = Trainer::new(config.clone())?;
    if let Some(dir) = config.loss_log.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let log_path = &config.loss_log;
    let mut log = fs::File::create(log_path).map_err(|e| HarnessError::io(log_path, e))?;
    writeln!(log, "{LOSS_LOG_HEADER}").map_err(|e| HarnessError::io(log_path, e))?;
    let mut final_loss = f64::NAN;
    trainer.run(
        &samples,
        |r| {
            final_loss = r.loss;
            writeln!(log, "{}", r.csv_row()).map_err(|e| HarnessError::io(log_path, e))
        },
        |epoch, t| {
            save_checkpoint(&t.store, &epoch_checkpoint_path(&config.checkpoint, epoch))?;
            save_checkpoint(&t.store, &config.checkpoint)
        },
    )?;
    log.flush().map_err(|e| HarnessError::io(log_path, e))?;
    Ok(TrainSummary { iterations: trainer.iteration, samples: samples.len(), final_loss })
}
