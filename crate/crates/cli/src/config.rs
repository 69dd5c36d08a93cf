//! TOML run configuration shared by every subcommand.
//!
//! Every field is optional; the defaults below are the desk-scale settings.
//! Unknown keys are rejected, and relative paths are resolved against the
//! directory holding the configuration file.
//!
//! ```toml
//! seed = 1                  # drives the scene, the tile splits and training
//!
//! [dataset]
//! root = "dataset"          # where `gen` writes and `train`/`infer` read
//! views = 3                 # images per multi-view unit, 3 or 5
//! interval = 0.15           # depth interval of the per-view plans (m)
//! tile_width = 256
//! tile_height = 128
//!
//! [scene]
//! extent_x = 96.0           # meters
//! extent_y = 44.0
//! grid_spacing = 0.05       # point spacing of the scene raster (m)
//! base_elevation = 0.0
//! slope = 0.04              # rise per meter east of the middle
//! undulation = 0.5          # amplitude of the ground undulation (m)
//! buildings = 14
//! building_height = [2.0, 8.0]
//! building_size = [4.0, 12.0]
//!
//! [flight]
//! image_width = 512
//! image_height = 256
//! focal = 640.0             # pixels
//! flying_height = 64.0      # meters above the base elevation
//! heading_overlap = 0.9
//! side_overlap = 0.8
//! strips = 3
//! images_per_strip = 8
//!
//! [train]
//! learning_rate = 0.001
//! decay = 0.9               # applied once per decay_period iterations
//! decay_period = 500
//! epochs = 3
//! depth_samples = 32        # D, planes per sweep
//! resolution = "full"       # or "quarter"
//! max_iterations = 0        # 0 means no cap
//! checkpoint = "model.ckpt"
//! loss_log = "loss.csv"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use skysweep_harness::TrainConfig;
use skysweep_rednet::Resolution;
use skysweep_synthgen::{FlightConfig, GenConfig, SceneConfig};

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub dataset: DatasetSection,
    pub scene: SceneSection,
    pub flight: FlightSection,
    pub train: TrainSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            dataset: DatasetSection::default(),
            scene: SceneSection::default(),
            flight: FlightSection::default(),
            train: TrainSection::default(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub root: PathBuf,
    pub views: usize,
    pub interval: f64,
    pub tile_width: usize,
    pub tile_height: usize,
}

impl Default for DatasetSection {
    fn default() -> Self {
        let g = GenConfig::default();
        DatasetSection {
            root: PathBuf::from("dataset"),
            views: g.views,
            interval: g.interval,
            tile_width: g.tile_width,
            tile_height: g.tile_height,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSection {
    pub extent_x: f64,
    pub extent_y: f64,
    pub grid_spacing: f64,
    pub base_elevation: f64,
    pub slope: f64,
    pub undulation: f64,
    pub buildings: usize,
    pub building_height: (f64, f64),
    pub building_size: (f64, f64),
}

impl Default for SceneSection {
    fn default() -> Self {
        let s = SceneConfig::default();
        SceneSection {
            extent_x: s.extent_x,
            extent_y: s.extent_y,
            grid_spacing: s.grid_spacing,
            base_elevation: s.base_elevation,
            slope: s.slope,
            undulation: s.undulation,
            buildings: s.buildings,
            building_height: s.building_height,
            building_size: s.building_size,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FlightSection {
    pub image_width: usize,
    pub image_height: usize,
    pub focal: f64,
    pub flying_height: f64,
    pub heading_overlap: f64,
    pub side_overlap: f64,
    pub strips: usize,
    pub images_per_strip: usize,
}

impl Default for FlightSection {
    fn default() -> Self {
        let f = FlightConfig::default();
        FlightSection {
            image_width: f.image_width,
            image_height: f.image_height,
            focal: f.focal,
            flying_height: f.flying_height,
            heading_overlap: f.heading_overlap,
            side_overlap: f.side_overlap,
            strips: f.strips,
            images_per_strip: f.images_per_strip,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub decay: f64,
    pub decay_period: usize,
    pub epochs: usize,
    pub depth_samples: usize,
    pub resolution: String,
    pub max_iterations: usize,
    pub checkpoint: PathBuf,
    pub loss_log: PathBuf,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            learning_rate: t.learning_rate,
            decay: t.decay,
            decay_period: t.decay_period,
            epochs: t.epochs,
            depth_samples: t.depth_samples,
            resolution: t.resolution.name().to_string(),
            max_iterations: 0,
            checkpoint: t.checkpoint,
            loss_log: t.loss_log,
        }
    }
}

impl RunConfig {
    /// Parses `text`; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        for p in [&mut config.dataset.root, &mut config.train.checkpoint, &mut config.train.loss_log] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        config.resolution()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::from_io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn resolution(&self) -> Result<Resolution, CliError> {
        Resolution::parse(&self.train.resolution).ok_or_else(|| {
            CliError::Config(format!("train.resolution must be \"full\" or \"quarter\", got {:?}", self.train.resolution))
        })
    }

    pub fn gen_config(&self) -> GenConfig {
        let (s, f, d) = (&self.scene, &self.flight, &self.dataset);
        GenConfig {
            scene: SceneConfig {
                extent_x: s.extent_x,
                extent_y: s.extent_y,
                grid_spacing: s.grid_spacing,
                base_elevation: s.base_elevation,
                slope: s.slope,
                undulation: s.undulation,
                buildings: s.buildings,
                building_height: s.building_height,
                building_size: s.building_size,
                seed: self.seed,
            },
            flight: FlightConfig {
                image_width: f.image_width,
                image_height: f.image_height,
                focal: f.focal,
                flying_height: f.flying_height,
                heading_overlap: f.heading_overlap,
                side_overlap: f.side_overlap,
                strips: f.strips,
                images_per_strip: f.images_per_strip,
            },
            views: d.views,
            tile_width: d.tile_width,
            tile_height: d.tile_height,
            interval: d.interval,
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig, CliError> {
        let t = &self.train;
        Ok(TrainConfig {
            learning_rate: t.learning_rate,
            decay: t.decay,
            decay_period: t.decay_period,
            epochs: t.epochs,
            views: self.dataset.views,
            depth_samples: t.depth_samples,
            resolution: self.resolution()?,
            seed: self.seed,
            max_iterations: (t.max_iterations > 0).then_some(t.max_iterations),
            dataset: self.dataset.root.clone(),
            checkpoint: t.checkpoint.clone(),
            loss_log: t.loss_log.clone(),
        })
    }
}
