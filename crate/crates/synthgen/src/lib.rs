//! Procedural aerial multi-view stereo datasets.
//!
//! A textured point-sampled scene is flown with a nadir strip camera grid,
//! rendered by z-buffer projection into images with complete depth maps,
//! grouped into 3- or 5-view units, tiled and written to disk.

pub mod dataset;
pub mod disparity;
pub mod error;
pub mod flight;
pub mod raster;
pub mod render;
pub mod scene;
pub mod units;

pub use dataset::{generate, read_dataset, write_dataset, Dataset, GenConfig, Generated};
pub use disparity::{disparity_from_depth, DisparityMap};
pub use error::{Result, SynthError};
pub use flight::{plan_flight, FlightConfig, FlightPlan};
pub use raster::{DepthMap, RgbImage};
pub use render::{render_view, ViewRecord};
pub use scene::{build_scene, SceneConfig, SceneModel};
pub use units::{crop_units, make_units, MultiViewUnit, Split, SubUnit, TileView};
