//! Multi-view depth network with a recurrent encoder-decoder over the
//! depth sequence.
//!
//! Features are extracted once per view with shared weights. For each depth
//! plane, non-reference features are warped into the reference view, their
//! variance forms a cost map, and a four-scale encoder-decoder with one
//! gated recurrent cell per scale regularizes it while carrying state to the
//! next plane. Inference keeps only one plane's intermediates alive, so
//! memory does not grow with the number of planes.

pub mod config;
pub mod error;
pub mod features;
pub mod forward;
pub mod gru;
pub mod input;
pub mod params;
pub mod red;
pub mod select;
pub mod variance;

pub use config::{NetConfig, Resolution};
pub use error::{ModelError, Result};
pub use features::extract_features;
pub use forward::{depth_loss, depth_targets, forward_train, forward_volume, subsample_ground_truth, ProbabilityVolume};
pub use gru::conv_gru_step;
pub use input::{normalize_image, UnitInput};
pub use params::RedNet;
pub use red::{red_regularize_step, GruStates};
pub use select::{infer_depth, selector, selectors, DepthEstimate, DepthSelector};
pub use variance::aggregate_variance;
