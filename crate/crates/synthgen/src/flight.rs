//! Nadir flight planning on a regular strip grid.
//!
//! Strips run along world +X (the image width axis, which is the flight
//! direction); strips are stacked along world +Y. All cameras share the
//! rotation of angles `(0, 0, 0)`, so neighbours in a strip form rectified
//! pairs with a baseline along image x.

use nalgebra::Vector3;
use skysweep_planesweep::CameraModel;

use crate::error::{Result, SynthError};
use crate::scene::SceneModel;

#[derive(Clone, Debug, PartialEq)]
pub struct FlightConfig {
    pub image_width: usize,
    pub image_height: usize,
    pub focal: f64,
    /// Flying height above the mean ground elevation (meters).
    pub flying_height: f64,
    pub heading_overlap: f64,
    pub side_overlap: f64,
    pub strips: usize,
    pub images_per_strip: usize,
}

impl Default for FlightConfig {
    fn default() -> Self {
        FlightConfig {
            image_width: 512,
            image_height: 256,
            focal: 640.0,
            flying_height: 64.0,
            heading_overlap: 0.9,
            side_overlap: 0.8,
            strips: 3,
            images_per_strip: 8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlightPlan {
    pub config: FlightConfig,
    pub along_spacing: f64,
    pub across_spacing: f64,
    cameras: Vec<CameraModel>,
}

impl FlightPlan {
    pub fn strips(&self) -> usize {
        self.config.strips
    }

    pub fn images_per_strip(&self) -> usize {
        self.config.images_per_strip
    }

    pub fn camera(&self, strip: usize, index: usize) -> &CameraModel {
        &self.cameras[strip * self.config.images_per_strip + index]
    }

    /// Cameras in strip-major order.
    pub fn cameras(&self) -> &[CameraModel] {
        &self.cameras
    }
}

/// Distance between exposures for a footprint length and an overlap fraction.
pub fn exposure_spacing(footprint: f64, overlap: f64) -> Result<f64> {
    if !(overlap > 0.0 && overlap < 1.0) {
        return Err(SynthError::Contract(format!("overlap must lie in (0, 1), got {overlap}")));
    }
    Ok(footprint * (1.0 - overlap))
}

/// Places a nadir camera grid centred over the scene.
pub fn plan_flight(scene: &SceneModel, config: &FlightConfig) -> Result<FlightPlan> {
    if config.strips == 0 || config.images_per_strip == 0 {
        return Err(SynthError::Contract("flight needs at least one strip and one image".into()));
    }
    let ground = scene.mean_ground();
    let altitude = ground + config.flying_height;
    if !(altitude > scene.max_elevation()) {
        return Err(SynthError::Contract(format!(
            "flying altitude {altitude} m does not clear the highest surface at {} m",
            scene.max_elevation()
        )));
    }
    let gsd = config.flying_height / config.focal;
    let along = exposure_spacing(config.image_width as f64 * gsd, config.heading_overlap)?;
    let across = exposure_spacing(config.image_height as f64 * gsd, config.side_overlap)?;
    let sc = scene.config();
    let x_start = sc.extent_x / 2.0 - along * (config.images_per_strip - 1) as f64 / 2.0;
    let y_start = sc.extent_y / 2.0 - across * (config.strips - 1) as f64 / 2.0;
    let mut cameras = Vec::with_capacity(config.strips * config.images_per_strip);
    for s in 0..config.strips {
        for i in 0..config.images_per_strip {
            let center = Vector3::new(x_start + i as f64 * along, y_start + s as f64 * across, altitude);
            cameras.push(CameraModel::nadir(config.focal, config.image_width, config.image_height, center)?);
        }
    }
    Ok(FlightPlan { config: config.clone(), along_spacing: along, across_spacing: across, cameras })
}
