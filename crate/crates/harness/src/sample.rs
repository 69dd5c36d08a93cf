//! Network-ready samples built from dataset tiles.

use skysweep_planesweep::{CameraModel, DepthPlan};
use skysweep_rednet::{subsample_ground_truth, Resolution, UnitInput};
use skysweep_synthgen::{DepthMap, RgbImage, SubUnit};

use crate::error::{HarnessError, Result};

/// One multi-view unit with its reference-view ground truth on the
/// network's output grid.
#[derive(Clone)]
pub struct Sample {
    /// `<unit>/<tile>` for logs and output paths.
    pub name: String,
    pub unit: String,
    pub tile: usize,
    /// Index of the reference among the views.
    pub reference: usize,
    pub input: UnitInput<f32>,
    pub plan: DepthPlan,
    pub reference_image: RgbImage,
    pub reference_camera: CameraModel,
    /// Ground truth at output resolution.
    pub truth: DepthMap,
    pub resolution: Resolution,
}

impl Sample {
    /// `images[0..]` in view-ID order; `reference` indexes into them.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        unit: &str,
        tile: usize,
        images: &[&RgbImage],
        cameras: &[CameraModel],
        reference: usize,
        plan: DepthPlan,
        truth: &DepthMap,
        resolution: Resolution,
    ) -> Result<Self> {
        let pairs: Vec<(&[u8], &CameraModel)> = images.iter().map(|i| i.data.as_slice()).zip(cameras).collect();
        let input = UnitInput::from_rgb(&pairs, reference)?;
        let r = images[reference];
        if (truth.width, truth.height) != (r.width, r.height) {
            return Err(HarnessError::Contract(format!(
                "ground truth {}x{} does not match reference image {}x{}",
                truth.width, truth.height, r.width, r.height
            )));
        }
        let factor = (1.0 / resolution.output_scale()).round() as usize;
        let (depth, valid) = subsample_ground_truth(&truth.depth, &truth.valid, r.width, r.height, factor);
        let truth = DepthMap { width: r.width / factor, height: r.height / factor, depth, valid };
        Ok(Sample {
            name: format!("{unit}/{tile:03}"),
            unit: unit.to_string(),
            tile,
            reference,
            input,
            plan,
            reference_image: r.clone(),
            reference_camera: cameras[reference].clone(),
            truth,
            resolution,
        })
    }

    /// From a dataset tile; the tile's depth plan is resampled to
    /// `depth_samples` planes over the same span.
    pub fn from_subunit(sub: &SubUnit, depth_samples: usize, resolution: Resolution) -> Result<Self> {
        let reference = 1;
        let images: Vec<&RgbImage> = sub.views.iter().map(|v| &v.image).collect();
        let cameras: Vec<CameraModel> = sub.views.iter().map(|v| v.camera.clone()).collect();
        let r = &sub.views[reference];
        let plan = r.plan.resampled(depth_samples)?;
        Self::new(&sub.unit_name(), sub.tile, &images, &cameras, reference, plan, &r.depth, resolution)
    }

    /// Camera of the output grid, whose pixel `(x, y)` is image pixel
    /// `(x, y) / output_scale`.
    pub fn output_camera(&self) -> Result<CameraModel> {
        let s = self.resolution.output_scale();
        if s == 1.0 {
            return Ok(self.reference_camera.clone());
        }
        Ok(self.reference_camera.scaled(s, self.truth.width, self.truth.height)?)
    }

    /// Reference colors sampled on the output grid.
    pub fn output_image(&self) -> RgbImage {
        let factor = (1.0 / self.resolution.output_scale()).round() as usize;
        let (w, h) = (self.truth.width, self.truth.height);
        let mut out = RgbImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                out.set(x, y, self.reference_image.pixel(factor * x, factor * y));
            }
        }
        out
    }
}
