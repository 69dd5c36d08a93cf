//! Planted-truth units: a textured horizontal plane seen by nadir cameras,
//! so the reference depth is one known plane of the sweep everywhere.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skysweep_planesweep::{CameraModel, DepthPlan};
use skysweep_rednet::Resolution;
use skysweep_synthgen::{DepthMap, RgbImage};

use crate::error::{HarnessError, Result};
use crate::sample::Sample;

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedConfig {
    pub width: usize,
    pub height: usize,
    pub views: usize,
    pub depth_samples: usize,
    pub plane_index: usize,
    pub d_min: f64,
    pub interval: f64,
    pub focal: f64,
    /// Camera spacing along +X (meters).
    pub baseline: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            width: 64,
            height: 32,
            views: 3,
            depth_samples: 8,
            plane_index: 3,
            d_min: 16.0,
            interval: 1.5,
            focal: 64.0,
            baseline: 4.0,
            seed: 5,
        }
    }
}

pub struct PlantedUnit {
    pub sample: Sample,
    /// Output pixels whose plane point is seen inside every view, away from borders.
    pub interior: Vec<bool>,
}

/// Multi-octave value noise over the plane, one lattice per channel.
struct Texture {
    lattice: Vec<[f64; 3]>,
    size: usize,
    cell: f64,
}

impl Texture {
    fn new(seed: u64, size: usize, cell: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lattice = (0..size * size).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
        Texture { lattice, size, cell }
    }

    fn value(&self, x: f64, y: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        let mut weight_total = 0.0;
        for (octave, weight) in [(1.0, 0.6), (2.0, 0.3), (4.0, 0.1)] {
            let (u, v) = (x * octave / self.cell, y * octave / self.cell);
            let (i, j) = (u.floor(), v.floor());
            let (fu, fv) = (u - i, v - j);
            let at = |di: i64, dj: i64| {
                let a = (i as i64 + di).rem_euclid(self.size as i64) as usize;
                let b = (j as i64 + dj).rem_euclid(self.size as i64) as usize;
                self.lattice[b * self.size + a]
            };
            let (c00, c10, c01, c11) = (at(0, 0), at(1, 0), at(0, 1), at(1, 1));
            for k in 0..3 {
                let top = c00[k] * (1.0 - fu) + c10[k] * fu;
                let bottom = c01[k] * (1.0 - fu) + c11[k] * fu;
                out[k] += weight * (top * (1.0 - fv) + bottom * fv);
            }
            weight_total += weight;
        }
        out.map(|v| v / weight_total)
    }
}

/// Renders the unit. The reference is the middle camera; all cameras sit
/// at one height, so the plane is at the same depth in every view.
pub fn planted_plane(config: &PlantedConfig, resolution: Resolution) -> Result<PlantedUnit> {
    let c = config;
    if c.views != 3 && c.views != 5 {
        return Err(HarnessError::Contract(format!("views must be 3 or 5, got {}", c.views)));
    }
    if c.plane_index >= c.depth_samples {
        return Err(HarnessError::Contract(format!(
            "plane index {} outside {} samples",
            c.plane_index, c.depth_samples
        )));
    }
    let plan = DepthPlan::new(c.d_min, c.interval, c.depth_samples)?;
    let depth = plan.depth(c.plane_index);
    let altitude = depth + 10.0;
    let reference = c.views / 2;
    let cameras: Vec<CameraModel> = (0..c.views)
        .map(|i| {
            let x = (i as f64 - reference as f64) * c.baseline;
            CameraModel::nadir(c.focal, c.width, c.height, Vector3::new(x, 0.0, altitude))
        })
        .collect::<std::result::Result<_, _>>()?;
    let gsd = depth / c.focal;
    let texture = Texture::new(c.seed, 64, 2.5 * gsd);
    let images: Vec<RgbImage> = cameras
        .iter()
        .map(|cam| -> Result<RgbImage> {
            let mut img = RgbImage::new(c.width, c.height);
            for y in 0..c.height {
                for x in 0..c.width {
                    let p = cam.unproject(x as f64, y as f64, depth)?;
                    let rgb = texture.value(p.x, p.y).map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8);
                    img.set(x, y, rgb);
                }
            }
            Ok(img)
        })
        .collect::<Result<_>>()?;
    let truth = DepthMap::constant(c.width, c.height, depth);
    let refs: Vec<&RgbImage> = images.iter().collect();
    let sample = Sample::new("planted", 0, &refs, &cameras, reference, plan, &truth, resolution)?;

    let out_cam = sample.output_camera()?;
    let (ow, oh) = (sample.truth.width, sample.truth.height);
    let margin = 4.0;
    let mut interior = vec![false; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let p = out_cam.unproject(x as f64, y as f64, depth)?;
            let inside = cameras.iter().all(|cam| match cam.project(&p) {
                Ok((u, v, _)) => {
                    u >= margin && v >= margin && u <= (c.width - 1) as f64 - margin && v <= (c.height - 1) as f64 - margin
                }
                Err(_) => false,
            });
            interior[y * ow + x] = inside;
        }
    }
    Ok(PlantedUnit { sample, interior })
}
