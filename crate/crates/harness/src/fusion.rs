//! Depth maps to a colored point cloud.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use skysweep_planesweep::CameraModel;
use skysweep_synthgen::{DepthMap, RgbImage};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub position: [f64; 3],
    pub color: [u8; 3],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One `X Y Z R G B` line per point.
    pub fn to_xyz(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 48);
        for p in &self.points {
            let [x, y, z] = p.position;
            let [r, g, b] = p.color;
            writeln!(out, "{x:.6} {y:.6} {z:.6} {r} {g} {b}").expect("writing to a string");
        }
        out
    }

    pub fn write_xyz(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
        std::fs::write(path, self.to_xyz()).map_err(|e| HarnessError::io(path, e))
    }
}

/// A depth map with the camera of its pixel grid and colors on that grid.
#[derive(Clone, Copy)]
pub struct FusionView<'a> {
    pub depth: &'a DepthMap,
    pub camera: &'a CameraModel,
    pub image: &'a RgbImage,
}

fn unproject_view(view: &FusionView<'_>) -> Result<Vec<Point>> {
    let d = view.depth;
    if (view.image.width, view.image.height) != (d.width, d.height) {
        return Err(HarnessError::Contract(format!(
            "image {}x{} does not match depth map {}x{}",
            view.image.width, view.image.height, d.width, d.height
        )));
    }
    let mut points = Vec::with_capacity(d.valid_count());
    for y in 0..d.height {
        for x in 0..d.width {
            let Some(z) = d.get(x, y) else { continue };
            let p = view.camera.unproject(x as f64, y as f64, z)?;
            points.push(Point { position: [p.x, p.y, p.z], color: view.image.pixel(x, y) });
        }
    }
    Ok(points)
}

/// Unprojects every valid pixel of every view, in view order then raster
/// order. No filtering or deduplication.
pub fn fuse_points(views: &[FusionView<'_>]) -> Result<PointCloud> {
    let parts: Vec<Vec<Point>> = views.par_iter().map(unproject_view).collect::<Result<_>>()?;
    Ok(PointCloud { points: parts.concat() })
}
