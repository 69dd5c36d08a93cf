//! Disparity maps for rectified same-strip pairs.

use skysweep_planesweep::CameraModel;

use crate::error::{Result, SynthError};
use crate::raster::DepthMap;

const RECTIFIED_TOL: f64 = 1e-9;

/// Per-pixel disparity `u_left - u_right`, `None` where depth is invalid.
#[derive(Clone, Debug, PartialEq)]
pub struct DisparityMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<Option<f64>>,
}

impl DisparityMap {
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        self.values[y * self.width + x]
    }
}

/// Signed baseline along image x of a rectified pair, or a contract error.
pub fn rectified_baseline(left: &CameraModel, right: &CameraModel) -> Result<f64> {
    let rot = (left.rotation() - right.rotation()).abs().max();
    if rot > RECTIFIED_TOL {
        return Err(SynthError::Contract(format!("pair rotations differ by {rot:e}")));
    }
    if left.focal() != right.focal() || left.principal_point() != right.principal_point() {
        return Err(SynthError::Contract("pair intrinsics differ".into()));
    }
    let b = left.rotation() * (right.center() - left.center());
    let off_axis = b.y.abs().max(b.z.abs());
    if !(b.x.abs() > 0.0) || off_axis > RECTIFIED_TOL * b.x.abs().max(1.0) {
        return Err(SynthError::Contract(format!(
            "baseline ({}, {}, {}) is not along image x",
            b.x, b.y, b.z
        )));
    }
    Ok(b.x)
}

/// `f * B / Z` for every valid pixel of the left view's depth map.
pub fn disparity_from_depth(depth: &DepthMap, left: &CameraModel, right: &CameraModel) -> Result<DisparityMap> {
    if depth.width != left.width() || depth.height != left.height() {
        return Err(SynthError::Contract(format!(
            "depth map {}x{} does not match camera {}x{}",
            depth.width,
            depth.height,
            left.width(),
            left.height()
        )));
    }
    let fb = left.focal() * rectified_baseline(left, right)?;
    let values = depth
        .depth
        .iter()
        .zip(&depth.valid)
        .map(|(&z, &ok)| ok.then(|| fb / z))
        .collect();
    Ok(DisparityMap { width: depth.width, height: depth.height, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn pair(f: f64, b: f64) -> (CameraModel, CameraModel) {
        (
            CameraModel::nadir(f, 4, 4, Vector3::new(0.0, 0.0, 100.0)).unwrap(),
            CameraModel::nadir(f, 4, 4, Vector3::new(b, 0.0, 100.0)).unwrap(),
        )
    }

    #[test]
    fn closed_form() {
        let (l, r) = pair(1000.0, 10.0);
        let d = disparity_from_depth(&DepthMap::constant(4, 4, 100.0), &l, &r).unwrap();
        assert!((d.get(1, 2).unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn far_depth_gives_near_zero() {
        let (l, r) = pair(1000.0, 10.0);
        let d = disparity_from_depth(&DepthMap::constant(4, 4, 1e9), &l, &r).unwrap();
        assert!(d.get(0, 0).unwrap().abs() < 1e-4);
    }

    #[test]
    fn invalid_stays_invalid() {
        let (l, r) = pair(1000.0, 10.0);
        let d = disparity_from_depth(&DepthMap::invalid(4, 4), &l, &r).unwrap();
        assert!(d.values.iter().all(Option::is_none));
    }

    #[test]
    fn non_rectified_pairs_are_rejected() {
        let l = CameraModel::nadir(1000.0, 4, 4, Vector3::new(0.0, 0.0, 100.0)).unwrap();
        let r = CameraModel::nadir(1000.0, 4, 4, Vector3::new(10.0, 1.0, 100.0)).unwrap();
        assert!(disparity_from_depth(&DepthMap::constant(4, 4, 50.0), &l, &r).is_err());
        let tilted = CameraModel::new(
            1000.0,
            1.5,
            1.5,
            4,
            4,
            Vector3::new(10.0, 0.0, 100.0),
            skysweep_planesweep::rotation_from_angles(0.01, 0.0, 0.0),
        )
        .unwrap();
        assert!(disparity_from_depth(&DepthMap::constant(4, 4, 50.0), &l, &tilted).is_err());
    }
}
