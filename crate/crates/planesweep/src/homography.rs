use nalgebra::{Matrix3, Vector3};

use crate::camera::CameraModel;
use crate::error::{GeometryError, Result};

/// Maps homogeneous reference pixels to source pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography {
    matrix: Matrix3<f64>,
}

impl Homography {
    /// Wraps a matrix, scaling it so the bottom-right entry is ±1 when nonzero.
    /// The scale is positive so the sign of the third coordinate still tells
    /// whether a point lies in front of the source camera.
    pub fn new(matrix: Matrix3<f64>) -> Self {
        let h22 = matrix[(2, 2)].abs();
        let matrix = if h22 != 0.0 { matrix / h22 } else { matrix };
        Homography { matrix }
    }

    pub fn identity() -> Self {
        Homography { matrix: Matrix3::identity() }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Homography { matrix: Matrix3::new(1.0, 0.0, dx, 0.0, 1.0, dy, 0.0, 0.0, 1.0) }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    /// Image of pixel `(u, v)`; `None` when it maps to the plane at infinity
    /// or behind the source camera.
    pub fn apply(&self, u: f64, v: f64) -> Option<(f64, f64)> {
        let p = self.matrix * Vector3::new(u, v, 1.0);
        (p.z > 0.0).then(|| (p.x / p.z, p.y / p.z))
    }

    /// `S H S⁻¹` for coordinates scaled by `s` (feature maps).
    pub fn rescaled(&self, s: f64) -> Self {
        let scale = Matrix3::new(s, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, 1.0);
        let inv = Matrix3::new(1.0 / s, 0.0, 0.0, 0.0, 1.0 / s, 0.0, 0.0, 0.0, 1.0);
        Homography::new(scale * self.matrix * inv)
    }
}

/// Homography induced by the plane at depth `d` in front of `reference`,
/// fronto-parallel to it, from reference pixels to `source` pixels.
///
/// With `t = R_src (C_ref - C_src)` and plane normal `n = (0, 0, 1)` in the
/// reference frame: `H = K_src (R_src R_refᵀ + t nᵀ / d) K_ref⁻¹`.
pub fn sweep_homography(reference: &CameraModel, source: &CameraModel, d: f64) -> Result<Homography> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(GeometryError::Contract(format!("plane depth must be positive, got {d}")));
    }
    let src_in_ref = reference.to_camera(&source.center());
    // det(R_src R_refᵀ + t nᵀ/d) = 1 - z_src/d
    if (1.0 - src_in_ref.z / d).abs() < 1e-12 {
        return Err(GeometryError::Singular(format!("plane at depth {d} passes through the source center")));
    }
    let rel = source.rotation() * reference.rotation().transpose();
    let t = source.rotation() * (reference.center() - source.center());
    let n = Vector3::z();
    let m = source.intrinsics() * (rel + t * n.transpose() / d) * reference.intrinsics_inverse();
    Ok(Homography::new(m))
}
