//! Pinhole camera with exterior orientation.
//!
//! Conventions: image x to the right, y down, camera z forward
//! (right-handed). `rotation` maps world vectors into the camera frame, so a
//! point `X` has camera coordinates `R (X - C)`. Pixel centers sit at
//! integer coordinates.

use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};

use crate::error::{GeometryError, Result};
use crate::plan::DepthPlan;

const ORTHONORMAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CameraModel {
    focal: f64,
    x0: f64,
    y0: f64,
    width: usize,
    height: usize,
    center: Vector3<f64>,
    rotation: Matrix3<f64>,
}

/// World-to-camera rotation from photogrammetric angles (radians).
///
/// The camera-to-world attitude is `R_y(phi) R_x(omega) R_z(kappa)` applied to
/// a nadir-looking camera, so `(0, 0, 0)` looks straight down with image x
/// along world +X and image y along world -Y.
pub fn rotation_from_angles(phi: f64, omega: f64, kappa: f64) -> Matrix3<f64> {
    let (sp, cp) = phi.sin_cos();
    let (so, co) = omega.sin_cos();
    let (sk, ck) = kappa.sin_cos();
    let r_phi = Matrix3::new(cp, 0.0, sp, 0.0, 1.0, 0.0, -sp, 0.0, cp);
    let r_omega = Matrix3::new(1.0, 0.0, 0.0, 0.0, co, -so, 0.0, so, co);
    let r_kappa = Matrix3::new(ck, -sk, 0.0, sk, ck, 0.0, 0.0, 0.0, 1.0);
    let attitude = r_phi * r_omega * r_kappa;
    nadir_flip() * attitude.transpose()
}

fn nadir_flip() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0))
}

impl CameraModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        focal: f64,
        x0: f64,
        y0: f64,
        width: usize,
        height: usize,
        center: Vector3<f64>,
        rotation: Matrix3<f64>,
    ) -> Result<Self> {
        if !(focal > 0.0 && focal.is_finite()) {
            return Err(GeometryError::Contract(format!("focal length must be positive, got {focal}")));
        }
        if width == 0 || height == 0 {
            return Err(GeometryError::Contract(format!("image size {width}x{height}")));
        }
        let defect = (rotation * rotation.transpose() - Matrix3::identity()).abs().max();
        if !(defect < ORTHONORMAL_TOL) {
            return Err(GeometryError::Contract(format!("rotation is not orthonormal (defect {defect:e})")));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() >= ORTHONORMAL_TOL {
            return Err(GeometryError::Contract(format!("rotation determinant {det} != 1")));
        }
        if !(x0.is_finite() && y0.is_finite() && center.iter().all(|v| v.is_finite())) {
            return Err(GeometryError::Contract("non-finite camera parameter".into()));
        }
        Ok(CameraModel { focal, x0, y0, width, height, center, rotation })
    }

    /// Nadir camera with angles `(0, 0, 0)` and the principal point at the image center.
    pub fn nadir(focal: f64, width: usize, height: usize, center: Vector3<f64>) -> Result<Self> {
        let x0 = (width as f64 - 1.0) / 2.0;
        let y0 = (height as f64 - 1.0) / 2.0;
        Self::new(focal, x0, y0, width, height, center, rotation_from_angles(0.0, 0.0, 0.0))
    }

    pub fn focal(&self) -> f64 {
        self.focal
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.x0, self.y0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn center(&self) -> Vector3<f64> {
        self.center
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        self.rotation
    }

    pub fn intrinsics(&self) -> Matrix3<f64> {
        Matrix3::new(self.focal, 0.0, self.x0, 0.0, self.focal, self.y0, 0.0, 0.0, 1.0)
    }

    pub fn intrinsics_inverse(&self) -> Matrix3<f64> {
        let f = self.focal;
        Matrix3::new(1.0 / f, 0.0, -self.x0 / f, 0.0, 1.0 / f, -self.y0 / f, 0.0, 0.0, 1.0)
    }

    /// Optical axis (camera +z) in world coordinates.
    pub fn optical_axis(&self) -> Vector3<f64> {
        self.rotation.transpose() * Vector3::z()
    }

    pub fn to_camera(&self, world: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * (world - self.center)
    }

    /// Pixel coordinates and depth of a world point.
    pub fn project(&self, world: &Vector3<f64>) -> Result<(f64, f64, f64)> {
        let p = self.to_camera(world);
        let depth = p.z;
        if !(depth > 0.0) {
            return Err(GeometryError::BehindCamera { depth });
        }
        Ok((self.focal * p.x / depth + self.x0, self.focal * p.y / depth + self.y0, depth))
    }

    /// World point at `depth` along the ray through pixel `(u, v)`.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Result<Vector3<f64>> {
        if !(depth > 0.0) {
            return Err(GeometryError::Contract(format!("unproject needs positive depth, got {depth}")));
        }
        let p = Vector3::new((u - self.x0) * depth / self.focal, (v - self.y0) * depth / self.focal, depth);
        Ok(self.rotation.transpose() * p + self.center)
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u <= (self.width - 1) as f64 && v <= (self.height - 1) as f64
    }

    /// Camera of a `width x height` crop whose top-left pixel is `(left, top)`.
    pub fn cropped(&self, left: usize, top: usize, width: usize, height: usize) -> Result<Self> {
        if left + width > self.width || top + height > self.height {
            return Err(GeometryError::Contract(format!(
                "crop {width}x{height}+{left}+{top} exceeds {}x{}",
                self.width, self.height
            )));
        }
        Self::new(
            self.focal,
            self.x0 - left as f64,
            self.y0 - top as f64,
            width,
            height,
            self.center,
            self.rotation,
        )
    }

    /// Same camera for an image resampled by `factor` (feature maps, quarter outputs).
    pub fn scaled(&self, factor: f64, width: usize, height: usize) -> Result<Self> {
        Self::new(
            self.focal * factor,
            self.x0 * factor,
            self.y0 * factor,
            width,
            height,
            self.center,
            self.rotation,
        )
    }
}

/// Writes the line-oriented camera file: extrinsics, intrinsics and the depth plan.
pub fn format_camera_file(cam: &CameraModel, plan: &DepthPlan) -> String {
    let mut s = String::from("extrinsic\n");
    let c = cam.center();
    let _ = writeln!(s, "{} {} {}", c.x, c.y, c.z);
    let r = cam.rotation();
    for i in 0..3 {
        let _ = writeln!(s, "{} {} {}", r[(i, 0)], r[(i, 1)], r[(i, 2)]);
    }
    s.push_str("intrinsic\n");
    let (x0, y0) = cam.principal_point();
    let _ = writeln!(s, "{} {} {}", cam.focal(), x0, y0);
    let _ = writeln!(s, "{} {}", cam.width(), cam.height());
    let _ = writeln!(s, "{} {} {}", plan.d_min(), plan.interval(), plan.count());
    s
}

fn numbers(line: &str, n: usize, index: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| GeometryError::Parse { line: index + 1, detail: e.to_string() })?;
    if vals.len() != n {
        return Err(GeometryError::Parse { line: index + 1, detail: format!("expected {n} numbers, found {}", vals.len()) });
    }
    Ok(vals)
}

pub fn parse_camera_file(text: &str) -> Result<(CameraModel, DepthPlan)> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.len() != 9 {
        return Err(GeometryError::Parse { line: lines.len(), detail: format!("expected 9 lines, found {}", lines.len()) });
    }
    if lines[0] != "extrinsic" {
        return Err(GeometryError::Parse { line: 1, detail: "expected 'extrinsic'".into() });
    }
    if lines[5] != "intrinsic" {
        return Err(GeometryError::Parse { line: 6, detail: "expected 'intrinsic'".into() });
    }
    let c = numbers(lines[1], 3, 1)?;
    let mut r = Matrix3::zeros();
    for i in 0..3 {
        let row = numbers(lines[2 + i], 3, 2 + i)?;
        for j in 0..3 {
            r[(i, j)] = row[j];
        }
    }
    let k = numbers(lines[6], 3, 6)?;
    let size = numbers(lines[7], 2, 7)?;
    let depth = numbers(lines[8], 3, 8)?;
    let as_count = |v: f64, line: usize| -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(GeometryError::Parse { line, detail: format!("{v} is not a positive integer") })
        }
    };
    let cam = CameraModel::new(
        k[0],
        k[1],
        k[2],
        as_count(size[0], 8)?,
        as_count(size[1], 8)?,
        Vector3::new(c[0], c[1], c[2]),
        r,
    )?;
    let plan = DepthPlan::new(depth[0], depth[1], as_count(depth[2], 9)?)?;
    Ok((cam, plan))
}
