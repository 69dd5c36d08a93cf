//! Z-buffer rendering of the scene's point set into a virtual view.

use nalgebra::Vector3;
use skysweep_planesweep::CameraModel;

use crate::error::{Result, SynthError};
use crate::raster::{DepthMap, RgbImage};
use crate::scene::SceneModel;

/// A rendered view with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct ViewRecord {
    pub image: RgbImage,
    pub depth: DepthMap,
    /// Pixels whose value was filled from a neighbour instead of rendered.
    pub filled: Vec<bool>,
    pub camera: CameraModel,
    pub strip: usize,
    pub index: usize,
}

/// Horizontal box that contains every scene point the camera can see.
fn visible_box(scene: &SceneModel, cam: &CameraModel) -> ((f64, f64), (f64, f64)) {
    let sc = scene.config();
    let everything = ((0.0, sc.extent_x), (0.0, sc.extent_y));
    let (w, h) = (cam.width() as f64, cam.height() as f64);
    let kinv = cam.intrinsics_inverse();
    let rt = cam.rotation().transpose();
    let c = cam.center();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (u, v) in [(-1.0, -1.0), (w, -1.0), (-1.0, h), (w, h)] {
        let ray = rt * (kinv * Vector3::new(u, v, 1.0));
        if !(ray.z < 0.0) {
            return everything;
        }
        for z in [scene.min_elevation(), scene.max_elevation()] {
            if z >= c.z {
                return everything;
            }
            let t = (z - c.z) / ray.z;
            let p = c + ray * t;
            x_lo = x_lo.min(p.x);
            x_hi = x_hi.max(p.x);
            y_lo = y_lo.min(p.y);
            y_hi = y_hi.max(p.y);
        }
    }
    let m = 2.0 * scene.spacing();
    ((x_lo - m, x_hi + m), (y_lo - m, y_hi + m))
}

/// Projects every scene point into `cam`; per pixel the nearest point wins.
///
/// Pixels no point lands on are filled from the nearest-depth rendered
/// 8-neighbour (repeated until nothing changes) and flagged in `filled`.
pub fn render_view(scene: &SceneModel, cam: &CameraModel, strip: usize, index: usize) -> Result<ViewRecord> {
    let (w, h) = (cam.width(), cam.height());
    let mut zbuf = vec![f64::INFINITY; w * h];
    let mut color = vec![[0u8; 3]; w * h];
    let (xr, yr) = visible_box(scene, cam);
    let r = cam.rotation();
    let c = cam.center();
    let (f, (x0, y0)) = (cam.focal(), cam.principal_point());
    let mut hits = 0usize;
    scene.for_each_point_in(xr, yr, |p| {
        let q = r * (p.position - c);
        if !(q.z > 0.0) {
            return;
        }
        let u = (f * q.x / q.z + x0).round();
        let v = (f * q.y / q.z + y0).round();
        if u < 0.0 || v < 0.0 || u >= w as f64 || v >= h as f64 {
            return;
        }
        let k = v as usize * w + u as usize;
        if q.z < zbuf[k] {
            zbuf[k] = q.z;
            color[k] = p.color;
            hits += 1;
        }
    });
    if hits == 0 {
        return Err(SynthError::Degenerate(format!("no scene point projects into view {strip}/{index}")));
    }

    let mut filled = vec![false; w * h];
    loop {
        let mut updates = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if zbuf[y * w + x].is_finite() {
                    continue;
                }
                let mut best: Option<usize> = None;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let n = ny as usize * w + nx as usize;
                        if zbuf[n].is_finite() && best.map_or(true, |b| zbuf[n] < zbuf[b]) {
                            best = Some(n);
                        }
                    }
                }
                if let Some(b) = best {
                    updates.push((y * w + x, b));
                }
            }
        }
        if updates.is_empty() {
            break;
        }
        for (k, b) in updates {
            zbuf[k] = zbuf[b];
            color[k] = color[b];
            filled[k] = true;
        }
    }

    let mut image = RgbImage::new(w, h);
    let mut depth = DepthMap::invalid(w, h);
    for k in 0..w * h {
        image.data[3 * k..3 * k + 3].copy_from_slice(&color[k]);
        if zbuf[k].is_finite() {
            depth.depth[k] = zbuf[k];
            depth.valid[k] = true;
        }
    }
    Ok(ViewRecord { image, depth, filled, camera: cam.clone(), strip, index })
}
