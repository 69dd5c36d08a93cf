//! Depth selection from a probability volume.
//!
//! Selectors are registered by name and chosen at run time.

use std::io::{Read, Write};
use std::path::Path;

use skysweep_diffcore::Element;
use skysweep_planesweep::DepthPlan;

use crate::error::{ModelError, Result};
use crate::forward::ProbabilityVolume;

/// Selected depth and the probability of the winning plane, per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthEstimate {
    pub width: usize,
    pub height: usize,
    pub depth: Vec<f64>,
    pub confidence: Vec<f32>,
}

pub trait DepthSelector: Send + Sync {
    fn name(&self) -> &'static str;
    fn select(&self, volume: &ProbabilityVolume<f64>, plan: &DepthPlan) -> DepthEstimate;
}

/// Index of the most probable plane at `pixel`; the lower index wins ties.
pub fn argmax_plane<T: Element>(volume: &ProbabilityVolume<T>, pixel: usize) -> usize {
    let n = volume.pixels();
    let mut best = 0;
    for d in 1..volume.depth {
        if volume.data[d * n + pixel] > volume.data[best * n + pixel] {
            best = d;
        }
    }
    best
}

/// Winner-take-all: the depth of the most probable plane.
pub struct WinnerTakeAll;

impl DepthSelector for WinnerTakeAll {
    fn name(&self) -> &'static str {
        "wta"
    }

    fn select(&self, volume: &ProbabilityVolume<f64>, plan: &DepthPlan) -> DepthEstimate {
        let n = volume.pixels();
        let mut depth = Vec::with_capacity(n);
        let mut confidence = Vec::with_capacity(n);
        for i in 0..n {
            let k = argmax_plane(volume, i);
            depth.push(plan.depth(k));
            confidence.push(volume.data[k * n + i] as f32);
        }
        DepthEstimate { width: volume.width, height: volume.height, depth, confidence }
    }
}

/// Winner-take-all refined by the vertex of a parabola through the winning
/// plane and its two neighbours, limited to half an interval.
pub struct RefinedWinnerTakeAll;

impl DepthSelector for RefinedWinnerTakeAll {
    fn name(&self) -> &'static str {
        "wta-refined"
    }

    fn select(&self, volume: &ProbabilityVolume<f64>, plan: &DepthPlan) -> DepthEstimate {
        let n = volume.pixels();
        let mut est = WinnerTakeAll.select(volume, plan);
        for i in 0..n {
            let k = argmax_plane(volume, i);
            if k == 0 || k + 1 == volume.depth {
                continue;
            }
            let (a, b, c) = (volume.data[(k - 1) * n + i], volume.data[k * n + i], volume.data[(k + 1) * n + i]);
            let curvature = a - 2.0 * b + c;
            if curvature < 0.0 {
                let offset = (0.5 * (a - c) / curvature).clamp(-0.5, 0.5);
                est.depth[i] = plan.depth(k) + offset * plan.interval();
            }
        }
        est
    }
}

/// All registered selectors.
pub fn selectors() -> Vec<Box<dyn DepthSelector>> {
    vec![Box::new(WinnerTakeAll), Box::new(RefinedWinnerTakeAll)]
}

pub fn selector(name: &str) -> Option<Box<dyn DepthSelector>> {
    selectors().into_iter().find(|s| s.name() == name)
}

/// Winner-take-all depth map.
pub fn infer_depth(volume: &ProbabilityVolume<f64>, plan: &DepthPlan) -> DepthEstimate {
    WinnerTakeAll.select(volume, plan)
}

pub const CONFIDENCE_MAGIC: u32 = 0x4643_4b53;

/// Writes `magic, H, W` as little-endian `u32` followed by `H * W` little-endian `f32`.
pub fn write_confidence(est: &DepthEstimate, path: &Path) -> Result<()> {
    let io = |e| ModelError::Io { path: path.display().to_string(), source: e };
    let mut out = Vec::with_capacity(12 + 4 * est.confidence.len());
    for v in [CONFIDENCE_MAGIC, est.height as u32, est.width as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for c in &est.confidence {
        out.extend_from_slice(&c.to_le_bytes());
    }
    std::fs::File::create(path).and_then(|mut f| f.write_all(&out)).map_err(io)
}

/// Reads a confidence raster: `(height, width, values)`.
pub fn read_confidence(path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| ModelError::Io { path: path.display().to_string(), source: e })?;
    let bad = |detail: &str| ModelError::Format { path: path.display().to_string(), detail: detail.into() };
    if bytes.len() < 12 {
        return Err(bad("truncated header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().expect("four bytes"));
    if word(0) != CONFIDENCE_MAGIC {
        return Err(bad("bad magic"));
    }
    let (h, w) = (word(1) as usize, word(2) as usize);
    if bytes.len() != 12 + 4 * h * w {
        return Err(bad("payload size does not match header"));
    }
    let values = bytes[12..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("four bytes"))).collect();
    Ok((h, w, values))
}
