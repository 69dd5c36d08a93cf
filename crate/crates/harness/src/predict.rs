//! Inference over samples and the prediction directory layout.
//!
//! Predictions mirror the dataset layout for the reference view:
//! `depths/<unit>/<ref>/<tile>.png`, `cams/...txt` (camera of the output
//! grid and the depth plan), `images/...png` (reference colors on the
//! output grid) and optionally `confidence/...bin`. Evaluation pairs each
//! predicted depth map with the same relative path under the ground-truth root.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use skysweep_diffcore::ParamStore;
use skysweep_planesweep::{format_camera_file, parse_camera_file, CameraModel};
use skysweep_rednet::select::write_confidence;
use skysweep_rednet::{subsample_ground_truth, DepthEstimate, DepthSelector, ProbabilityVolume, RedNet};
use skysweep_synthgen::raster::{load_depth, load_rgb, save_depth, save_rgb};
use skysweep_synthgen::{DepthMap, RgbImage};

use crate::error::{HarnessError, Result};
use crate::fusion::{fuse_points, FusionView, PointCloud};
use crate::measure::measure_run;
use crate::metrics::{MetricsAccumulator, MetricsReport};
use crate::sample::Sample;

pub struct Prediction {
    pub estimate: DepthEstimate,
    pub depth: DepthMap,
    pub peak_bytes: usize,
    pub elapsed: Duration,
}

/// Runs the network on one sample and selects depths with `selector`.
pub fn predict_sample(net: &RedNet, store: &ParamStore<f32>, sample: &Sample, selector: &dyn DepthSelector) -> Result<Prediction> {
    let run = measure_run(net, store, &sample.input, &sample.plan)?;
    let v = run.volume;
    let volume = ProbabilityVolume {
        depth: v.depth,
        height: v.height,
        width: v.width,
        data: v.data.iter().map(|&p| p as f64).collect(),
    };
    let estimate = selector.select(&volume, &sample.plan);
    let depth = DepthMap {
        width: estimate.width,
        height: estimate.height,
        depth: estimate.depth.clone(),
        valid: vec![true; estimate.depth.len()],
    };
    Ok(Prediction { estimate, depth, peak_bytes: run.peak_bytes, elapsed: run.elapsed })
}

fn relative(kind: &str, sample: &Sample, ext: &str) -> PathBuf {
    Path::new(kind)
        .join(&sample.unit)
        .join(sample.reference.to_string())
        .join(format!("{:03}.{ext}", sample.tile))
}

fn create_parent(path: &Path) -> Result<()> {
    let dir = path.parent().expect("prediction paths have parents");
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// Writes depth, camera, colors and optionally confidence under `root`;
/// returns the depth map path.
pub fn write_prediction(root: &Path, sample: &Sample, prediction: &Prediction, confidence: bool) -> Result<PathBuf> {
    let depth_path = root.join(relative("depths", sample, "png"));
    create_parent(&depth_path)?;
    save_depth(&prediction.depth, &depth_path)?;

    let cam_path = root.join(relative("cams", sample, "txt"));
    create_parent(&cam_path)?;
    let text = format_camera_file(&sample.output_camera()?, &sample.plan);
    fs::write(&cam_path, text).map_err(|e| HarnessError::io(&cam_path, e))?;

    let image_path = root.join(relative("images", sample, "png"));
    create_parent(&image_path)?;
    save_rgb(&sample.output_image(), &image_path)?;

    if confidence {
        let conf_path = root.join(relative("confidence", sample, "bin"));
        create_parent(&conf_path)?;
        write_confidence(&prediction.estimate, &conf_path)?;
    }
    Ok(depth_path)
}

fn collect_pngs(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::io(dir, e))?.path();
        if path.is_dir() {
            collect_pngs(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "png") {
            out.push(path);
        }
    }
    Ok(())
}

/// Depth maps under `root/depths`, as paths relative to `root`, sorted.
pub fn depth_files(root: &Path) -> Result<Vec<PathBuf>> {
    let depths = root.join("depths");
    if !depths.is_dir() {
        return Err(HarnessError::io(
            &depths,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no depths directory"),
        ));
    }
    let mut files = Vec::new();
    collect_pngs(&depths, &mut files)?;
    let mut rel: Vec<PathBuf> = files
        .into_iter()
        .filter(|p| !p.file_stem().is_some_and(|s| s.to_string_lossy().ends_with("_filled")))
        .map(|p| p.strip_prefix(root).expect("found under root").to_path_buf())
        .collect();
    rel.sort();
    Ok(rel)
}

/// Sibling file of a depth map: `depths/a/b/003.png` -> `cams/a/b/003.txt`.
fn sibling(depth_rel: &Path, kind: &str, ext: &str) -> PathBuf {
    let mut parts = depth_rel.components();
    parts.next();
    Path::new(kind).join(parts.as_path()).with_extension(ext)
}

/// Ground truth brought to the prediction grid; larger maps must be an
/// integer multiple of the prediction in both extents.
fn match_truth(truth: DepthMap, width: usize, height: usize, path: &Path) -> Result<DepthMap> {
    if (truth.width, truth.height) == (width, height) {
        return Ok(truth);
    }
    let factor = truth.width / width.max(1);
    if factor < 2 || truth.width != factor * width || truth.height != factor * height {
        return Err(HarnessError::format(
            path,
            format!("ground truth {}x{} does not match prediction {width}x{height}", truth.width, truth.height),
        ));
    }
    let (depth, valid) = subsample_ground_truth(&truth.depth, &truth.valid, truth.width, truth.height, factor);
    Ok(DepthMap { width, height, depth, valid })
}

/// Pools metrics over every predicted depth map under `pred_root` against
/// the file at the same relative path under `truth_root`. Without an
/// explicit interval, each tile uses the plan in its predicted camera file.
pub fn evaluate_dirs(pred_root: &Path, truth_root: &Path, interval: Option<f64>) -> Result<(MetricsReport, usize)> {
    let files = depth_files(pred_root)?;
    if files.is_empty() {
        return Err(HarnessError::Degenerate(format!("no depth maps under {}", pred_root.display())));
    }
    let per_tile: Vec<(DepthMap, DepthMap, f64)> = files
        .par_iter()
        .map(|rel| {
            let pred = load_depth(&pred_root.join(rel))?;
            let truth_path = truth_root.join(rel);
            if !truth_path.exists() {
                return Err(HarnessError::io(
                    &truth_path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "no ground truth for prediction"),
                ));
            }
            let truth = match_truth(load_depth(&truth_path)?, pred.width, pred.height, &truth_path)?;
            let step = match interval {
                Some(i) => i,
                None => read_camera(&pred_root.join(sibling(rel, "cams", "txt")))?.1,
            };
            Ok((pred, truth, step))
        })
        .collect::<Result<_>>()?;
    let mut acc = MetricsAccumulator::default();
    for (pred, truth, step) in &per_tile {
        acc.add(pred, truth, *step)?;
    }
    Ok((acc.finish()?, files.len()))
}

fn read_camera(path: &Path) -> Result<(CameraModel, f64)> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let (cam, plan) = parse_camera_file(&text).map_err(|e| HarnessError::format(path, e.to_string()))?;
    Ok((cam, plan.interval()))
}

/// Fuses every depth map of a prediction directory with its camera and colors.
pub fn fuse_dir(root: &Path) -> Result<PointCloud> {
    let files = depth_files(root)?;
    let loaded: Vec<(DepthMap, CameraModel, RgbImage)> = files
        .par_iter()
        .map(|rel| {
            let depth = load_depth(&root.join(rel))?;
            let (camera, _) = read_camera(&root.join(sibling(rel, "cams", "txt")))?;
            let image = load_rgb(&root.join(sibling(rel, "images", "png")))?;
            Ok((depth, camera, image))
        })
        .collect::<Result<_>>()?;
    let views: Vec<FusionView<'_>> =
        loaded.iter().map(|(depth, camera, image)| FusionView { depth, camera, image }).collect();
    fuse_points(&views)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("depths/001_2/1/004.png"), "cams", "txt"), PathBuf::from("cams/001_2/1/004.txt"));
    }

    #[test]
    fn truth_is_subsampled_by_integer_factors() {
        let mut truth = DepthMap::constant(8, 4, 30.0);
        truth.depth[4 * 8 - 4] = 1.0;
        let small = match_truth(truth.clone(), 2, 1, Path::new("gt")).unwrap();
        assert_eq!(small.depth, vec![30.0, 30.0]);
        assert!(match_truth(truth, 3, 1, Path::new("gt")).is_err());
    }
}
