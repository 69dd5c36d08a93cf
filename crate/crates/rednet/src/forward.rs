//! Plane-sweep forward pass, probability volume and loss.

use skysweep_diffcore::ops::{concat_channels, cross_entropy_masked, softmax_block, softmax_depth};
use skysweep_diffcore::{Element, ParamStore, Tape, Var};
use skysweep_planesweep::{sweep_homography, warp_bilinear, DepthPlan};

use crate::error::{ModelError, Result};
use crate::features::extract_features;
use crate::input::UnitInput;
use crate::params::RedNet;
use crate::red::{red_regularize_step, GruStates};
use crate::variance::aggregate_variance;

/// Per-pixel distribution over depth planes, `data[d * H * W + y * W + x]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVolume<T> {
    pub depth: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<T>,
}

impl<T: Element> ProbabilityVolume<T> {
    pub fn get(&self, d: usize, y: usize, x: usize) -> T {
        self.data[(d * self.height + y) * self.width + x]
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }
}

/// Runs feature extraction and the depth-ordered sweep, handing each
/// regularized `[1,1,H,W]` map to `sink` as soon as it is produced.
fn sweep<T: Element>(
    tape: &Tape<T>,
    net: &RedNet,
    store: &ParamStore<T>,
    input: &UnitInput<T>,
    plan: &DepthPlan,
    mut sink: impl FnMut(Var<T>) -> Result<()>,
) -> Result<()> {
    let multiple = net.config.resolution.size_multiple();
    let (h, w) = (input.height(), input.width());
    if h % multiple != 0 || w % multiple != 0 {
        return Err(ModelError::Contract(format!(
            "{} resolution needs image extents divisible by {multiple}, got {w}x{h}",
            net.config.resolution.name()
        )));
    }
    let features: Vec<Var<T>> = input
        .images
        .iter()
        .map(|img| extract_features(tape, &net.extractor, store, &tape.constant(img.clone())))
        .collect::<Result<_>>()?;
    let scale = net.config.resolution.feature_scale();
    let fd = features[0].dims();
    let mut states = GruStates::zeros(tape, fd[2], fd[3])?;
    let reference = &input.cameras[input.reference];
    for i in 0..plan.count() {
        let depth = plan.depth(i);
        let mut warped = Vec::with_capacity(features.len());
        for (v, feat) in features.iter().enumerate() {
            if v == input.reference {
                warped.push(feat.clone());
            } else {
                let hom = sweep_homography(reference, &input.cameras[v], depth)?;
                warped.push(warp_bilinear(tape, feat, &hom, scale)?);
            }
        }
        let refs: Vec<&Var<T>> = warped.iter().collect();
        let cost = aggregate_variance(tape, &refs)?;
        drop(warped);
        let (map, next) = red_regularize_step(tape, &net.regularizer, store, &cost, &states)?;
        states = next;
        sink(map)?;
    }
    Ok(())
}

/// Inference forward pass. Only the recurrent states and one step's
/// intermediates are alive at a time; the regularized maps are copied into
/// the returned volume, which is normalized along depth afterwards.
pub fn forward_volume<T: Element>(
    net: &RedNet,
    store: &ParamStore<T>,
    input: &UnitInput<T>,
    plan: &DepthPlan,
) -> Result<ProbabilityVolume<T>> {
    let tape = Tape::inference();
    let mut data: Vec<T> = Vec::new();
    let mut extent = (0, 0);
    sweep(&tape, net, store, input, plan, |map| {
        let d = map.dims();
        extent = (d[2], d[3]);
        if data.capacity() == 0 {
            data.reserve_exact(plan.count() * d[2] * d[3]);
        }
        data.extend_from_slice(map.value().data());
        Ok(())
    })?;
    let (height, width) = extent;
    softmax_block(&mut data, plan.count(), height * width);
    Ok(ProbabilityVolume { depth: plan.count(), height, width, data })
}

/// Training forward pass: the normalized volume `[1,D,H,W]` on `tape`.
pub fn forward_train<T: Element>(
    tape: &Tape<T>,
    net: &RedNet,
    store: &ParamStore<T>,
    input: &UnitInput<T>,
    plan: &DepthPlan,
) -> Result<Var<T>> {
    let mut maps = Vec::with_capacity(plan.count());
    sweep(tape, net, store, input, plan, |map| {
        maps.push(map);
        Ok(())
    })?;
    let refs: Vec<&Var<T>> = maps.iter().collect();
    let stacked = concat_channels(tape, &refs)?;
    drop(maps);
    Ok(softmax_depth(tape, &stacked)?)
}

/// Nearest-plane targets; pixels with invalid or out-of-range depth are masked out.
pub fn depth_targets(depth: &[f64], valid: &[bool], plan: &DepthPlan) -> (Vec<usize>, Vec<bool>) {
    depth
        .iter()
        .zip(valid)
        .map(|(&d, &ok)| match (ok, plan.nearest_index(d)) {
            (true, Some(k)) => (k, true),
            _ => (0, false),
        })
        .unzip()
}

/// Masked cross-entropy of a `[1,D,H,W]` volume against ground-truth depth.
pub fn depth_loss<T: Element>(
    tape: &Tape<T>,
    volume: &Var<T>,
    depth: &[f64],
    valid: &[bool],
    plan: &DepthPlan,
) -> Result<Var<T>> {
    let (target, mask) = depth_targets(depth, valid, plan);
    Ok(cross_entropy_masked(tape, volume, &target, &mask)?)
}

/// Samples a full-resolution ground truth on the output grid of a network
/// whose output is `1 / factor` of the image size: output pixel `(x, y)`
/// takes image pixel `(factor * x, factor * y)`.
pub fn subsample_ground_truth(
    depth: &[f64],
    valid: &[bool],
    width: usize,
    height: usize,
    factor: usize,
) -> (Vec<f64>, Vec<bool>) {
    let (ow, oh) = (width / factor, height / factor);
    let mut d = Vec::with_capacity(ow * oh);
    let mut v = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        for x in 0..ow {
            let i = factor * y * width + factor * x;
            d.push(depth[i]);
            v.push(valid[i]);
        }
    }
    (d, v)
}
