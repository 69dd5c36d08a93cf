//! Registry of finite-difference gradient checks, one case per
//! differentiable operation plus an end-to-end case.

use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skysweep_diffcore::gradcheck::{check_inputs, check_params, random_tensor, random_tensor_away_from_zero, GradReport};
use skysweep_diffcore::ops::{self, Activation, CombineKind, Padding};
use skysweep_diffcore::{ParamStore, Tensor};
use skysweep_planesweep::{warp_bilinear, CameraModel, DepthPlan, Homography};
use skysweep_rednet::{
    aggregate_variance, conv_gru_step, depth_loss, forward_train, red_regularize_step, GruStates, NetConfig, RedNet,
    UnitInput,
};

use crate::error::Result;

pub const OP_TOLERANCE: f64 = 1e-4;
pub const END_TO_END_TOLERANCE: f64 = 1e-3;

pub trait GradCase: Send + Sync {
    fn name(&self) -> &'static str;

    fn tolerance(&self) -> f64 {
        OP_TOLERANCE
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport>;
}

/// Random linear functional of `y`, so every output element gets a distinct weight.
fn project(t: &skysweep_diffcore::Tape<f64>, y: &skysweep_diffcore::Var<f64>, weights: &Tensor<f64>) -> skysweep_diffcore::Result<skysweep_diffcore::Var<f64>> {
    ops::weighted_sum(t, y, weights)
}

fn instances(rng: &mut ChaCha8Rng, n: usize, mut one: impl FnMut(&mut ChaCha8Rng, usize) -> Result<GradReport>) -> Result<GradReport> {
    let mut total = GradReport::default();
    for i in 0..n {
        total.merge(one(rng, i)?);
    }
    Ok(total)
}

struct Conv2d;

impl GradCase for Conv2d {
    fn name(&self) -> &'static str {
        "conv2d"
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport> {
        instances(rng, 6, |r, i| {
            let stride = 1 + i % 2;
            let (ci, co) = (r.gen_range(1..4), r.gen_range(1..5));
            let (h, w) = (r.gen_range(3..9), r.gen_range(3..9));
            let x = random_tensor(&[1, ci, h, w], -1.0, 1.0, r);
            let k = random_tensor(&[co, ci, 3, 3], -1.0, 1.0, r);
            let b = random_tensor(&[co], -1.0, 1.0, r);
            let weights = random_tensor(&[1, co, h.div_ceil(stride), w.div_ceil(stride)], -1.0, 1.0, r);
            Ok(check_inputs(&[x, k, b], None, r, |t, v| {
                project(t, &ops::conv2d(t, &v[0], &v[1], &v[2], stride, Padding::Same)?, &weights)
            })?)
        })
    }
}

struct TransposedConv2d;

impl GradCase for TransposedConv2d {
    fn name(&self) -> &'static str {
        "transposed_conv2d"
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport> {
        instances(rng, 6, |r, i| {
            let stride = 1 + i % 2;
            let (ci, co) = (r.gen_range(1..4), r.gen_range(1..4));
            let (h, w) = (r.gen_range(2..6), r.gen_range(2..6));
            let x = random_tensor(&[1, ci, h, w], -1.0, 1.0, r);
            let k = random_tensor(&[ci, co, 3, 3], -1.0, 1.0, r);
            let b = random_tensor(&[co], -1.0, 1.0, r);
            let weights = random_tensor(&[1, co, stride * h, stride * w], -1.0, 1.0, r);
            Ok(check_inputs(&[x, k, b], None, r, |t, v| {
                project(t, &ops::transposed_conv2d(t, &v[0], &v[1], &v[2], stride)?, &weights)
            })?)
        })
    }
}

struct Elementwise;

impl GradCase for Elementwise {
    fn name(&self) -> &'static str {
        "elementwise"
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport> {
        instances(rng, 3, |r, i| {
            let kind = [Activation::Relu, Activation::Sigmoid, Activation::Tanh][i % 3];
            let x = random_tensor_away_from_zero(&[1, 2, 4, 5], 3.0, 1e-3, r);
            let weights = random_tensor(&[1, 2, 4, 5], -1.0, 1.0, r);
            Ok(check_inputs(&[x], None, r, |t, v| project(t, &ops::elementwise(t, &v[0], kind)?, &weights))?)
        })
    }
}

struct Combine;

impl GradCase for Combine {
    fn name(&self) -> &'static str {
        "combine"
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport> {
        let kinds = [CombineKind::Add, CombineKind::Sub, CombineKind::Hadamard, CombineKind::ConcatChannels];
        instances(rng, kinds.len(), |r, i| {
            let kind = kinds[i];
            let a = random_tensor(&[1, 2, 3, 4], -2.0, 2.0, r);
            let bc = if kind == CombineKind::ConcatChannels { 3 } else { 2 };
            let b = random_tensor(&[1, bc, 3, 4], -2.0, 2.0, r);
            let oc = if kind == CombineKind::ConcatChannels { 5 } else { 2 };
            let weights = random_tensor(&[1, oc, 3, 4], -1.0, 1.0, r);
            Ok(check_inputs(&[a, b], None, r, |t, v| project(t, &ops::combine(t, &v[0], &v[1], kind)?, &weights))?)
        })
    }
}

struct SoftmaxDepth;

impl GradCase for SoftmaxDepth {
    fn name(&self) -> &'static str {
        "softmax_depth"
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport> {
        instances(rng, 4, |r, _| {
            let d = r.gen_range(2..7);
            let x = random_tensor(&[1, d, 3, 4], -3.0, 3.0, r);
            let weights = random_tensor(&[1, d, 3, 4], -1.0, 1.0, r);
            Ok(check_inputs(&[x], None, r, |t, v| project(t, &ops::softmax_depth(t, &v[0])?, &weights))?)
        })
    }
}

struct CrossEntropyMasked;

impl GradCase for CrossEntropyMasked {
    fn name(&self) -> &'static str {
        "cross_entropy_masked"
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport> {
        instances(rng, 4, |r, _| {
            let d = r.gen_range(2..7);
            let n = 12;
            // probabilities bounded away from zero, not necessarily normalized
            let p = random_tensor(&[1, d, 3, 4], 0.05, 1.0, r);
            let target: Vec<usize> = (0..n).map(|_| r.gen_range(0..d)).collect();
            let mut mask: Vec<bool> = (0..n).map(|_| r.gen_bool(0.7)).collect();
            mask[0] = true;
            Ok(check_inputs(&[p], None, r, |t, v| ops::cross_entropy_masked(t, &v[0], &target, &mask))?)
        })
    }
}

struct WarpBilinear;

impl GradCase for WarpBilinear {
    fn name(&self) -> &'static str {
        "warp_bilinear"
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport> {
        instances(rng, 4, |r, _| {
            let m = Matrix3::new(
                r.gen_range(0.9..1.1),
                r.gen_range(-0.1..0.1),
                r.gen_range(-3.0..3.0),
                r.gen_range(-0.1..0.1),
                r.gen_range(0.9..1.1),
                r.gen_range(-3.0..3.0),
                r.gen_range(-1e-3..1e-3),
                r.gen_range(-1e-3..1e-3),
                1.0,
            );
            let hom = Homography::new(m);
            let src = random_tensor(&[1, 3, 6, 9], -1.0, 1.0, r);
            let weights = random_tensor(&[1, 3, 6, 9], -1.0, 1.0, r);
            Ok(check_inputs(&[src], None, r, |t, v| project(t, &warp_bilinear(t, &v[0], &hom, 0.5)?, &weights))?)
        })
    }
}

struct AggregateVariance;

impl GradCase for AggregateVariance {
    fn name(&self) -> &'static str {
        "aggregate_variance"
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport> {
        instances(rng, 4, |r, i| {
            let n = if i % 2 == 0 { 3 } else { 5 };
            let views: Vec<Tensor<f64>> = (0..n).map(|_| random_tensor(&[1, 4, 3, 5], -1.0, 1.0, r)).collect();
            let weights = random_tensor(&[1, 4, 3, 5], -1.0, 1.0, r);
            Ok(check_inputs(&views, None, r, |t, v| {
                let refs: Vec<_> = v.iter().collect();
                project(t, &aggregate_variance(t, &refs).map_err(model_to_core)?, &weights)
            })?)
        })
    }
}

fn small_network(seed: u64) -> Result<(RedNet, ParamStore<f64>)> {
    Ok(RedNet::init::<f64>(NetConfig::default(), seed)?)
}

struct ConvGruStep;

impl GradCase for ConvGruStep {
    fn name(&self) -> &'static str {
        "conv_gru_step"
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport> {
        let (net, store) = small_network(rng.gen())?;
        let cell = net.regularizer.cells[1];
        let c = cell.channels;
        let dims = [1, c, 4, 4];
        let x = random_tensor(&dims, -1.0, 1.0, rng);
        let h = random_tensor(&dims, -1.0, 1.0, rng);
        let weights = random_tensor(&dims, -1.0, 1.0, rng);
        let mut report = check_inputs(&[x.clone(), h.clone()], None, rng, |t, v| {
            project(t, &conv_gru_step(t, &cell, &store, &v[0], &v[1]).map_err(model_to_core)?, &weights)
        })?;
        // parameters outside the cell have zero gradient on both sides
        report.merge(check_params(&store, Some(4), rng, |t, s| {
            let (xv, hv) = (t.constant(x.clone()), t.constant(h.clone()));
            project(t, &conv_gru_step(t, &cell, s, &xv, &hv).map_err(model_to_core)?, &weights)
        })?);
        Ok(report)
    }
}

struct RedRegularizeStep;

impl GradCase for RedRegularizeStep {
    fn name(&self) -> &'static str {
        "red_regularize_step"
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport> {
        let (net, store) = small_network(rng.gen())?;
        let red = net.regularizer.clone();
        let (h, w) = (8, 8);
        let cost = random_tensor(&[1, 16, h, w], 0.0, 1.0, rng);
        let states: Vec<Tensor<f64>> =
            GruStates::<f64>::expected_dims(h, w).iter().map(|d| random_tensor(d, -0.5, 0.5, rng)).collect();
        let out_w = random_tensor(&[1, 1, 2 * h, 2 * w], -1.0, 1.0, rng);
        let state_w: Vec<Tensor<f64>> = states.iter().map(|s| random_tensor(s.dims(), -1.0, 1.0, rng)).collect();
        let objective = |t: &skysweep_diffcore::Tape<f64>,
                         s: &ParamStore<f64>,
                         v: &[skysweep_diffcore::Var<f64>]|
         -> Result<skysweep_diffcore::Var<f64>> {
            let st = GruStates { states: [v[1].clone(), v[2].clone(), v[3].clone(), v[4].clone()] };
            let (out, next) = red_regularize_step(t, &red, s, &v[0], &st)?;
            let mut total = project(t, &out, &out_w)?;
            for (k, n) in next.states.iter().enumerate() {
                total = ops::add(t, &total, &project(t, n, &state_w[k])?)?;
            }
            Ok(total)
        };
        let mut inputs = vec![cost];
        inputs.extend(states);
        let mut report = check_inputs(&inputs, Some(24), rng, |t, v| {
            objective(t, &store, v).map_err(into_core)
        })?;
        report.merge(check_params(&store, Some(2), rng, |t, s| {
            let v: Vec<_> = inputs.iter().map(|x| t.constant(x.clone())).collect();
            objective(t, s, &v).map_err(into_core)
        })?);
        Ok(report)
    }
}

/// Tiny full network: three textured 16x16 views, four depth planes.
struct FullForward;

impl GradCase for FullForward {
    fn name(&self) -> &'static str {
        "full forward"
    }

    fn tolerance(&self) -> f64 {
        END_TO_END_TOLERANCE
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<GradReport> {
        let (net, store) = small_network(rng.gen())?;
        let (h, w) = (16, 16);
        let focal = 2.0 * w as f64;
        let mut images = Vec::new();
        let mut cameras = Vec::new();
        for i in 0..3 {
            images.push(random_tensor(&[1, 3, h, w], -1.0, 1.0, rng));
            let center = Vector3::new(0.6 * (i as f64 - 1.0), 0.0, 20.0);
            cameras.push(CameraModel::nadir(focal, w, h, center)?);
        }
        let input = UnitInput::new(images, cameras, 1)?;
        let plan = DepthPlan::new(18.0, 1.0, 4)?;
        let depth: Vec<f64> = (0..h * w).map(|_| rng.gen_range(18.0..21.0)).collect();
        let valid: Vec<bool> = (0..h * w).map(|_| rng.gen_bool(0.8)).collect();
        Ok(check_params(&store, Some(3), rng, |t, s| {
            let volume = forward_train(t, &net, s, &input, &plan).map_err(model_to_core)?;
            depth_loss(t, &volume, &depth, &valid, &plan).map_err(model_to_core)
        })?)
    }
}

fn model_to_core(e: skysweep_rednet::ModelError) -> skysweep_diffcore::Error {
    match e {
        skysweep_rednet::ModelError::Core(c) => c,
        other => skysweep_diffcore::Error::contract("model", other.to_string()),
    }
}

fn into_core(e: crate::error::HarnessError) -> skysweep_diffcore::Error {
    match e {
        crate::error::HarnessError::Core(c) => c,
        crate::error::HarnessError::Model(m) => model_to_core(m),
        other => skysweep_diffcore::Error::contract("gradcheck", other.to_string()),
    }
}

/// Every registered case, in a fixed order.
pub fn registry() -> Vec<Box<dyn GradCase>> {
    vec![
        Box::new(Conv2d),
        Box::new(TransposedConv2d),
        Box::new(Elementwise),
        Box::new(Combine),
        Box::new(SoftmaxDepth),
        Box::new(CrossEntropyMasked),
        Box::new(WarpBilinear),
        Box::new(AggregateVariance),
        Box::new(ConvGruStep),
        Box::new(RedRegularizeStep),
        Box::new(FullForward),
    ]
}

#[derive(Clone, Debug)]
pub struct CaseOutcome {
    pub name: &'static str,
    pub tolerance: f64,
    pub report: GradReport,
    pub elapsed: Duration,
}

impl CaseOutcome {
    pub fn passed(&self) -> bool {
        self.report.max_rel_error < self.tolerance && self.report.checked > 0
    }
}

/// Runs each case with its own generator derived from `seed` and the case position.
pub fn run_suite(seed: u64) -> Result<Vec<CaseOutcome>> {
    registry()
        .iter()
        .enumerate()
        .map(|(i, case)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(i as u64));
            let start = Instant::now();
            let report = case.run(&mut rng)?;
            Ok(CaseOutcome { name: case.name(), tolerance: case.tolerance(), report, elapsed: start.elapsed() })
        })
        .collect()
}
