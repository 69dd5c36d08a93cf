//! Central finite-difference checks of taped gradients (64-bit).

use rand::seq::index::sample;
use rand::Rng;

use crate::error::Result;
use crate::param::{ParamId, ParamStore};
use crate::tape::{Tape, Var};
use crate::tensor::Tensor;

pub const FD_STEP: f64 = 1e-6;

/// Gradients smaller than this are compared absolutely rather than relatively.
pub const REL_FLOOR: f64 = 1e-6;

/// `|a - n| / max(|a|, |n|, REL_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

#[derive(Clone, Debug, Default)]
pub struct GradReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Location and values of the worst coordinate.
    pub worst: String,
}

impl GradReport {
    fn observe(&mut self, location: impl FnOnce() -> String, analytic: f64, numeric: f64) {
        let err = relative_error(analytic, numeric);
        self.checked += 1;
        if err > self.max_rel_error || self.worst.is_empty() {
            self.max_rel_error = err.max(self.max_rel_error);
            self.worst = format!("{} analytic={analytic:.9e} numeric={numeric:.9e}", location());
        }
    }

    pub fn merge(&mut self, other: GradReport) {
        self.checked += other.checked;
        if other.max_rel_error >= self.max_rel_error {
            self.max_rel_error = other.max_rel_error;
            self.worst = other.worst;
        }
    }
}

fn pick(len: usize, count: Option<usize>, rng: &mut impl Rng) -> Vec<usize> {
    match count {
        Some(c) if c < len => {
            let mut v = sample(rng, len, c).into_vec();
            v.sort_unstable();
            v
        }
        _ => (0..len).collect(),
    }
}

/// Checks the gradient of the scalar `f` with respect to every input tensor.
/// `coords` limits the number of checked coordinates per input.
pub fn check_inputs<F>(inputs: &[Tensor<f64>], coords: Option<usize>, rng: &mut impl Rng, f: F) -> Result<GradReport>
where
    F: Fn(&Tape<f64>, &[Var<f64>]) -> Result<Var<f64>>,
{
    let tape = Tape::new();
    let leaves: Vec<_> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let loss = f(&tape, &leaves)?;
    let grads = tape.backward(&loss)?;
    let analytic: Vec<Tensor<f64>> = leaves.iter().map(|l| grads.get(l).expect("leaf has slot")).collect();
    drop(leaves);

    let eval = |perturbed: &[Tensor<f64>]| -> Result<f64> {
        let tape = Tape::inference();
        let vars: Vec<_> = perturbed.iter().map(|t| tape.constant(t.clone())).collect();
        Ok(f(&tape, &vars)?.value().item())
    };
    let mut report = GradReport::default();
    let mut work: Vec<Tensor<f64>> = inputs.to_vec();
    for (i, grad) in analytic.iter().enumerate() {
        for j in pick(inputs[i].len(), coords, rng) {
            let orig = inputs[i].data()[j];
            work[i].data_mut()[j] = orig + FD_STEP;
            let plus = eval(&work)?;
            work[i].data_mut()[j] = orig - FD_STEP;
            let minus = eval(&work)?;
            work[i].data_mut()[j] = orig;
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            report.observe(|| format!("input {i}[{j}]"), grad.data()[j], numeric);
        }
    }
    Ok(report)
}

/// Checks parameter gradients of `f`, sampling `coords` coordinates per parameter.
pub fn check_params<F>(store: &ParamStore<f64>, coords: Option<usize>, rng: &mut impl Rng, f: F) -> Result<GradReport>
where
    F: Fn(&Tape<f64>, &ParamStore<f64>) -> Result<Var<f64>>,
{
    let mut with_grads = store.clone();
    {
        let tape = Tape::new();
        let loss = f(&tape, store)?;
        tape.backward(&loss)?.write_to(&mut with_grads);
    }
    let eval = |s: &ParamStore<f64>| -> Result<f64> {
        let tape = Tape::inference();
        Ok(f(&tape, s)?.value().item())
    };
    let mut report = GradReport::default();
    let mut work = store.clone();
    for idx in 0..store.len() {
        let id = ParamId(idx);
        let base = store.get(id).value.as_ref().clone();
        for j in pick(base.len(), coords, rng) {
            let mut t = base.clone();
            t.data_mut()[j] = base.data()[j] + FD_STEP;
            work.set_value(id, t.clone())?;
            let plus = eval(&work)?;
            t.data_mut()[j] = base.data()[j] - FD_STEP;
            work.set_value(id, t)?;
            let minus = eval(&work)?;
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let name = &store.get(id).name;
            report.observe(|| format!("{name}[{j}]"), with_grads.get(id).grad.data()[j], numeric);
        }
        work.set_value(id, base)?;
    }
    Ok(report)
}

/// Uniform random tensor in `[lo, hi)`.
pub fn random_tensor(dims: &[usize], lo: f64, hi: f64, rng: &mut impl Rng) -> Tensor<f64> {
    let n: usize = dims.iter().product();
    let data = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    Tensor::from_vec(dims, data).expect("valid random shape")
}

/// Uniform random values kept at least `margin` away from zero, for kinked functions.
pub fn random_tensor_away_from_zero(dims: &[usize], scale: f64, margin: f64, rng: &mut impl Rng) -> Tensor<f64> {
    let n: usize = dims.iter().product();
    let data = (0..n)
        .map(|_| {
            let mag = rng.gen_range(margin..scale);
            if rng.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        })
        .collect();
    Tensor::from_vec(dims, data).expect("valid random shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert!((relative_error(2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((relative_error(0.0, 1e-9) - 1e-3).abs() < 1e-12);
    }
}
