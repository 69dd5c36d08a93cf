use crate::element::Element;
use crate::error::{Error, Result};
use crate::ops::softmax::depth_layout;
use crate::tape::{Tape, Var};
use crate::tensor::{Shape, Tensor};

/// Floor applied to probabilities inside the logarithm. Below it the loss is
/// constant in the probability, so no gradient flows there.
pub const LOG_EPSILON: f64 = 1e-12;

/// Mean of `-ln p[target]` over masked pixels of a `[D,H,W]` / `[1,D,H,W]` volume.
pub fn cross_entropy_masked<T: Element>(tape: &Tape<T>, p: &Var<T>, target: &[usize], mask: &[bool]) -> Result<Var<T>> {
    const OP: &str = "cross_entropy_masked";
    let (batches, depth, pixels) = depth_layout(p.dims(), OP)?;
    if batches != 1 {
        return Err(Error::contract(OP, format!("batch size must be 1, got {batches}")));
    }
    if target.len() != pixels || mask.len() != pixels {
        return Err(Error::contract(
            OP,
            format!("target/mask length {}/{} != {pixels} pixels", target.len(), mask.len()),
        ));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::degenerate(OP, "mask selects no pixels"));
    }
    if let Some(i) = (0..pixels).find(|&i| mask[i] && target[i] >= depth) {
        return Err(Error::contract(OP, format!("target {} at pixel {i} outside 0..{depth}", target[i])));
    }
    let eps = T::lit(LOG_EPSILON);
    let pv = p.value().data();
    let mut total = 0.0f64;
    for i in (0..pixels).filter(|&i| mask[i]) {
        total -= pv[target[i] * pixels + i].max(eps).as_f64().ln();
    }
    let loss = Tensor::scalar(T::lit(total / count as f64));
    let saved = tape.is_recording().then(|| (p.value_arc(), target.to_vec(), mask.to_vec()));
    tape.record(OP, loss, &[p], move |g, _| {
        let (p, target, mask) = saved.expect("recorded loss keeps inputs");
        let scale = g.item() / T::lit(count as f64);
        let mut dp = vec![T::zero(); p.len()];
        for i in (0..pixels).filter(|&i| mask[i]) {
            let idx = target[i] * pixels + i;
            let v = p.data()[idx];
            if v > eps {
                dp[idx] = -scale / v;
            }
        }
        Ok(vec![Some(Tensor::from_parts(p.shape().clone(), dp))])
    })
}

/// Sum of all elements as a scalar.
pub fn sum<T: Element>(tape: &Tape<T>, x: &Var<T>) -> Result<Var<T>> {
    let total: T = x.value().data().iter().copied().sum();
    let shape = x.value().shape().clone();
    tape.record("sum", Tensor::scalar(total), &[x], move |g, _| {
        Ok(vec![Some(Tensor::from_parts(shape.clone(), vec![g.item(); shape.numel()]))])
    })
}

/// `Σ x ⊙ weights` with constant weights; used to scalarize outputs in gradient checks.
pub fn weighted_sum<T: Element>(tape: &Tape<T>, x: &Var<T>, weights: &Tensor<T>) -> Result<Var<T>> {
    if x.dims() != weights.dims() {
        return Err(Error::contract(
            "weighted_sum",
            format!("weights {:?} vs input {:?}", weights.dims(), x.dims()),
        ));
    }
    let total: T = x.value().data().iter().zip(weights.data()).map(|(&a, &b)| a * b).sum();
    let w = weights.clone();
    tape.record("weighted_sum", Tensor::scalar(total), &[x], move |g, _| {
        let s = g.item();
        let d: Vec<T> = w.data().iter().map(|&v| v * s).collect();
        Ok(vec![Some(Tensor::from_parts(Shape(w.dims().to_vec()), d))])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_gives_zero_loss() {
        let tape = Tape::<f64>::inference();
        // D=2, 1x2 pixels; targets 1 and 0
        let p = tape.constant(Tensor::from_vec(&[2, 1, 2], vec![0.0, 1.0, 1.0, 0.0]).unwrap());
        let l = cross_entropy_masked(&tape, &p, &[1, 0], &[true, true]).unwrap();
        assert_eq!(l.value().item(), 0.0);
    }

    #[test]
    fn half_probability_gives_ln2() {
        let tape = Tape::<f64>::inference();
        let p = tape.constant(Tensor::from_vec(&[2, 1, 1], vec![0.5, 0.5]).unwrap());
        let l = cross_entropy_masked(&tape, &p, &[0], &[true]).unwrap();
        assert!((l.value().item() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn empty_mask_is_degenerate() {
        let tape = Tape::<f64>::inference();
        let p = tape.constant(Tensor::from_vec(&[2, 1, 1], vec![0.5, 0.5]).unwrap());
        let err = cross_entropy_masked(&tape, &p, &[0], &[false]).unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
    }

    #[test]
    fn zero_probability_is_clamped() {
        let tape = Tape::<f64>::inference();
        let p = tape.constant(Tensor::from_vec(&[2, 1, 1], vec![0.0, 1.0]).unwrap());
        let l = cross_entropy_masked(&tape, &p, &[0], &[true]).unwrap();
        assert!((l.value().item() + LOG_EPSILON.ln()).abs() < 1e-9);
    }

    #[test]
    fn masked_pixels_get_no_gradient() {
        let tape = Tape::<f64>::new();
        let p = tape.leaf(Tensor::from_vec(&[2, 1, 2], vec![0.25, 0.5, 0.75, 0.5]).unwrap());
        let l = cross_entropy_masked(&tape, &p, &[1, 0], &[true, false]).unwrap();
        let g = tape.backward(&l).unwrap().get(&p).unwrap();
        assert_eq!(g.data()[1], 0.0);
        assert_eq!(g.data()[3], 0.0);
        assert!((g.data()[2] + 1.0 / 0.75).abs() < 1e-12);
    }
}
