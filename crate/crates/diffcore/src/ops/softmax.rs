use crate::element::Element;
use crate::error::{Error, Result};
use crate::tape::{Tape, Var};
use crate::tensor::Tensor;

/// Splits a `[D,H,W]` or `[B,D,H,W]` shape into `(batches, depth, pixels)`.
pub(crate) fn depth_layout(dims: &[usize], op: &'static str) -> Result<(usize, usize, usize)> {
    match *dims {
        [d, h, w] => Ok((1, d, h * w)),
        [b, d, h, w] => Ok((b, d, h * w)),
        _ => Err(Error::contract(op, format!("expected [D,H,W] or [B,D,H,W], got {dims:?}"))),
    }
}

/// Per-pixel softmax along the depth axis, stabilized by subtracting the maximum.
pub fn softmax_depth<T: Element>(tape: &Tape<T>, volume: &Var<T>) -> Result<Var<T>> {
    const OP: &str = "softmax_depth";
    let (batches, depth, pixels) = depth_layout(volume.dims(), OP)?;
    if depth < 2 {
        return Err(Error::contract(OP, format!("need at least 2 depth planes, got {depth}")));
    }
    let mut out = volume.value().clone();
    for b in 0..batches {
        softmax_block(&mut out.data_mut()[b * depth * pixels..(b + 1) * depth * pixels], depth, pixels);
    }
    let saved = tape.is_recording().then(|| out.clone());
    tape.record(OP, out, &[volume], move |g, _| {
        let p = saved.expect("recorded softmax keeps its output");
        let mut dx = vec![T::zero(); p.len()];
        let mut dot = vec![T::zero(); pixels];
        for b in 0..batches {
            let base = b * depth * pixels;
            dot.iter_mut().for_each(|v| *v = T::zero());
            for d in 0..depth {
                let o = base + d * pixels;
                for i in 0..pixels {
                    dot[i] = dot[i] + g.data()[o + i] * p.data()[o + i];
                }
            }
            for d in 0..depth {
                let o = base + d * pixels;
                for i in 0..pixels {
                    dx[o + i] = p.data()[o + i] * (g.data()[o + i] - dot[i]);
                }
            }
        }
        Ok(vec![Some(Tensor::from_parts(p.shape().clone(), dx))])
    })
}

/// In-place softmax over `depth` planes of `pixels` values each.
pub fn softmax_block<T: Element>(data: &mut [T], depth: usize, pixels: usize) {
    debug_assert_eq!(data.len(), depth * pixels);
    let mut max = data[..pixels].to_vec();
    for d in 1..depth {
        for (m, &v) in max.iter_mut().zip(&data[d * pixels..(d + 1) * pixels]) {
            if v > *m {
                *m = v;
            }
        }
    }
    let mut sum = vec![T::zero(); pixels];
    for d in 0..depth {
        let plane = &mut data[d * pixels..(d + 1) * pixels];
        for i in 0..pixels {
            let e = (plane[i] - max[i]).exp();
            plane[i] = e;
            sum[i] = sum[i] + e;
        }
    }
    for d in 0..depth {
        let plane = &mut data[d * pixels..(d + 1) * pixels];
        for i in 0..pixels {
            plane[i] = plane[i] / sum[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits() {
        let tape = Tape::<f64>::inference();
        let v = tape.constant(Tensor::full(&[4, 2, 3], 1.5).unwrap());
        let p = softmax_depth(&tape, &v).unwrap();
        assert!(p.value().data().iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn two_plane_closed_form() {
        let tape = Tape::<f64>::inference();
        let v = tape.constant(Tensor::from_vec(&[1, 2, 1, 1], vec![0.0, 3f64.ln()]).unwrap());
        let p = softmax_depth(&tape, &v).unwrap();
        assert!((p.value().data()[0] - 0.25).abs() < 1e-12);
        assert!((p.value().data()[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rejects_single_plane() {
        let tape = Tape::<f32>::inference();
        let v = tape.constant(Tensor::zeros(&[1, 1, 2, 2]).unwrap());
        assert!(softmax_depth(&tape, &v).is_err());
    }
}
