//! Multi-view variance cost.

use skysweep_diffcore::{Element, Tape, Tensor, Var};

use crate::error::{ModelError, Result};

/// Element-wise variance `(1/N) Σ (V_i - m)²` of `N ≥ 2` equally shaped tensors.
pub fn aggregate_variance<T: Element>(tape: &Tape<T>, views: &[&Var<T>]) -> Result<Var<T>> {
    let n = views.len();
    if n < 2 {
        return Err(ModelError::Contract(format!("variance needs at least 2 views, got {n}")));
    }
    let dims = views[0].dims().to_vec();
    if let Some(v) = views.iter().find(|v| v.dims() != dims.as_slice()) {
        return Err(ModelError::Contract(format!("view shapes differ: {dims:?} vs {:?}", v.dims())));
    }
    let len = views[0].value().len();
    let inv_n = T::lit(1.0 / n as f64);
    let mut mean = vec![T::zero(); len];
    for v in views {
        for (m, &x) in mean.iter_mut().zip(v.value().data()) {
            *m = *m + x;
        }
    }
    mean.iter_mut().for_each(|m| *m = *m * inv_n);
    let mut cost = vec![T::zero(); len];
    for v in views {
        for ((c, &x), &m) in cost.iter_mut().zip(v.value().data()).zip(&mean) {
            let d = x - m;
            *c = *c + d * d;
        }
    }
    cost.iter_mut().for_each(|c| *c = *c * inv_n);
    let out = Tensor::from_vec(&dims, cost)?;
    let saved = tape.is_recording().then(|| (views.iter().map(|v| v.value_arc()).collect::<Vec<_>>(), mean));
    Ok(tape.record("aggregate_variance", out, views, move |g, needs| {
        let (inputs, mean) = saved.expect("recorded variance keeps its inputs");
        let scale = T::lit(2.0 / n as f64);
        Ok(inputs
            .iter()
            .zip(needs)
            .map(|(x, &need)| {
                need.then(|| {
                    let d: Vec<T> = x
                        .data()
                        .iter()
                        .zip(&mean)
                        .zip(g.data())
                        .map(|((&xi, &m), &gi)| scale * (xi - m) * gi)
                        .collect();
                    Tensor::from_vec(x.dims(), d).expect("gradient matches input shape")
                })
            })
            .collect())
    })?)
}
