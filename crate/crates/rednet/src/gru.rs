//! Convolutional gated recurrent cell.

use skysweep_diffcore::ops::{concat_channels, hadamard, sigmoid, slice_channels, tanh};
use skysweep_diffcore::{Element, ParamStore, Tape, Tensor, Var};

use crate::error::{ModelError, Result};
use crate::features::conv;
use crate::params::GruCell;

/// `(1 - u) ⊙ h + u ⊙ c`.
fn blend<T: Element>(tape: &Tape<T>, u: &Var<T>, h: &Var<T>, c: &Var<T>) -> Result<Var<T>> {
    let out: Vec<T> = u
        .value()
        .data()
        .iter()
        .zip(h.value().data())
        .zip(c.value().data())
        .map(|((&u, &h), &c)| (T::one() - u) * h + u * c)
        .collect();
    let dims = h.dims().to_vec();
    let out = Tensor::from_vec(&dims, out)?;
    let saved = tape.is_recording().then(|| (u.value_arc(), h.value_arc(), c.value_arc()));
    Ok(tape.record("gru_blend", out, &[u, h, c], move |g, needs| {
        let (u, h, c) = saved.expect("recorded blend keeps its inputs");
        let (u, h, c, g) = (u.data(), h.data(), c.data(), g.data());
        let grad = |need: bool, f: &dyn Fn(usize) -> T| -> skysweep_diffcore::Result<Option<Tensor<T>>> {
            if !need {
                return Ok(None);
            }
            Ok(Some(Tensor::from_vec(&dims, (0..g.len()).map(f).collect())?))
        };
        Ok(vec![
            grad(needs[0], &|i| g[i] * (c[i] - h[i]))?,
            grad(needs[1], &|i| g[i] * (T::one() - u[i]))?,
            grad(needs[2], &|i| g[i] * u[i])?,
        ])
    })?)
}

/// One recurrent update of `h_prev` by input `x` (both `[1,C,h,w]`).
///
/// `r, u = sigmoid(conv([h_prev, x]))`, `c = tanh(conv([r ⊙ h_prev, x]))`,
/// `h = (1 - u) ⊙ h_prev + u ⊙ c`.
pub fn conv_gru_step<T: Element>(
    tape: &Tape<T>,
    cell: &GruCell,
    store: &ParamStore<T>,
    x: &Var<T>,
    h_prev: &Var<T>,
) -> Result<Var<T>> {
    if x.dims() != h_prev.dims() {
        return Err(ModelError::Contract(format!(
            "recurrent input {:?} and state {:?} differ",
            x.dims(),
            h_prev.dims()
        )));
    }
    if x.dims().len() != 4 || x.dims()[1] != cell.channels {
        return Err(ModelError::Contract(format!(
            "cell expects [1,{},h,w], got {:?}",
            cell.channels,
            x.dims()
        )));
    }
    let c = cell.channels;
    let hx = concat_channels(tape, &[h_prev, x])?;
    let gates = sigmoid(tape, &conv(tape, store, &cell.gates, &hx)?)?;
    let r = slice_channels(tape, &gates, 0, c)?;
    let u = slice_channels(tape, &gates, c, c)?;
    let rh = hadamard(tape, &r, h_prev)?;
    let rhx = concat_channels(tape, &[&rh, x])?;
    let cand = tanh(tape, &conv(tape, store, &cell.candidate, &rhx)?)?;
    blend(tape, &u, h_prev, &cand)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NetConfig;
    use crate::params::RedNet;
    use skysweep_diffcore::ops::{conv2d, Padding};

    fn setup() -> (RedNet, ParamStore<f64>, Tensor<f64>, Tensor<f64>) {
        let (net, store) = RedNet::init::<f64>(NetConfig::default(), 9).unwrap();
        let x = Tensor::from_vec(&[1, 8, 4, 5], (0..160).map(|i| ((i * 37 % 17) as f64 - 8.0) / 5.0).collect()).unwrap();
        let h = Tensor::from_vec(&[1, 8, 4, 5], (0..160).map(|i| ((i * 11 % 13) as f64 - 6.0) / 7.0).collect()).unwrap();
        (net, store, x, h)
    }

    fn set_update_bias(store: &mut ParamStore<f64>, cell: &GruCell, reset: f64, update: f64) {
        let c = cell.channels;
        let b: Vec<f64> = (0..2 * c).map(|i| if i < c { reset } else { update }).collect();
        store.set_value(cell.gates.bias, Tensor::from_vec(&[2 * c], b).unwrap()).unwrap();
    }

    #[test]
    fn closed_update_gate_keeps_state() {
        let (net, mut store, x, h) = setup();
        let cell = net.regularizer.cells[0];
        set_update_bias(&mut store, &cell, 0.0, -1e4);
        let tape = Tape::inference();
        let out = conv_gru_step(&tape, &cell, &store, &tape.constant(x), &tape.constant(h.clone())).unwrap();
        assert_eq!(out.value().data(), h.data());
    }

    #[test]
    fn open_gates_give_candidate() {
        let (net, mut store, x, h) = setup();
        let cell = net.regularizer.cells[0];
        set_update_bias(&mut store, &cell, 1e4, 1e4);
        let tape = Tape::inference();
        let (xv, hv) = (tape.constant(x), tape.constant(h));
        let out = conv_gru_step(&tape, &cell, &store, &xv, &hv).unwrap();
        let hx = concat_channels(&tape, &[&hv, &xv]).unwrap();
        let w = tape.param(&store, cell.candidate.weight);
        let b = tape.param(&store, cell.candidate.bias);
        let expect = tanh(&tape, &conv2d(&tape, &hx, &w, &b, 1, Padding::Same).unwrap()).unwrap();
        assert_eq!(out.value().data(), expect.value().data());
    }

    #[test]
    fn mismatched_shapes() {
        let (net, store, x, _) = setup();
        let tape = Tape::inference();
        let h = Tensor::zeros(&[1, 8, 4, 4]).unwrap();
        assert!(conv_gru_step(&tape, &net.regularizer.cells[0], &store, &tape.constant(x), &tape.constant(h)).is_err());
    }
}
