//! Recurrent encoder-decoder regularization of one cost map.

use skysweep_diffcore::ops::{add, relu, transposed_conv2d};
use skysweep_diffcore::{Element, ParamStore, Tape, Tensor, Var};

use crate::error::{ModelError, Result};
use crate::features::conv;
use crate::gru::conv_gru_step;
use crate::params::{ConvParams, Regularizer, SCALE_CHANNELS};

/// Recurrent states of the four scales, carried across depth steps.
#[derive(Clone)]
pub struct GruStates<T> {
    pub states: [Var<T>; 4],
}

impl<T: Element> GruStates<T> {
    /// Zero states for cost maps of `height x width`.
    pub fn zeros(tape: &Tape<T>, height: usize, width: usize) -> Result<Self> {
        let state = |k: usize| -> Result<Var<T>> {
            let (h, w) = (height >> k, width >> k);
            Ok(tape.constant(Tensor::zeros(&[1, SCALE_CHANNELS[k], h, w])?))
        };
        Ok(GruStates { states: [state(0)?, state(1)?, state(2)?, state(3)?] })
    }

    /// Expected shape of each state for cost maps of `height x width`.
    pub fn expected_dims(height: usize, width: usize) -> [[usize; 4]; 4] {
        std::array::from_fn(|k| [1, SCALE_CHANNELS[k], height >> k, width >> k])
    }
}

fn upconv<T: Element>(tape: &Tape<T>, store: &ParamStore<T>, layer: &ConvParams, x: &Var<T>) -> Result<Var<T>> {
    let w = tape.param(store, layer.weight);
    let b = tape.param(store, layer.bias);
    Ok(transposed_conv2d(tape, x, &w, &b, layer.stride)?)
}

/// Regularizes one cost map `[1,16,h,w]`; returns the single-channel
/// output map and the updated states.
///
/// Encoder scale k (k = 1..4) is `relu(conv)` of scale k-1 and feeds its own
/// recurrent cell. The decoder starts from the deepest cell output; each
/// `relu(upconv)` is added to the cell output of the scale it reaches, and
/// the head upconvolution maps scale 1 to the output resolution.
pub fn red_regularize_step<T: Element>(
    tape: &Tape<T>,
    red: &Regularizer,
    store: &ParamStore<T>,
    cost: &Var<T>,
    states: &GruStates<T>,
) -> Result<(Var<T>, GruStates<T>)> {
    let dims = cost.dims();
    if dims.len() != 4 || dims[0] != 1 {
        return Err(ModelError::Contract(format!("expected a cost map [1,C,h,w], got {dims:?}")));
    }
    let (h, w) = (dims[2], dims[3]);
    if h % 8 != 0 || w % 8 != 0 {
        return Err(ModelError::Contract(format!("cost map extents {h}x{w} must be multiples of 8")));
    }
    let expected = GruStates::<T>::expected_dims(h, w);
    for (k, (s, e)) in states.states.iter().zip(expected.iter()).enumerate() {
        if s.dims() != e {
            return Err(ModelError::Contract(format!("state {k} has shape {:?}, expected {e:?}", s.dims())));
        }
    }
    let mut x = cost.clone();
    let mut next: Vec<Var<T>> = Vec::with_capacity(4);
    for (k, layer) in red.encoder.iter().enumerate() {
        x = relu(tape, &conv(tape, store, layer, &x)?)?;
        next.push(conv_gru_step(tape, &red.cells[k], store, &x, &states.states[k])?);
    }
    let mut d = next[3].clone();
    for (i, layer) in red.decoder.iter().enumerate() {
        let up = relu(tape, &upconv(tape, store, layer, &d)?)?;
        d = add(tape, &up, &next[2 - i])?;
    }
    let out = upconv(tape, store, &red.head, &d)?;
    let states = GruStates { states: [next[0].clone(), next[1].clone(), next[2].clone(), next[3].clone()] };
    Ok((out, states))
}
