//! Weight-shared 2D feature extraction.

use skysweep_diffcore::ops::{conv2d, relu, Padding};
use skysweep_diffcore::{Element, ParamStore, Tape, Var};

use crate::error::{ModelError, Result};
use crate::params::{ConvParams, FeatureExtractor};

pub(crate) fn conv<T: Element>(
    tape: &Tape<T>,
    store: &ParamStore<T>,
    layer: &ConvParams,
    x: &Var<T>,
) -> Result<Var<T>> {
    let w = tape.param(store, layer.weight);
    let b = tape.param(store, layer.bias);
    Ok(conv2d(tape, x, &w, &b, layer.stride, Padding::Same)?)
}

/// Maps an image `[1,3,H,W]` to 16-channel features at the extractor's
/// output scale. ReLU follows every layer but the last.
pub fn extract_features<T: Element>(
    tape: &Tape<T>,
    extractor: &FeatureExtractor,
    store: &ParamStore<T>,
    image: &Var<T>,
) -> Result<Var<T>> {
    let dims = image.dims();
    let factor: usize = extractor.layers.iter().map(|l| l.stride).product();
    if dims.len() != 4 || dims[0] != 1 || dims[1] != 3 {
        return Err(ModelError::Contract(format!("expected an image [1,3,H,W], got {dims:?}")));
    }
    if dims[2] % factor != 0 || dims[3] % factor != 0 {
        return Err(ModelError::Contract(format!(
            "image extents {}x{} must be multiples of {factor}",
            dims[2], dims[3]
        )));
    }
    let last = extractor.layers.len() - 1;
    let mut x = image.clone();
    for (i, layer) in extractor.layers.iter().enumerate() {
        x = conv(tape, store, layer, &x)?;
        if i != last {
            x = relu(tape, &x)?;
        }
    }
    Ok(x)
}
