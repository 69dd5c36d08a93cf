//! Parameter layout, initialization and binding.
//!
//! Every tensor is addressed by a stable name, e.g. `extract.conv3.weight`
//! or `red.gru2.gates.bias`, so checkpoints can be validated against the
//! layout a configuration expects.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skysweep_diffcore::{Element, ParamId, ParamStore, Tensor};

use crate::config::{NetConfig, Resolution};
use crate::error::{ModelError, Result};

/// Encoder / recurrent-cell channels per scale.
pub const SCALE_CHANNELS: [usize; 4] = [8, 16, 32, 64];
/// Feature channels delivered by the extractor.
pub const FEATURE_CHANNELS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    Conv,
    /// Weight layout `[in_c, out_c, k, k]`.
    Transposed,
}

/// One convolution-like layer of the network.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    pub in_c: usize,
    pub out_c: usize,
    pub kernel: usize,
    pub stride: usize,
}

impl LayerSpec {
    fn conv(name: &str, in_c: usize, out_c: usize, kernel: usize, stride: usize) -> Self {
        LayerSpec { name: name.into(), kind: LayerKind::Conv, in_c, out_c, kernel, stride }
    }

    fn transposed(name: &str, in_c: usize, out_c: usize, stride: usize) -> Self {
        LayerSpec { name: name.into(), kind: LayerKind::Transposed, in_c, out_c, kernel: 3, stride }
    }

    pub fn weight_dims(&self) -> [usize; 4] {
        match self.kind {
            LayerKind::Conv => [self.out_c, self.in_c, self.kernel, self.kernel],
            LayerKind::Transposed => [self.in_c, self.out_c, self.kernel, self.kernel],
        }
    }

    /// Inputs contributing to one output value.
    fn fan_in(&self) -> usize {
        let taps = self.in_c * self.kernel * self.kernel;
        match self.kind {
            LayerKind::Conv => taps,
            LayerKind::Transposed => (taps / (self.stride * self.stride)).max(1),
        }
    }

    pub fn scalar_count(&self) -> usize {
        self.weight_dims().iter().product::<usize>() + self.out_c
    }
}

/// Feature-extractor layers in execution order.
pub fn extractor_specs(config: &NetConfig) -> Vec<LayerSpec> {
    let mut layers = vec![
        LayerSpec::conv("extract.conv1", 3, 8, 3, 1),
        LayerSpec::conv("extract.conv2", 8, 8, 3, 1),
        LayerSpec::conv("extract.conv3", 8, 16, 5, 2),
        LayerSpec::conv("extract.conv4", 16, 16, 3, 1),
        LayerSpec::conv("extract.conv5", 16, 16, 3, 1),
    ];
    if config.resolution == Resolution::Quarter {
        layers.push(LayerSpec::conv("extract.down", 16, 16, 3, 2));
    }
    layers
}

/// Regularizer layers: encoder, recurrent cells, decoder, output head.
pub fn regularizer_specs(config: &NetConfig) -> Vec<LayerSpec> {
    let [c1, c2, c3, c4] = SCALE_CHANNELS;
    let mut layers = vec![
        LayerSpec::conv("red.enc1", FEATURE_CHANNELS, c1, 3, 1),
        LayerSpec::conv("red.enc2", c1, c2, 3, 2),
        LayerSpec::conv("red.enc3", c2, c3, 3, 2),
        LayerSpec::conv("red.enc4", c3, c4, 3, 2),
    ];
    for (k, &c) in SCALE_CHANNELS.iter().enumerate() {
        layers.push(LayerSpec::conv(&format!("red.gru{}.gates", k + 1), 2 * c, 2 * c, 3, 1));
        layers.push(LayerSpec::conv(&format!("red.gru{}.candidate", k + 1), 2 * c, c, 3, 1));
    }
    layers.push(LayerSpec::transposed("red.dec3", c4, c3, 2));
    layers.push(LayerSpec::transposed("red.dec2", c3, c2, 2));
    layers.push(LayerSpec::transposed("red.dec1", c2, c1, 2));
    let head_stride = match config.resolution {
        Resolution::Full => 2,
        Resolution::Quarter => 1,
    };
    layers.push(LayerSpec::transposed("red.head", c1, 1, head_stride));
    layers
}

/// Handles to one layer's weight and bias.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvParams {
    pub weight: ParamId,
    pub bias: ParamId,
    pub stride: usize,
}

/// Gated recurrent cell: one convolution yields both gates (reset channels
/// first, then update), another the candidate state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GruCell {
    pub gates: ConvParams,
    pub candidate: ConvParams,
    pub channels: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureExtractor {
    pub layers: Vec<ConvParams>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Regularizer {
    pub encoder: [ConvParams; 4],
    pub cells: [GruCell; 4],
    pub decoder: [ConvParams; 3],
    pub head: ConvParams,
}

/// Parameter handles of the whole network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedNet {
    pub config: NetConfig,
    pub extractor: FeatureExtractor,
    pub regularizer: Regularizer,
}

fn all_specs(config: &NetConfig) -> Vec<LayerSpec> {
    let mut specs = extractor_specs(config);
    specs.extend(regularizer_specs(config));
    specs
}

impl RedNet {
    /// Fresh parameters: weights uniform in `±sqrt(6 / fan_in)`, zero biases.
    pub fn init<T: Element>(config: NetConfig, seed: u64) -> Result<(RedNet, ParamStore<T>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        for spec in all_specs(&config) {
            let dims = spec.weight_dims();
            let bound = (6.0 / spec.fan_in() as f64).sqrt();
            let n: usize = dims.iter().product();
            let w: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-bound..bound))).collect();
            store.insert(format!("{}.weight", spec.name), Tensor::from_vec(&dims, w)?)?;
            store.insert(format!("{}.bias", spec.name), Tensor::zeros(&[spec.out_c])?)?;
        }
        let net = Self::bind(config, &store)?;
        Ok((net, store))
    }

    /// Resolves handles in an existing store, checking names and shapes.
    pub fn bind<T: Element>(config: NetConfig, store: &ParamStore<T>) -> Result<RedNet> {
        let specs = all_specs(&config);
        let expected = 2 * specs.len();
        if store.len() != expected {
            return Err(ModelError::Incompatible {
                name: format!("{} network", config.resolution.name()),
                expected: format!("{expected} tensors"),
                found: format!("{} tensors", store.len()),
            });
        }
        let lookup = |name: String, dims: &[usize]| -> Result<ParamId> {
            let id = store.id(&name).ok_or_else(|| ModelError::Incompatible {
                name: name.clone(),
                expected: format!("{dims:?}"),
                found: "missing".into(),
            })?;
            let found = store.get(id).value.dims();
            if found != dims {
                return Err(ModelError::Incompatible { name, expected: format!("{dims:?}"), found: format!("{found:?}") });
            }
            Ok(id)
        };
        let mut layers = Vec::with_capacity(specs.len());
        for s in &specs {
            layers.push(ConvParams {
                weight: lookup(format!("{}.weight", s.name), &s.weight_dims())?,
                bias: lookup(format!("{}.bias", s.name), &[s.out_c])?,
                stride: s.stride,
            });
        }
        let n_extract = extractor_specs(&config).len();
        let red = &layers[n_extract..];
        let cell = |k: usize| GruCell { gates: red[4 + 2 * k], candidate: red[5 + 2 * k], channels: SCALE_CHANNELS[k] };
        Ok(RedNet {
            config,
            extractor: FeatureExtractor { layers: layers[..n_extract].to_vec() },
            regularizer: Regularizer {
                encoder: [red[0], red[1], red[2], red[3]],
                cells: [cell(0), cell(1), cell(2), cell(3)],
                decoder: [red[12], red[13], red[14]],
                head: red[15],
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded() {
        let (_, a) = RedNet::init::<f32>(NetConfig::default(), 4).unwrap();
        let (_, b) = RedNet::init::<f32>(NetConfig::default(), 4).unwrap();
        let (_, c) = RedNet::init::<f32>(NetConfig::default(), 5).unwrap();
        let first = |s: &ParamStore<f32>| s.iter().next().unwrap().value.data().to_vec();
        assert_eq!(first(&a), first(&b));
        assert_ne!(first(&a), first(&c));
    }

    #[test]
    fn bind_rejects_other_resolution() {
        let (_, store) = RedNet::init::<f32>(NetConfig { resolution: Resolution::Quarter }, 1).unwrap();
        let err = RedNet::bind(NetConfig::default(), &store).unwrap_err();
        assert!(matches!(err, ModelError::Incompatible { .. }), "{err}");
    }

    #[test]
    fn bind_reports_shape_mismatch() {
        let (_, mut store) = RedNet::init::<f32>(NetConfig::default(), 1).unwrap();
        let id = store.id("red.head.bias").unwrap();
        store.get_mut(id).value = std::sync::Arc::new(Tensor::zeros(&[2]).unwrap());
        match RedNet::bind(NetConfig::default(), &store) {
            Err(ModelError::Incompatible { name, expected, found }) => {
                assert_eq!(name, "red.head.bias");
                assert_eq!(expected, "[1]");
                assert_eq!(found, "[2]");
            }
            other => panic!("{other:?}"),
        }
    }
}
