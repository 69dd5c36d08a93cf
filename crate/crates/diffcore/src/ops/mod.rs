//! Differentiable operations. Each validates its inputs, computes the
//! output eagerly and records a backward closure on the tape.

mod combine;
mod conv;
mod direct;
mod elementwise;
mod loss;
mod softmax;

pub use combine::{add, combine, concat_channels, hadamard, slice_channels, sub, CombineKind};
pub use conv::{conv2d, transposed_conv2d, Padding};
pub use elementwise::{elementwise, relu, sigmoid_op as sigmoid, tanh_op as tanh, Activation};
pub use loss::{cross_entropy_masked, sum, weighted_sum, LOG_EPSILON};
pub use softmax::{softmax_block, softmax_depth};
