//! Minimal deterministic reverse-mode tensor engine.
//!
//! Provides exactly what the depth network needs: 2D (transposed)
//! convolution, pointwise activations, channel combination, a depth-axis
//! softmax, masked cross-entropy, RMSProp and a binary checkpoint format.
//! Everything runs single-threaded so results are bit-reproducible.

pub mod checkpoint;
pub mod element;
pub mod error;
pub mod gradcheck;
pub mod memory;
pub mod ops;
pub mod optim;
pub mod param;
pub mod tape;
pub mod tensor;

pub use element::Element;
pub use error::{Error, Result};
pub use param::{ParamId, ParamStore, Parameter};
pub use tape::{backward, Gradients, Tape, Var};
pub use tensor::{Shape, Tensor};
