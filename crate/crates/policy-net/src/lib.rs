//! Small actor-critic network with exact analytic backpropagation.
//!
//! The trunk is a tanh MLP; the policy head emits a Gaussian mean with a
//! state-independent log standard deviation, the value head a scalar.
//! Gradients are computed by hand through the fixed graph and checked
//! against central finite differences in the test suite. No autograd, no
//! GPU.

mod adam;
mod gaussian;
pub mod gradcheck;
mod mlp;
mod norm;
mod policy;

pub use adam::{adam_update, AdamState, BETA1, BETA2, EPS};
pub use gaussian::{entropy, log_prob, log_prob_grads, sample};
pub use mlp::{
    ForwardBatch, ForwardCache, GradientBuffer, Layer, MlpParams, LOG_STD_MAX, LOG_STD_MIN,
};
pub use norm::RunningNorm;
pub use policy::{MlpPolicy, CHECKPOINT_VERSION};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolicyError {
    /// Tensor shapes disagree with the declared layout.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("checkpoint io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("checkpoint serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
