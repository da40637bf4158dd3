use thiserror::Error;

use crate::types::{BodyId, GeomId};

/// Errors produced while validating or stepping a world.
#[derive(Debug, Error)]
pub enum DynamicsError {
    /// A model parameter violated its invariant (non-positive dimension,
    /// asymmetric inertia tensor, impedance outside [0, 1], ...).
    #[error("model validation failed: {0}")]
    ModelValidation(String),

    /// Narrow phase has no routine for this shape pair. Raised loudly so a
    /// scene can never silently lose contacts.
    #[error("unsupported collision pair: {a:?} ({a_shape}) vs {b:?} ({b_shape})")]
    UnsupportedPair {
        a: GeomId,
        b: GeomId,
        a_shape: &'static str,
        b_shape: &'static str,
    },

    /// A state component became NaN or infinite during integration.
    #[error("simulation diverged at t={time}: body {body:?} has non-finite state")]
    SimulationDiverged { body: BodyId, time: f64 },

    /// Scene document failed to parse or referenced missing entities.
    #[error("scene config error: {0}")]
    Config(String),
}

impl DynamicsError {
    pub fn model(msg: impl Into<String>) -> Self {
        DynamicsError::ModelValidation(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        DynamicsError::Config(msg.into())
    }
}
