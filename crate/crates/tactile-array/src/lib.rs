//! Tactile taxel arrays for gripper finger pads.
//!
//! Each taxel is a one-dimensional spring-damper slide element. Contact
//! normal forces resolved by `dynamics-core` are attributed to nearby taxels
//! with normalized inverse-distance weights, each taxel integrates its
//! displacement under the attributed load, and the scalar reading is
//! `k*x + b*x_dot`, clamped at zero. Observations for a policy are uniform
//! point-samples of the reading grids (no pooling), concatenated over pads
//! in a fixed order.

mod array;
mod observation;
mod system;

pub use array::{ReadingGrid, Taxel, TaxelArray, TaxelParams, TaxelSpec, TaxelState};
pub use observation::{downsample, observation_len, tactile_observation};
pub use system::{update_taxels, TactileSystem};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TactileError {
    /// Wiring problem: a contact touched a declared pad that has no array,
    /// or an array was registered twice.
    #[error("tactile configuration error: {0}")]
    Config(String),

    /// Bad operation argument (zero stride, shape mismatch, ...).
    #[error("invalid argument: {0}")]
    Argument(String),
}
