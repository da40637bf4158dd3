//! Adaptive grasping task built on `dynamics-core` and `tactile-array`.
//!
//! A parametric floating-base gripper must establish and hold fingertip
//! contact with one of four catalog objects without disturbing its pose.
//! The gripper starts from a pre-grasp with a seed-driven placement error;
//! the policy only sees the noisy object pose captured at reset, so touch is
//! the one sense that reveals where the object really is.

mod config;
mod env;
mod gripper;
mod objects;
mod reward;

pub use config::{
    derive_seed, mix_seeds, splitmix64, ActionLimits, GripperConfig, NoiseSpec, ObjectShape,
    RewardConfig, SuccessConfig, TactileConfig, TaskConfig,
};
pub use env::{
    observe_pose, trace_success, Action, GraspEnv, Observation, ScriptedCloser, StepRecord,
};
pub use gripper::{closing_angle, vertical_reach, GripperRig};
pub use objects::{catalog_object, ObjectSpec, REFERENCE_RADIUS};
pub use reward::{grasp_config_diff, object_pose_error, reward_from_parts, RewardBreakdown};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("task config error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("simulation diverged at control step {step}: {source}")]
    Diverged {
        step: usize,
        source: dynamics_core::DynamicsError,
    },
}

impl From<dynamics_core::DynamicsError> for EnvError {
    fn from(e: dynamics_core::DynamicsError) -> Self {
        EnvError::Config(e.to_string())
    }
}

impl From<tactile_array::TactileError> for EnvError {
    fn from(e: tactile_array::TactileError) -> Self {
        EnvError::Config(e.to_string())
    }
}

/// Result of one environment step through the generic interface.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// Episode ended in a terminal state (value bootstraps to zero).
    pub terminated: bool,
    /// Episode was cut off by the horizon (bootstrap from the final value).
    pub truncated: bool,
}

/// Minimal environment interface consumed by the trainer. Implementations
/// must be deterministic given the reset seed and the action sequence.
pub trait Environment: Send {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Result<Vec<f64>, EnvError>;
    fn step(&mut self, action: &[f64]) -> Result<StepOutcome, EnvError>;
}

impl Environment for GraspEnv {
    fn obs_dim(&self) -> usize {
        self.task().obs_dim()
    }

    fn action_dim(&self) -> usize {
        self.task().action_dim()
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>, EnvError> {
        GraspEnv::reset(self, seed).map(|obs| obs.flatten())
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome, EnvError> {
        let action = Action::from_flat(action, self.task().gripper.n_joints())?;
        let (obs, breakdown, done) = self.env_step(&action)?;
        Ok(StepOutcome {
            obs: obs.flatten(),
            reward: breakdown.total,
            terminated: false,
            truncated: done,
        })
    }
}
