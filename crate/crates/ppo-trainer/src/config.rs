//! PPO hyperparameters and trainer settings.

use serde::{Deserialize, Serialize};

use crate::TrainerError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    /// Clipped-surrogate epsilon.
    pub clip_eps: f64,
    /// Discount factor.
    pub discount: f64,
    /// GAE interpolation between one-step TD (0) and Monte Carlo (1).
    pub gae_lambda: f64,
    /// Transitions collected per update, summed over envs.
    pub rollout_steps: usize,
    /// Passes over the buffer per update.
    pub epochs: usize,
    /// Minibatch size.
    pub minibatch: usize,
    /// Adam learning rate.
    pub lr: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Environment-step training budget.
    pub max_steps: u64,
    /// Parallel environment workers.
    pub n_envs: usize,
    /// Hidden layer widths of the actor-critic trunk.
    pub hidden: Vec<usize>,
    /// Environment steps between evaluations.
    pub eval_interval: u64,
    /// Deterministic (mean-action) episodes per evaluation.
    pub eval_episodes: usize,
    /// Convergence window in environment steps (>= 1000).
    pub convergence_window: u64,
    /// Relative-change threshold of the convergence criterion.
    pub convergence_threshold: f64,
    /// Windowed std/|mean| ratio above which training counts as
    /// exploration oscillation.
    pub oscillation_threshold: f64,
    /// Stop as soon as the convergence criterion holds.
    pub stop_on_convergence: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            clip_eps: 0.2,
            discount: 0.99,
            gae_lambda: 0.95,
            rollout_steps: 2048,
            epochs: 10,
            minibatch: 64,
            lr: 3e-4,
            entropy_coef: 0.01,
            value_coef: 0.5,
            max_steps: 300_000,
            n_envs: 8,
            hidden: vec![128, 128],
            eval_interval: 10_000,
            eval_episodes: 10,
            convergence_window: 30_000,
            convergence_threshold: 0.05,
            oscillation_threshold: 0.5,
            stop_on_convergence: true,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), TrainerError> {
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return Err(TrainerError::Config("clip_eps must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(TrainerError::Config("discount must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(TrainerError::Config("gae_lambda must lie in [0, 1]".into()));
        }
        if self.n_envs == 0 || self.rollout_steps == 0 || self.rollout_steps % self.n_envs != 0 {
            return Err(TrainerError::Config(
                "rollout_steps must be a positive multiple of n_envs".into(),
            ));
        }
        if self.epochs == 0 || self.minibatch == 0 {
            return Err(TrainerError::Config("epochs and minibatch must be >= 1".into()));
        }
        if !(self.lr > 0.0) {
            return Err(TrainerError::Config("lr must be > 0".into()));
        }
        if self.convergence_window < 1000 {
            return Err(TrainerError::Config(
                "convergence_window must cover at least 1000 environment steps".into(),
            ));
        }
        if self.eval_episodes == 0 {
            return Err(TrainerError::Config("eval_episodes must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert!(PpoConfig::default().validate().is_ok());
    }

    #[test]
    fn bad_values_rejected() {
        let mut cfg = PpoConfig::default();
        cfg.clip_eps = 1.5;
        assert!(cfg.validate().is_err());

        let mut cfg = PpoConfig::default();
        cfg.rollout_steps = 100;
        cfg.n_envs = 8; // not a multiple
        assert!(cfg.validate().is_err());

        let mut cfg = PpoConfig::default();
        cfg.convergence_window = 500;
        assert!(cfg.validate().is_err());
    }
}
