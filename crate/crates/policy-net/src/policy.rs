//! The policy bundle: network parameters plus observation statistics, with
//! versioned JSON checkpointing.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::gaussian;
use crate::mlp::MlpParams;
use crate::norm::RunningNorm;
use crate::PolicyError;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Actor-critic policy with frozen-at-evaluation observation normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpPolicy {
    pub params: MlpParams,
    pub norm: RunningNorm,
    /// Environment steps consumed by training so far.
    pub train_steps: u64,
}

/// On-disk checkpoint document.
#[derive(Debug, Serialize, Deserialize)]
struct CheckpointDoc {
    version: u32,
    policy: MlpPolicy,
}

impl MlpPolicy {
    pub fn new(obs_dim: usize, action_dim: usize, hidden: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        MlpPolicy {
            params: MlpParams::init(obs_dim, action_dim, hidden, &mut rng),
            norm: RunningNorm::new(obs_dim),
            train_steps: 0,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.params.obs_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.params.action_dim
    }

    /// Stochastic action for rollout collection:
    /// `(action, log_prob, value)`.
    pub fn act_sampled(
        &self,
        obs: &[f64],
        rng: &mut impl Rng,
    ) -> Result<(Vec<f64>, f64, f64), PolicyError> {
        let normalized = self.norm.normalize(obs);
        let (mean, std, value) = self.params.forward(&normalized)?;
        let action = gaussian::sample(&mean, &std, rng);
        let log_prob = gaussian::log_prob(&mean, &std, &action);
        Ok((action, log_prob, value))
    }

    /// Deterministic (mean) action for evaluation.
    pub fn act_mean(&self, obs: &[f64]) -> Result<Vec<f64>, PolicyError> {
        let normalized = self.norm.normalize(obs);
        let (mean, _, _) = self.params.forward(&normalized)?;
        Ok(mean)
    }

    /// State value under the current critic.
    pub fn value(&self, obs: &[f64]) -> Result<f64, PolicyError> {
        let normalized = self.norm.normalize(obs);
        let (_, _, value) = self.params.forward(&normalized)?;
        Ok(value)
    }

    pub fn save(&self, path: &Path) -> Result<(), PolicyError> {
        let doc = CheckpointDoc {
            version: CHECKPOINT_VERSION,
            policy: self.clone(),
        };
        let json = serde_json::to_string(&doc)?;
        fs::write(path, json)?;
        Ok(())
    }

    /// Load and validate a checkpoint. Shape inconsistencies (including a
    /// normalization block that disagrees with the network input) are
    /// rejected, not repaired.
    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        let json = fs::read_to_string(path)?;
        let doc: CheckpointDoc = serde_json::from_str(&json)?;
        if doc.version != CHECKPOINT_VERSION {
            return Err(PolicyError::Shape(format!(
                "checkpoint version {} unsupported (expected {CHECKPOINT_VERSION})",
                doc.version
            )));
        }
        doc.policy.params.validate_shapes()?;
        if doc.policy.norm.dim() != doc.policy.params.obs_dim() {
            return Err(PolicyError::Shape(
                "normalization dim does not match network input".into(),
            ));
        }
        Ok(doc.policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.json");
        let policy = MlpPolicy::new(6, 3, &[16, 16], 42);
        policy.save(&path).unwrap();
        let back = MlpPolicy::load(&path).unwrap();
        assert_eq!(policy, back);
    }

    #[test]
    fn corrupted_shapes_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.json");
        let mut policy = MlpPolicy::new(6, 3, &[16], 42);
        policy.norm = RunningNorm::new(5); // wrong dim on purpose
        policy.save(&path).unwrap();
        assert!(MlpPolicy::load(&path).is_err());
    }

    #[test]
    fn mean_action_is_reproducible() {
        let policy = MlpPolicy::new(4, 2, &[8], 7);
        let obs = [0.1, -0.5, 0.3, 0.9];
        assert_eq!(
            policy.act_mean(&obs).unwrap(),
            policy.act_mean(&obs).unwrap()
        );
    }
}
