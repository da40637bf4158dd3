//! Rollout storage and generalized advantage estimation.

use serde::{Deserialize, Serialize};

/// One stored transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    /// Episode ended after this step (terminal or truncated).
    pub done: bool,
    /// Value of the successor state when the episode was truncated here
    /// (time limit) rather than genuinely terminal; folded into the TD
    /// residual by [`compute_gae`].
    pub bootstrap: f64,
}

/// Trajectories of one collection phase, env-major: all steps of env 0,
/// then env 1, and so on. Advantages are normalized to mean 0 / std 1 over
/// the whole batch before every update.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RolloutBuffer {
    pub transitions: Vec<Transition>,
    /// Steps per env segment.
    pub steps_per_env: usize,
    /// Per-env value of the state after the segment's last step, used to
    /// bootstrap a segment that ends mid-episode.
    pub tail_values: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn n_envs(&self) -> usize {
        self.tail_values.len()
    }
}

/// Fill `advantages` and `returns`.
///
/// Per segment, backwards: `delta_t = r_t + discount * V_{t+1} * (1 - done_t)
/// - V_t` and `A_t = delta_t + discount * lambda * (1 - done_t) * A_{t+1}`,
/// with `r_t` augmented by `discount * bootstrap_t` at truncations and the
/// segment tail bootstrapped from `tail_values` when it ends mid-episode.
/// Returns are `A_t + V_t`.
pub fn compute_gae(buffer: &mut RolloutBuffer, discount: f64, lambda: f64) {
    let n = buffer.len();
    buffer.advantages = vec![0.0; n];
    buffer.returns = vec![0.0; n];
    let steps = buffer.steps_per_env;
    for env in 0..buffer.n_envs() {
        let base = env * steps;
        let mut acc = 0.0;
        for t in (0..steps).rev() {
            let i = base + t;
            let tr = &buffer.transitions[i];
            let (next_value, nonterminal) = if tr.done {
                (0.0, 0.0)
            } else if t == steps - 1 {
                (buffer.tail_values[env], 1.0)
            } else {
                (buffer.transitions[i + 1].value, 1.0)
            };
            let reward = tr.reward + discount * tr.bootstrap;
            let delta = reward + discount * next_value * nonterminal - tr.value;
            acc = delta + discount * lambda * nonterminal * acc;
            buffer.advantages[i] = acc;
            buffer.returns[i] = acc + tr.value;
        }
    }
}

/// Normalize advantages to zero mean and unit standard deviation in place.
pub fn normalize_advantages(buffer: &mut RolloutBuffer) {
    let n = buffer.advantages.len();
    if n == 0 {
        return;
    }
    let mean = buffer.advantages.iter().sum::<f64>() / n as f64;
    let var = buffer
        .advantages
        .iter()
        .map(|a| (a - mean) * (a - mean))
        .sum::<f64>()
        / n as f64;
    let std = var.sqrt().max(1e-8);
    for a in &mut buffer.advantages {
        *a = (*a - mean) / std;
    }
}
