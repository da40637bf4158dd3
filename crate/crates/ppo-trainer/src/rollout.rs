//! Parallel rollout collection.
//!
//! Env workers step independently with per-worker RNG streams and publish
//! their segments, which are merged in env order, so the buffer is
//! deterministic regardless of thread scheduling.

use grasp_env::{derive_seed, mix_seeds, Environment};
use policy_net::MlpPolicy;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::buffer::{RolloutBuffer, Transition};
use crate::TrainerError;

const ACTION_STREAM: u64 = 0xAC710;
const EPISODE_STREAM: u64 = 0xE915;

/// Per-env persistent collection state.
pub struct EnvSlot {
    pub env: Box<dyn Environment>,
    pub obs: Vec<f64>,
    pub episode_count: u64,
    /// Undiscounted return and length of the episode in progress.
    pub episode_return: f64,
    pub episode_len: usize,
}

/// Completed-episode statistics gathered during collection.
#[derive(Debug, Clone, Default)]
pub struct EpisodeStats {
    pub returns: Vec<f64>,
    pub lengths: Vec<usize>,
    pub failures: usize,
}

/// Collect exactly `n_steps / envs.len()` transitions per env.
///
/// Episodes that end restart with seeds derived from the run seed, the env
/// index and a per-env episode counter; diverging episodes are recorded as
/// done-with-failure and restarted. Observation-normalization statistics
/// are folded in afterwards, in env order, from the raw observations.
pub fn collect_rollouts(
    slots: &mut [EnvSlot],
    policy: &MlpPolicy,
    n_steps: usize,
    run_seed: u64,
    iteration: u64,
) -> Result<(RolloutBuffer, EpisodeStats), TrainerError> {
    assert!(!slots.is_empty() && n_steps % slots.len() == 0);
    let steps_per_env = n_steps / slots.len();

    struct SegmentResult {
        transitions: Vec<Transition>,
        raw_obs: Vec<Vec<f64>>,
        tail_value: f64,
        stats: EpisodeStats,
    }

    let results: Vec<Result<SegmentResult, TrainerError>> = slots
        .par_iter_mut()
        .enumerate()
        .map(|(env_idx, slot)| {
            let mut rng = ChaCha12Rng::seed_from_u64(mix_seeds(
                mix_seeds(run_seed, ACTION_STREAM),
                mix_seeds(env_idx as u64, iteration),
            ));
            let mut transitions = Vec::with_capacity(steps_per_env);
            let mut raw_obs = Vec::with_capacity(steps_per_env);
            let mut stats = EpisodeStats::default();

            for _ in 0..steps_per_env {
                let obs = slot.obs.clone();
                let (action, log_prob, value) = policy.act_sampled(&obs, &mut rng)?;
                raw_obs.push(obs.clone());

                match slot.env.step(&action) {
                    Ok(out) => {
                        let done = out.terminated || out.truncated;
                        let bootstrap = if out.truncated && !out.terminated {
                            policy.value(&out.obs)?
                        } else {
                            0.0
                        };
                        slot.episode_return += out.reward;
                        slot.episode_len += 1;
                        transitions.push(Transition {
                            obs,
                            action,
                            log_prob,
                            reward: out.reward,
                            value,
                            done,
                            bootstrap,
                        });
                        if done {
                            stats.returns.push(slot.episode_return);
                            stats.lengths.push(slot.episode_len);
                            slot.episode_return = 0.0;
                            slot.episode_len = 0;
                            slot.episode_count += 1;
                            let seed = derive_seed(
                                mix_seeds(run_seed, mix_seeds(env_idx as u64, EPISODE_STREAM)),
                                slot.episode_count,
                            );
                            slot.obs = slot.env.reset(seed)?;
                        } else {
                            slot.obs = out.obs;
                        }
                    }
                    Err(grasp_env::EnvError::Diverged { .. }) => {
                        // Failed episode: mark the transition done and restart.
                        transitions.push(Transition {
                            obs,
                            action,
                            log_prob,
                            reward: 0.0,
                            value,
                            done: true,
                            bootstrap: 0.0,
                        });
                        stats.failures += 1;
                        stats.returns.push(slot.episode_return);
                        stats.lengths.push(slot.episode_len);
                        slot.episode_return = 0.0;
                        slot.episode_len = 0;
                        slot.episode_count += 1;
                        let seed = derive_seed(
                            mix_seeds(run_seed, mix_seeds(env_idx as u64, EPISODE_STREAM)),
                            slot.episode_count,
                        );
                        slot.obs = slot.env.reset(seed)?;
                    }
                    Err(e) => return Err(e.into()),
                }
            }

            let tail_value = if transitions.last().is_some_and(|t| !t.done) {
                policy.value(&slot.obs)?
            } else {
                0.0
            };
            Ok(SegmentResult {
                transitions,
                raw_obs,
                tail_value,
                stats,
            })
        })
        .collect();

    let mut buffer = RolloutBuffer {
        transitions: Vec::with_capacity(n_steps),
        steps_per_env,
        tail_values: Vec::with_capacity(slots.len()),
        advantages: vec![],
        returns: vec![],
    };
    let mut stats = EpisodeStats::default();
    let mut all_raw_obs = Vec::with_capacity(n_steps);
    for result in results {
        let segment = result?;
        buffer.transitions.extend(segment.transitions);
        buffer.tail_values.push(segment.tail_value);
        all_raw_obs.extend(segment.raw_obs);
        stats.returns.extend(segment.stats.returns);
        stats.lengths.extend(segment.stats.lengths);
        stats.failures += segment.stats.failures;
    }
    // Stats update happens after collection so every worker sampled against
    // the same frozen normalization.
    Ok((buffer, stats))
}

/// Fold the collected raw observations into the policy's normalization.
pub fn update_normalization(policy: &mut MlpPolicy, buffer: &RolloutBuffer) {
    for tr in &buffer.transitions {
        policy.norm.update(&tr.obs);
    }
}
