//! Adam with bias correction over the network's parameter tensors.

use nalgebra::DMatrix;

use crate::mlp::{GradientBuffer, MlpParams};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

/// First/second moment estimates, congruent with the parameter tensors.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<DMatrix<f64>>,
    v: Vec<DMatrix<f64>>,
}

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        let zeros: Vec<DMatrix<f64>> = params
            .tensors()
            .iter()
            .map(|t| DMatrix::zeros(t.nrows(), t.ncols()))
            .collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// One Adam step. `step` is 1-based; gradients are averaged over
/// `grads.count` accumulations when it is nonzero. The log-std block is
/// projected back into its bounds afterwards.
pub fn adam_update(
    params: &mut MlpParams,
    grads: &GradientBuffer,
    state: &mut AdamState,
    lr: f64,
    step: u64,
) {
    let scale = if grads.count > 0 {
        1.0 / grads.count as f64
    } else {
        1.0
    };
    let t = step as i32;
    let bias1 = 1.0 - BETA1.powi(t);
    let bias2 = 1.0 - BETA2.powi(t);

    for ((param, grad), (m, v)) in params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        for i in 0..param.len() {
            let g = grad[i] * scale;
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            param[i] -= lr * m_hat / (v_hat.sqrt() + EPS);
        }
    }
    params.clamp_log_std();
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn small_params() -> MlpParams {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        MlpParams::init(3, 2, &[4], &mut rng)
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut params = small_params();
        let before = params.clone();
        let grads = GradientBuffer::zeros_like(&params);
        let mut state = AdamState::new(&params);
        adam_update(&mut params, &grads, &mut state, 3e-4, 1);
        assert_eq!(params, before);
    }

    #[test]
    fn first_step_magnitude_is_the_learning_rate() {
        let mut params = small_params();
        let before = params.clone();
        let mut grads = GradientBuffer::zeros_like(&params);
        for t in grads.tensors_mut() {
            t.fill(0.37); // any constant gradient
        }
        grads.count = 1;
        let mut state = AdamState::new(&params);
        let lr = 1e-3;
        adam_update(&mut params, &grads, &mut state, lr, 1);
        // Bias-corrected first step moves every coordinate by ~lr.
        for (p, q) in params.tensors().iter().zip(before.tensors()) {
            for i in 0..p.len() {
                let delta = (q[i] - p[i]).abs();
                assert!((delta - lr).abs() < 1e-6, "delta {delta}");
            }
        }
    }

    #[test]
    fn updates_are_deterministic() {
        let run = || {
            let mut params = small_params();
            let mut grads = GradientBuffer::zeros_like(&params);
            for t in grads.tensors_mut() {
                t.fill(-0.11);
            }
            grads.count = 1;
            let mut state = AdamState::new(&params);
            for step in 1..=5 {
                adam_update(&mut params, &grads, &mut state, 3e-4, step);
            }
            params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn log_std_stays_clamped() {
        let mut params = small_params();
        let mut grads = GradientBuffer::zeros_like(&params);
        grads.log_std.fill(1.0);
        grads.count = 1;
        let mut state = AdamState::new(&params);
        for step in 1..=100_000 {
            adam_update(&mut params, &grads, &mut state, 1e-2, step);
        }
        for v in params.log_std.iter() {
            assert!(*v >= crate::mlp::LOG_STD_MIN - 1e-12);
        }
    }
}
