//! Finite-difference verification of the analytic gradients.
//!
//! The probe loss exercises every output head the way a policy-gradient
//! update does: negative log-likelihood of given actions, squared value
//! error against given returns, and an entropy bonus on the log-std block.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::gaussian::{log_prob, log_prob_grads};
use crate::mlp::{GradientBuffer, MlpParams};

const ENTROPY_COEF: f64 = 0.01;

/// Scalar probe loss evaluated from a forward pass only.
pub fn probe_loss(
    params: &MlpParams,
    obs: &DMatrix<f64>,
    actions: &DMatrix<f64>,
    returns: &DVector<f64>,
) -> f64 {
    let out = params.forward_batch(obs).expect("shapes fixed by caller");
    let std: Vec<f64> = params.std().iter().copied().collect();
    let n = obs.ncols();
    let mut loss = 0.0;
    for i in 0..n {
        let mean: Vec<f64> = out.mean.column(i).iter().copied().collect();
        let action: Vec<f64> = actions.column(i).iter().copied().collect();
        loss += -log_prob(&mean, &std, &action);
        let dv = out.value[i] - returns[i];
        loss += dv * dv;
    }
    loss /= n as f64;
    loss - ENTROPY_COEF * crate::gaussian::entropy(params.log_std.as_slice())
}

/// Analytic gradient of [`probe_loss`] via the network backward pass.
pub fn probe_loss_grads(
    params: &MlpParams,
    obs: &DMatrix<f64>,
    actions: &DMatrix<f64>,
    returns: &DVector<f64>,
) -> GradientBuffer {
    let out = params.forward_batch(obs).expect("shapes fixed by caller");
    let std: Vec<f64> = params.std().iter().copied().collect();
    let n = obs.ncols();
    let a_dim = params.action_dim;

    let mut d_mean = DMatrix::zeros(a_dim, n);
    let mut d_value = DVector::zeros(n);
    let mut d_log_std = DVector::zeros(a_dim);
    for i in 0..n {
        let mean: Vec<f64> = out.mean.column(i).iter().copied().collect();
        let action: Vec<f64> = actions.column(i).iter().copied().collect();
        let (dm, dls) = log_prob_grads(&mean, &std, &action);
        for j in 0..a_dim {
            d_mean[(j, i)] = -dm[j] / n as f64;
            d_log_std[j] += -dls[j] / n as f64;
        }
        d_value[i] = 2.0 * (out.value[i] - returns[i]) / n as f64;
    }
    // Entropy bonus: d entropy / d log_std_j = 1.
    for j in 0..a_dim {
        d_log_std[j] -= ENTROPY_COEF;
    }
    params.backward_batch(&out.cache, &d_mean, &d_value, &d_log_std)
}

/// Outcome of one gradient check.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub n_params: usize,
}

/// Compare analytic gradients against central finite differences with
/// perturbation `h` on every scalar parameter. The relative error uses a
/// floor of 1e-3 in the denominator so near-zero components are judged by
/// (scaled) absolute error instead of amplified rounding noise.
pub fn check_gradients(
    params: &MlpParams,
    obs: &DMatrix<f64>,
    actions: &DMatrix<f64>,
    returns: &DVector<f64>,
    h: f64,
) -> GradCheckReport {
    let analytic = probe_loss_grads(params, obs, actions, returns);
    let mut max_rel = 0.0f64;
    let mut n_params = 0;

    let n_tensors = params.tensors().len();
    for t in 0..n_tensors {
        let len = params.tensors()[t].len();
        for i in 0..len {
            let mut plus = params.clone();
            plus.tensors_mut()[t][i] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[t][i] -= h;
            let fd =
                (probe_loss(&plus, obs, actions, returns) - probe_loss(&minus, obs, actions, returns))
                    / (2.0 * h);
            let a = analytic.tensors()[t][i];
            let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-3);
            max_rel = max_rel.max(rel);
            n_params += 1;
        }
    }
    GradCheckReport {
        max_rel_error: max_rel,
        n_params,
    }
}

/// Run a full check on a random small network drawn from `seed`.
pub fn random_check(seed: u64) -> GradCheckReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let obs_dim = rng.gen_range(2..=6);
    let action_dim = rng.gen_range(1..=4);
    let n_hidden = rng.gen_range(0..=3);
    let hidden: Vec<usize> = (0..n_hidden).map(|_| rng.gen_range(3..=32)).collect();
    let batch = rng.gen_range(1..=4);

    let mut params = MlpParams::init(obs_dim, action_dim, &hidden, &mut rng);
    // Random log-std inside the bounds so its gradient path is exercised.
    params
        .log_std
        .apply(|v| *v = rng.gen_range(-1.5..=0.5));

    let obs = DMatrix::from_fn(obs_dim, batch, |_, _| rng.gen_range(-1.0..=1.0));
    let actions = DMatrix::from_fn(action_dim, batch, |_, _| rng.gen_range(-1.0..=1.0));
    let returns = DVector::from_fn(batch, |_, _| rng.gen_range(-1.0..=1.0));
    check_gradients(&params, &obs, &actions, &returns, 1e-5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_gradients_match_finite_differences() {
        for seed in 0..25 {
            let report = random_check(seed);
            assert!(
                report.max_rel_error < 1e-4,
                "seed {seed}: max rel error {}",
                report.max_rel_error
            );
        }
    }
}
