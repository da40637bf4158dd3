//! Diagonal Gaussian action distribution: density, entropy, sampling, and
//! the analytic partials the PPO loss needs.

use rand::Rng;
use rand_distr::StandardNormal;

const LN_2PI: f64 = 1.8378770664093453;

/// Log density of `action` under the diagonal Gaussian, summed over
/// dimensions.
pub fn log_prob(mean: &[f64], std: &[f64], action: &[f64]) -> f64 {
    debug_assert_eq!(mean.len(), std.len());
    debug_assert_eq!(mean.len(), action.len());
    let mut lp = 0.0;
    for i in 0..mean.len() {
        let z = (action[i] - mean[i]) / std[i];
        lp += -std[i].ln() - 0.5 * LN_2PI - 0.5 * z * z;
    }
    lp
}

/// Closed-form entropy: `sum_i (log_std_i + 0.5 * ln(2*pi*e))`.
pub fn entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|ls| ls + 0.5 * (LN_2PI + 1.0)).sum()
}

/// Sample one action.
pub fn sample(mean: &[f64], std: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    mean.iter()
        .zip(std)
        .map(|(m, s)| m + s * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Partials of `log_prob` with respect to the mean and log-std entries:
/// `d/d_mean_i = z_i / std_i`, `d/d_log_std_i = z_i^2 - 1`.
pub fn log_prob_grads(mean: &[f64], std: &[f64], action: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut d_mean = Vec::with_capacity(mean.len());
    let mut d_log_std = Vec::with_capacity(mean.len());
    for i in 0..mean.len() {
        let z = (action[i] - mean[i]) / std[i];
        d_mean.push(z / std[i]);
        d_log_std.push(z * z - 1.0);
    }
    (d_mean, d_log_std)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn standard_normal_density_at_mean() {
        let lp = log_prob(&[0.0], &[1.0], &[0.0]);
        assert_relative_eq!(lp, -0.9189385332046727, epsilon = 1e-12);
    }

    #[test]
    fn one_sigma_off_costs_half() {
        let at_mean = log_prob(&[0.0], &[1.0], &[0.0]);
        let off = log_prob(&[0.0], &[1.0], &[1.0]);
        assert_relative_eq!(off, at_mean - 0.5, epsilon = 1e-12);
    }

    #[test]
    fn independent_dimensions_add() {
        let one = log_prob(&[0.3], &[1.0], &[0.3]);
        let two = log_prob(&[0.3, 0.3], &[1.0, 1.0], &[0.3, 0.3]);
        assert_relative_eq!(two, 2.0 * one, epsilon = 1e-12);
    }

    #[test]
    fn density_integrates_to_one_on_a_grid() {
        for &sigma in &[0.5, 1.0, 2.0] {
            let (lo, hi) = (-8.0 * sigma, 8.0 * sigma);
            let n = 20_000;
            let dx = (hi - lo) / n as f64;
            let mut integral = 0.0;
            for i in 0..n {
                let x = lo + (i as f64 + 0.5) * dx;
                integral += log_prob(&[0.0], &[sigma], &[x]).exp() * dx;
            }
            assert!(
                (integral - 1.0).abs() < 0.01,
                "sigma {sigma}: integral {integral}"
            );
        }
    }

    #[test]
    fn entropy_matches_quadrature() {
        // H = -E[log p]; check against the grid integral for sigma = 0.7.
        let sigma = 0.7f64;
        let closed = entropy(&[sigma.ln()]);
        let (lo, hi) = (-10.0 * sigma, 10.0 * sigma);
        let n = 40_000;
        let dx = (hi - lo) / n as f64;
        let mut h = 0.0;
        for i in 0..n {
            let x = lo + (i as f64 + 0.5) * dx;
            let lp = log_prob(&[0.0], &[sigma], &[x]);
            h -= lp.exp() * lp * dx;
        }
        assert_relative_eq!(closed, h, epsilon = 1e-6);
    }

    #[test]
    fn grads_match_finite_differences() {
        let (mean, std, action) = ([0.2, -0.5], [0.8, 1.3], [0.5, -0.1]);
        let (d_mean, d_log_std) = log_prob_grads(&mean, &std, &action);
        let h = 1e-6;
        for i in 0..2 {
            let mut mp = mean;
            mp[i] += h;
            let mut mm = mean;
            mm[i] -= h;
            let fd = (log_prob(&mp, &std, &action) - log_prob(&mm, &std, &action)) / (2.0 * h);
            assert_relative_eq!(d_mean[i], fd, epsilon = 1e-6);

            let bump = |delta: f64| {
                let mut s = std;
                s[i] = (std[i].ln() + delta).exp();
                log_prob(&mean, &s, &action)
            };
            let fd = (bump(h) - bump(-h)) / (2.0 * h);
            assert_relative_eq!(d_log_std[i], fd, epsilon = 1e-6);
        }
    }
}
