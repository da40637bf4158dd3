//! Running observation normalization (Welford), frozen at evaluation.
//!
//! Tactile readings are newtons while pose residuals are meters; without
//! normalization one block drowns the other.

use serde::{Deserialize, Serialize};

const NORM_EPS: f64 = 1e-8;
const CLIP: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningNorm {
    pub mean: Vec<f64>,
    /// Sum of squared deviations (Welford's M2).
    pub m2: Vec<f64>,
    pub count: f64,
}

impl RunningNorm {
    pub fn new(dim: usize) -> Self {
        RunningNorm {
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
            count: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Fold one observation into the statistics.
    pub fn update(&mut self, obs: &[f64]) {
        debug_assert_eq!(obs.len(), self.mean.len());
        self.count += 1.0;
        for i in 0..obs.len() {
            let delta = obs[i] - self.mean[i];
            self.mean[i] += delta / self.count;
            self.m2[i] += delta * (obs[i] - self.mean[i]);
        }
    }

    pub fn variance(&self, i: usize) -> f64 {
        if self.count > 1.0 {
            self.m2[i] / self.count
        } else {
            1.0
        }
    }

    /// Standardize and clip an observation. Before any update this is the
    /// identity (unit variance, zero mean).
    pub fn normalize(&self, obs: &[f64]) -> Vec<f64> {
        obs.iter()
            .enumerate()
            .map(|(i, &v)| {
                let z = (v - self.mean[i]) / (self.variance(i) + NORM_EPS).sqrt();
                z.clamp(-CLIP, CLIP)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fresh_norm_is_identity() {
        let norm = RunningNorm::new(3);
        let obs = [0.5, -2.0, 7.0];
        let out = norm.normalize(&obs);
        for (a, b) in obs.iter().zip(&out) {
            assert_relative_eq!(a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn statistics_converge_to_the_stream() {
        let mut norm = RunningNorm::new(1);
        for i in 0..1000 {
            // Alternating 1 and 3: mean 2, variance 1.
            norm.update(&[if i % 2 == 0 { 1.0 } else { 3.0 }]);
        }
        assert_relative_eq!(norm.mean[0], 2.0, epsilon = 1e-9);
        assert_relative_eq!(norm.variance(0), 1.0, epsilon = 1e-9);
        let out = norm.normalize(&[3.0]);
        assert_relative_eq!(out[0], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn normalize_clips_outliers() {
        let mut norm = RunningNorm::new(1);
        for _ in 0..100 {
            norm.update(&[0.0]);
            norm.update(&[0.002]);
        }
        let out = norm.normalize(&[1e9]);
        assert_eq!(out[0], 10.0);
    }
}
