//! Tanh MLP trunk with Gaussian policy and value heads, plus exact
//! analytic backpropagation through the whole graph.
//!
//! Batches are column-major: a batch of `n` observations is a
//! `(obs_dim, n)` matrix, one sample per column.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::PolicyError;

/// Bounds the state-independent log standard deviation.
pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

/// One dense layer. Biases are stored as `(out, 1)` matrices so every
/// parameter tensor shares one type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub w: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl Layer {
    fn zeros(out: usize, input: usize) -> Self {
        Layer {
            w: DMatrix::zeros(out, input),
            b: DMatrix::zeros(out, 1),
        }
    }

    fn xavier(out: usize, input: usize, gain: f64, rng: &mut impl Rng) -> Self {
        let bound = gain * (6.0 / (input + out) as f64).sqrt();
        Layer {
            w: DMatrix::from_fn(out, input, |_, _| rng.gen_range(-bound..=bound)),
            b: DMatrix::zeros(out, 1),
        }
    }

    fn apply(&self, input: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = &self.w * input;
        for mut col in out.column_iter_mut() {
            col += self.b.column(0);
        }
        out
    }
}

/// All parameters of the actor-critic network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    /// `[obs_dim, hidden...]`; the trunk has one tanh layer per adjacent
    /// pair, and both heads read the last entry.
    pub layer_sizes: Vec<usize>,
    pub action_dim: usize,
    pub trunk: Vec<Layer>,
    pub head_mean: Layer,
    pub head_value: Layer,
    /// State-independent log standard deviation, `(action_dim, 1)`,
    /// projected into `[LOG_STD_MIN, LOG_STD_MAX]` after every update.
    pub log_std: DMatrix<f64>,
}

/// Per-parameter gradients, shape-congruent with [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBuffer {
    pub trunk: Vec<Layer>,
    pub head_mean: Layer,
    pub head_value: Layer,
    pub log_std: DMatrix<f64>,
    /// Number of backward accumulations folded in.
    pub count: usize,
}

/// Activations cached by the forward pass for the backward pass.
/// `hidden[0]` is the input batch; `hidden[l]` the post-tanh output of
/// trunk layer `l`.
pub struct ForwardCache {
    pub hidden: Vec<DMatrix<f64>>,
}

/// Batched forward outputs.
pub struct ForwardBatch {
    /// `(action_dim, n)` Gaussian means.
    pub mean: DMatrix<f64>,
    /// `n` state values.
    pub value: DVector<f64>,
    pub cache: ForwardCache,
}

impl MlpParams {
    /// Random initialization: Xavier trunk, small policy head so early
    /// actions stay near zero, unit value head, zero log-std.
    pub fn init(
        obs_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        rng: &mut impl Rng,
    ) -> Self {
        let mut layer_sizes = vec![obs_dim];
        layer_sizes.extend_from_slice(hidden);
        let mut trunk = Vec::new();
        for pair in layer_sizes.windows(2) {
            trunk.push(Layer::xavier(pair[1], pair[0], 1.0, rng));
        }
        let last = *layer_sizes.last().unwrap();
        MlpParams {
            layer_sizes,
            action_dim,
            trunk,
            head_mean: Layer::xavier(action_dim, last, 0.01, rng),
            head_value: Layer::xavier(1, last, 1.0, rng),
            log_std: DMatrix::zeros(action_dim, 1),
        }
    }

    /// All-zero parameters (useful for tests and shape handling).
    pub fn zeros(obs_dim: usize, action_dim: usize, hidden: &[usize]) -> Self {
        let mut layer_sizes = vec![obs_dim];
        layer_sizes.extend_from_slice(hidden);
        let mut trunk = Vec::new();
        for pair in layer_sizes.windows(2) {
            trunk.push(Layer::zeros(pair[1], pair[0]));
        }
        let last = *layer_sizes.last().unwrap();
        MlpParams {
            layer_sizes,
            action_dim,
            trunk,
            head_mean: Layer::zeros(action_dim, last),
            head_value: Layer::zeros(1, last),
            log_std: DMatrix::zeros(action_dim, 1),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    /// Elementwise standard deviation, `exp(log_std)`.
    pub fn std(&self) -> DVector<f64> {
        DVector::from_iterator(self.action_dim, self.log_std.iter().map(|v| v.exp()))
    }

    /// Check that stored tensor shapes agree with `layer_sizes`; checkpoint
    /// loading relies on this to reject mismatched files.
    pub fn validate_shapes(&self) -> Result<(), PolicyError> {
        if self.layer_sizes.is_empty() {
            return Err(PolicyError::Shape("empty layer_sizes".into()));
        }
        if self.trunk.len() + 1 != self.layer_sizes.len() {
            return Err(PolicyError::Shape("trunk/layer_sizes mismatch".into()));
        }
        for (l, layer) in self.trunk.iter().enumerate() {
            let (out, input) = (self.layer_sizes[l + 1], self.layer_sizes[l]);
            if layer.w.shape() != (out, input) || layer.b.shape() != (out, 1) {
                return Err(PolicyError::Shape(format!("trunk layer {l} shape")));
            }
        }
        let last = *self.layer_sizes.last().unwrap();
        if self.head_mean.w.shape() != (self.action_dim, last)
            || self.head_value.w.shape() != (1, last)
            || self.log_std.shape() != (self.action_dim, 1)
        {
            return Err(PolicyError::Shape("head shapes".into()));
        }
        Ok(())
    }

    /// Batched deterministic forward pass.
    pub fn forward_batch(&self, obs: &DMatrix<f64>) -> Result<ForwardBatch, PolicyError> {
        if obs.nrows() != self.obs_dim() {
            return Err(PolicyError::Shape(format!(
                "observation dim {} does not match network input {}",
                obs.nrows(),
                self.obs_dim()
            )));
        }
        let mut hidden = Vec::with_capacity(self.trunk.len() + 1);
        hidden.push(obs.clone());
        for layer in &self.trunk {
            let mut z = layer.apply(hidden.last().unwrap());
            z.apply(|v| *v = v.tanh());
            hidden.push(z);
        }
        let last = hidden.last().unwrap();
        let mean = self.head_mean.apply(last);
        let value_row = self.head_value.apply(last);
        let value = DVector::from_iterator(obs.ncols(), value_row.row(0).iter().copied());
        Ok(ForwardBatch {
            mean,
            value,
            cache: ForwardCache { hidden },
        })
    }

    /// Single-observation forward: `(mean, std, value)`.
    pub fn forward(&self, obs: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64), PolicyError> {
        let batch = DMatrix::from_column_slice(obs.len(), 1, obs);
        let out = self.forward_batch(&batch)?;
        Ok((
            out.mean.column(0).iter().copied().collect(),
            self.std().iter().copied().collect(),
            out.value[0],
        ))
    }

    /// Exact gradients of a scalar loss given its partials with respect to
    /// the network outputs: `d_mean` is `(action_dim, n)`, `d_value` has one
    /// entry per sample, and `d_log_std` is the already-summed gradient of
    /// the state-independent log-std block.
    pub fn backward_batch(
        &self,
        cache: &ForwardCache,
        d_mean: &DMatrix<f64>,
        d_value: &DVector<f64>,
        d_log_std: &DVector<f64>,
    ) -> GradientBuffer {
        let last = cache.hidden.last().unwrap();
        let d_value_row = DMatrix::from_fn(1, d_value.len(), |_, c| d_value[c]);

        let g_head_mean = Layer {
            w: d_mean * last.transpose(),
            b: sum_columns(d_mean),
        };
        let g_head_value = Layer {
            w: &d_value_row * last.transpose(),
            b: sum_columns(&d_value_row),
        };

        // Pull the head gradients back into the trunk.
        let mut d_h = self.head_mean.w.transpose() * d_mean
            + self.head_value.w.transpose() * &d_value_row;

        let mut g_trunk = vec![Layer::zeros(0, 0); self.trunk.len()];
        for l in (0..self.trunk.len()).rev() {
            let h_out = &cache.hidden[l + 1];
            let h_in = &cache.hidden[l];
            // d/dz tanh(z) = 1 - tanh(z)^2, with tanh(z) cached in h_out.
            let mut d_z = d_h.clone();
            d_z.zip_apply(h_out, |d, h| *d *= 1.0 - h * h);
            g_trunk[l] = Layer {
                w: &d_z * h_in.transpose(),
                b: sum_columns(&d_z),
            };
            if l > 0 {
                d_h = self.trunk[l].w.transpose() * d_z;
            }
        }

        GradientBuffer {
            trunk: g_trunk,
            head_mean: g_head_mean,
            head_value: g_head_value,
            log_std: DMatrix::from_fn(self.action_dim, 1, |r, _| d_log_std[r]),
            count: 1,
        }
    }

    /// Flat views over every parameter tensor, in a fixed order shared with
    /// [`GradientBuffer::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut DMatrix<f64>> {
        let mut v = Vec::new();
        for layer in &mut self.trunk {
            v.push(&mut layer.w);
            v.push(&mut layer.b);
        }
        v.push(&mut self.head_mean.w);
        v.push(&mut self.head_mean.b);
        v.push(&mut self.head_value.w);
        v.push(&mut self.head_value.b);
        v.push(&mut self.log_std);
        v
    }

    pub fn tensors(&self) -> Vec<&DMatrix<f64>> {
        let mut v = Vec::new();
        for layer in &self.trunk {
            v.push(&layer.w);
            v.push(&layer.b);
        }
        v.push(&self.head_mean.w);
        v.push(&self.head_mean.b);
        v.push(&self.head_value.w);
        v.push(&self.head_value.b);
        v.push(&self.log_std);
        v
    }

    /// Project the log-std block back into its bounds.
    pub fn clamp_log_std(&mut self) {
        self.log_std
            .apply(|v| *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX));
    }

    /// Total scalar parameter count.
    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }
}

impl GradientBuffer {
    /// Zeroed buffer congruent with `params`.
    pub fn zeros_like(params: &MlpParams) -> Self {
        GradientBuffer {
            trunk: params
                .trunk
                .iter()
                .map(|l| Layer::zeros(l.w.nrows(), l.w.ncols()))
                .collect(),
            head_mean: Layer::zeros(params.head_mean.w.nrows(), params.head_mean.w.ncols()),
            head_value: Layer::zeros(params.head_value.w.nrows(), params.head_value.w.ncols()),
            log_std: DMatrix::zeros(params.action_dim, 1),
            count: 0,
        }
    }

    pub fn tensors(&self) -> Vec<&DMatrix<f64>> {
        let mut v = Vec::new();
        for layer in &self.trunk {
            v.push(&layer.w);
            v.push(&layer.b);
        }
        v.push(&self.head_mean.w);
        v.push(&self.head_mean.b);
        v.push(&self.head_value.w);
        v.push(&self.head_value.b);
        v.push(&self.log_std);
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut DMatrix<f64>> {
        let mut v = Vec::new();
        for layer in &mut self.trunk {
            v.push(&mut layer.w);
            v.push(&mut layer.b);
        }
        v.push(&mut self.head_mean.w);
        v.push(&mut self.head_mean.b);
        v.push(&mut self.head_value.w);
        v.push(&mut self.head_value.b);
        v.push(&mut self.log_std);
        v
    }

    /// Merge another buffer by summation.
    pub fn accumulate(&mut self, other: &GradientBuffer) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            *a += b;
        }
        self.count += other.count;
    }

    /// All-zero gradients stay all-zero through accumulation; used as the
    /// "constant loss" oracle in tests.
    pub fn max_abs(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

fn sum_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), 1);
    for col in m.column_iter() {
        out.column_mut(0).zip_apply(&col, |acc, v| *acc += v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn zero_params_give_zero_outputs_and_unit_std() {
        let params = MlpParams::zeros(4, 2, &[8]);
        let (mean, std, value) = params.forward(&[0.3, -0.1, 0.7, 0.2]).unwrap();
        assert!(mean.iter().all(|&v| v == 0.0));
        assert_eq!(value, 0.0);
        assert!(std.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn identity_head_passes_observation_through() {
        // No hidden layers: the mean head reads the observation directly.
        let mut params = MlpParams::zeros(3, 3, &[]);
        params.head_mean.w = DMatrix::identity(3, 3);
        let obs = [0.5, -1.2, 2.0];
        let (mean, _, _) = params.forward(&obs).unwrap();
        assert_eq!(mean, obs.to_vec());
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let params = MlpParams::init(5, 3, &[16, 16], &mut rng);
        let obs = [0.1, 0.4, -0.2, 0.9, -1.0];
        let a = params.forward(&obs).unwrap();
        let b = params.forward(&obs).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.2, b.2);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let params = MlpParams::zeros(4, 2, &[8]);
        assert!(params.forward(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn constant_loss_yields_zero_gradients() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let params = MlpParams::init(4, 2, &[8], &mut rng);
        let obs = DMatrix::from_column_slice(4, 2, &[0.1, 0.2, 0.3, 0.4, -0.1, -0.2, -0.3, -0.4]);
        let out = params.forward_batch(&obs).unwrap();
        let grads = params.backward_batch(
            &out.cache,
            &DMatrix::zeros(2, 2),
            &DVector::zeros(2),
            &DVector::zeros(2),
        );
        assert_eq!(grads.max_abs(), 0.0);
    }

    #[test]
    fn linear_squared_error_gradient_matches_hand_formula() {
        // One linear map (the mean head), loss = |W x - y|^2:
        // dL/dW = 2 (W x - y) x^T.
        let mut params = MlpParams::zeros(3, 2, &[]);
        params.head_mean.w = DMatrix::from_row_slice(2, 3, &[0.5, -0.2, 0.1, 0.3, 0.8, -0.4]);
        let x = DMatrix::from_column_slice(3, 1, &[1.0, -2.0, 0.5]);
        let y = DVector::from_column_slice(&[0.2, -0.3]);

        let out = params.forward_batch(&x).unwrap();
        let residual = out.mean.column(0) - y;
        let d_mean = DMatrix::from_fn(2, 1, |r, _| 2.0 * residual[r]);
        let grads = params.backward_batch(
            &out.cache,
            &d_mean,
            &DVector::zeros(1),
            &DVector::zeros(2),
        );

        let expected = DMatrix::from_fn(2, 3, |r, c| 2.0 * residual[r] * x[(c, 0)]);
        assert_relative_eq!(grads.head_mean.w, expected, epsilon = 1e-14);
    }

    #[test]
    fn validate_shapes_rejects_corruption() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut params = MlpParams::init(4, 2, &[8, 8], &mut rng);
        assert!(params.validate_shapes().is_ok());
        params.trunk[0].w = DMatrix::zeros(3, 4);
        assert!(params.validate_shapes().is_err());
    }
}
