//! Inertia scaling used when a body's dynamic response is tuned without
//! editing its base tensor.

use nalgebra::Matrix3;

use crate::error::DynamicsError;
use crate::types::InertiaSpec;

/// Elementwise (Hadamard) product of the scale matrix with the base tensor.
///
/// The result must remain symmetric positive-definite; a scale that breaks
/// that is a model error, not a silent fallback.
pub fn scaled_inertia(spec: &InertiaSpec) -> Result<Matrix3<f64>, DynamicsError> {
    spec.validate()?;
    let scaled = spec.tensor.component_mul(&spec.alpha);
    for i in 0..3 {
        for j in 0..3 {
            if (scaled[(i, j)] - scaled[(j, i)]).abs() > 1e-12 {
                return Err(DynamicsError::model(
                    "scaled inertia lost symmetry; alpha must be symmetric",
                ));
            }
        }
    }
    // Sylvester's criterion on the symmetrized result.
    let m = scaled;
    let det1 = m[(0, 0)];
    let det2 = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let det3 = m.determinant();
    if det1 <= 0.0 || det2 <= 0.0 || det3 <= 0.0 {
        return Err(DynamicsError::model(
            "scaled inertia is not positive-definite",
        ));
    }
    Ok(scaled)
}
