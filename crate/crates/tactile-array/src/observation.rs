//! Uniform point-sampling of reading grids into flat observation vectors.

use crate::array::{ReadingGrid, TaxelArray};
use crate::TactileError;

/// Keep entries at indices `0, stride, 2*stride, ...` in both dimensions
/// (ceil semantics, pure point sampling — no averaging).
pub fn downsample(grid: &ReadingGrid, stride: usize) -> Result<ReadingGrid, TactileError> {
    if stride < 1 {
        return Err(TactileError::Argument("stride must be >= 1".into()));
    }
    let rows = grid.rows.div_ceil(stride);
    let cols = grid.cols.div_ceil(stride);
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            values.push(grid.at(r * stride, c * stride));
        }
    }
    Ok(ReadingGrid { rows, cols, values })
}

/// Flat tactile observation: downsampled grids concatenated row-major, in
/// the caller's (canonical) pad order. Length is
/// `sum over pads of ceil(rows/stride) * ceil(cols/stride)`.
pub fn tactile_observation(arrays: &[TaxelArray], stride: usize) -> Result<Vec<f64>, TactileError> {
    let mut out = Vec::new();
    for array in arrays {
        out.extend(downsample(&array.readings(), stride)?.values);
    }
    Ok(out)
}

/// Observation length for a pad layout without touching readings.
pub fn observation_len(arrays: &[(usize, usize)], stride: usize) -> usize {
    arrays
        .iter()
        .map(|&(rows, cols)| rows.div_ceil(stride) * cols.div_ceil(stride))
        .sum()
}
