//! Taxel grid layout, force attribution, and the per-taxel spring-damper.

use dynamics_core::GeomId;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::TactileError;

/// Virtual inertia of the taxel slide element (kg). Together with the
/// default stiffness this keeps `sqrt(k/m) * dt` well inside the stable
/// region of semi-implicit Euler at dt = 2 ms.
const TAXEL_MASS: f64 = 0.01;

/// Mechanical parameters shared by the taxels of one array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaxelParams {
    /// Spring stiffness (N/m): steady-state reading is `k * displacement`.
    pub k: f64,
    /// Damping (N·s/m).
    pub b: f64,
    /// Hard travel limit of the slide element (m).
    pub max_displacement: f64,
    /// A contact is felt by every taxel within this distance (m).
    pub receptive_radius: f64,
}

impl Default for TaxelParams {
    fn default() -> Self {
        TaxelParams {
            k: 500.0,
            b: 5.0,
            max_displacement: 0.02,
            receptive_radius: 0.003,
        }
    }
}

impl TaxelParams {
    pub fn validate(&self) -> Result<(), TactileError> {
        if !(self.k > 0.0) || !(self.b >= 0.0) {
            return Err(TactileError::Config("taxel k must be > 0, b >= 0".into()));
        }
        if !(self.max_displacement > 0.0) || !(self.receptive_radius > 0.0) {
            return Err(TactileError::Config(
                "taxel max_displacement and receptive_radius must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Static description of one taxel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxelSpec {
    pub parent_pad: GeomId,
    /// Position in the pad geometry frame (m).
    pub local_position: Vector3<f64>,
    /// Slide direction in the pad frame; always the local Z axis here.
    pub slide_axis: Vector3<f64>,
    pub params: TaxelParams,
}

/// Evolving state of one taxel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TaxelState {
    /// Current slide displacement, held in `[0, max_displacement]`.
    pub displacement: f64,
    /// Displacement rate (m/s).
    pub rate: f64,
    /// Scalar output, `max(0, k*x + b*x_dot)`.
    pub force_reading: f64,
    /// Normal force attributed to this taxel during the last update (N).
    pub last_applied: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Taxel {
    pub spec: TaxelSpec,
    pub state: TaxelState,
}

/// Rectangular taxel grid covering one finger pad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxelArray {
    pub rows: usize,
    pub cols: usize,
    /// Grid spacing (m).
    pub pitch: f64,
    /// Row-major, `rows * cols` entries.
    pub taxels: Vec<Taxel>,
    /// Pad geometry this array covers.
    pub pad_id: GeomId,
}

/// Reading values laid out row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadingGrid {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl ReadingGrid {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }
}

impl TaxelArray {
    /// Build a `rows x cols` grid centered on `center` in the pad frame,
    /// lying in the pad's local XY plane with Z as the slide axis.
    pub fn grid(
        pad_id: GeomId,
        rows: usize,
        cols: usize,
        pitch: f64,
        center: Vector3<f64>,
        params: TaxelParams,
    ) -> Result<Self, TactileError> {
        if rows == 0 || cols == 0 {
            return Err(TactileError::Config("taxel grid must be non-empty".into()));
        }
        params.validate()?;
        let mut taxels = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let x = (c as f64 - (cols as f64 - 1.0) / 2.0) * pitch;
                let y = (r as f64 - (rows as f64 - 1.0) / 2.0) * pitch;
                taxels.push(Taxel {
                    spec: TaxelSpec {
                        parent_pad: pad_id,
                        local_position: center + Vector3::new(x, y, 0.0),
                        slide_axis: Vector3::z(),
                        params,
                    },
                    state: TaxelState::default(),
                });
            }
        }
        Ok(TaxelArray {
            rows,
            cols,
            pitch,
            taxels,
            pad_id,
        })
    }

    /// Attribute contact loads to taxels. Each `(position, f_n)` pair is a
    /// contact point in the pad frame; its force splits over all taxels
    /// within `receptive_radius`, proportionally to inverse distance and
    /// normalized so the attributed total equals `f_n`. A contact with no
    /// taxel in range is outside the sensitive area and ignored.
    pub fn apply_contact_forces(&mut self, contacts_local: &[(Vector3<f64>, f64)]) {
        for taxel in &mut self.taxels {
            taxel.state.last_applied = 0.0;
        }
        for &(point, f_n) in contacts_local {
            if f_n <= 0.0 {
                continue;
            }
            let mut weights = Vec::new();
            let mut total = 0.0;
            for (idx, taxel) in self.taxels.iter().enumerate() {
                let dist = (taxel.spec.local_position - point).norm();
                if dist <= taxel.spec.params.receptive_radius {
                    let w = 1.0 / dist.max(1e-9);
                    weights.push((idx, w));
                    total += w;
                }
            }
            if total <= 0.0 {
                continue;
            }
            for (idx, w) in weights {
                self.taxels[idx].state.last_applied += f_n * w / total;
            }
        }
    }

    /// Advance every taxel's spring-damper by `dt` under the forces set by
    /// [`apply_contact_forces`], clamping travel to `[0, max_displacement]`.
    pub fn integrate(&mut self, dt: f64) {
        for taxel in &mut self.taxels {
            let p = taxel.spec.params;
            let s = &mut taxel.state;
            let accel = (s.last_applied - p.k * s.displacement - p.b * s.rate) / TAXEL_MASS;
            s.rate += accel * dt;
            s.displacement += s.rate * dt;
            if s.displacement <= 0.0 {
                s.displacement = 0.0;
                s.rate = s.rate.max(0.0);
            } else if s.displacement >= p.max_displacement {
                // Motion constraint: the slide stops exactly at the limit.
                s.displacement = p.max_displacement;
                s.rate = s.rate.min(0.0);
            }
            s.force_reading = (p.k * s.displacement + p.b * s.rate).max(0.0);
        }
    }

    pub fn readings(&self) -> ReadingGrid {
        ReadingGrid {
            rows: self.rows,
            cols: self.cols,
            values: self.taxels.iter().map(|t| t.state.force_reading).collect(),
        }
    }

    /// Sum of forces attributed during the last update (N).
    pub fn attributed_total(&self) -> f64 {
        self.taxels.iter().map(|t| t.state.last_applied).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bare_array(rows: usize, cols: usize) -> TaxelArray {
        TaxelArray::grid(
            GeomId(0),
            rows,
            cols,
            0.002,
            Vector3::zeros(),
            TaxelParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn no_contacts_decays_to_zero() {
        let mut array = bare_array(4, 4);
        array.taxels[5].state.displacement = 0.004;
        for _ in 0..500 {
            array.apply_contact_forces(&[]);
            array.integrate(0.002);
        }
        assert!(array.taxels[5].state.displacement < 1e-6);
        assert!(array.readings().values.iter().all(|&v| v >= 0.0));
        assert!(array.readings().values.iter().all(|&v| v < 1e-3));
    }

    #[test]
    fn point_load_reaches_static_balance() {
        let mut array = bare_array(8, 8);
        let target = array.taxels[0].spec.local_position;
        // 0.5 s of a constant 5 N load directly on one taxel.
        for _ in 0..250 {
            array.apply_contact_forces(&[(target, 5.0)]);
            array.integrate(0.002);
        }
        let s = &array.taxels[0].state;
        assert_relative_eq!(s.displacement, 0.01, max_relative = 0.02);
        assert_relative_eq!(s.force_reading, 5.0, max_relative = 0.02);
    }

    #[test]
    fn midpoint_load_splits_equally() {
        let mut array = bare_array(1, 2);
        let a = array.taxels[0].spec.local_position;
        let b = array.taxels[1].spec.local_position;
        let mid = 0.5 * (a + b);
        for _ in 0..400 {
            array.apply_contact_forces(&[(mid, 5.0)]);
            array.integrate(0.002);
        }
        let (ra, rb) = (
            array.taxels[0].state.force_reading,
            array.taxels[1].state.force_reading,
        );
        assert_relative_eq!(ra, rb, max_relative = 1e-9);
        assert_relative_eq!(ra + rb, 5.0, max_relative = 0.05);
    }

    #[test]
    fn attribution_conserves_force() {
        let mut array = bare_array(8, 8);
        let point = array.taxels[27].spec.local_position + Vector3::new(0.0007, 0.0004, 0.0);
        array.apply_contact_forces(&[(point, 3.7)]);
        assert_relative_eq!(array.attributed_total(), 3.7, epsilon = 1e-9);
    }

    #[test]
    fn displacement_clamps_exactly_at_limit() {
        let mut array = bare_array(1, 1);
        let target = array.taxels[0].spec.local_position;
        let max = array.taxels[0].spec.params.max_displacement;
        for _ in 0..2000 {
            array.apply_contact_forces(&[(target, 500.0)]);
            array.integrate(0.002);
            assert!(array.taxels[0].state.displacement <= max);
        }
        assert_eq!(array.taxels[0].state.displacement, max);
    }

    #[test]
    fn steady_reading_is_monotone_in_load() {
        let steady = |f: f64| {
            let mut array = bare_array(1, 1);
            let target = array.taxels[0].spec.local_position;
            for _ in 0..400 {
                array.apply_contact_forces(&[(target, f)]);
                array.integrate(0.002);
            }
            array.taxels[0].state.force_reading
        };
        let readings: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|&f| steady(f)).collect();
        for pair in readings.windows(2) {
            assert!(pair[1] > pair[0]);
        }
    }

    #[test]
    fn out_of_range_contact_is_ignored() {
        let mut array = bare_array(2, 2);
        array.apply_contact_forces(&[(Vector3::new(1.0, 1.0, 0.0), 5.0)]);
        assert_eq!(array.attributed_total(), 0.0);
    }
}
