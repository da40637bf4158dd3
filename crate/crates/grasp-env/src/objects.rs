//! The four-shape object catalog with matched physical parameters.
//!
//! Every object has the same mass and encloses the same volume as the
//! reference sphere (within fractions of a cm^3 by construction), so shape
//! is the only variable across the catalog. Each entry also fixes its
//! stable rest orientation and the horizontal half-extent a closing finger
//! meets at the grasp equator.

use std::f64::consts::PI;

use dynamics_core::Shape;
use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::config::ObjectShape;

/// Reference sphere radius (m); the catalog matches its volume.
pub const REFERENCE_RADIUS: f64 = 0.03;

/// One catalog object, fully placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub shape: ObjectShape,
    pub geom: Shape,
    pub mass: f64,
    /// Height of the center of mass when resting on the table (m),
    /// before the contact-model equilibrium penetration is subtracted.
    pub rest_height: f64,
    /// Stable resting orientation.
    pub rest_orientation: UnitQuaternion<f64>,
    /// Horizontal half-extent at the grasp equator (m).
    pub grasp_radius: f64,
}

impl ObjectSpec {
    pub fn volume(&self) -> f64 {
        self.geom.volume()
    }
}

/// Build the catalog entry for `shape` with the given mass.
pub fn catalog_object(shape: ObjectShape, mass: f64) -> ObjectSpec {
    let target_volume = 4.0 / 3.0 * PI * REFERENCE_RADIUS.powi(3);
    match shape {
        ObjectShape::Sphere => ObjectSpec {
            shape,
            geom: Shape::Sphere {
                radius: REFERENCE_RADIUS,
            },
            mass,
            rest_height: REFERENCE_RADIUS,
            rest_orientation: UnitQuaternion::identity(),
            grasp_radius: REFERENCE_RADIUS,
        },
        ObjectShape::Column => {
            // Upright cylinder; its half-length follows from volume matching.
            let radius = 0.025;
            let half_length = target_volume / (2.0 * PI * radius * radius);
            ObjectSpec {
                shape,
                geom: Shape::Cylinder {
                    radius,
                    half_length,
                },
                mass,
                rest_height: half_length,
                rest_orientation: UnitQuaternion::identity(),
                grasp_radius: radius,
            }
        }
        ObjectShape::Capsule => {
            // Lying on its side along world X; caps take part of the volume.
            let radius: f64 = 0.022;
            let half_length =
                (target_volume - 4.0 / 3.0 * PI * radius.powi(3)) / (2.0 * PI * radius * radius);
            ObjectSpec {
                shape,
                geom: Shape::Capsule {
                    radius,
                    half_length,
                },
                mass,
                rest_height: radius,
                rest_orientation: UnitQuaternion::from_axis_angle(
                    &Vector3::y_axis(),
                    PI / 2.0,
                ),
                grasp_radius: radius,
            }
        }
        ObjectShape::Ellipsoid => {
            // Oblate so the flat side rests stably on the table.
            let a = 0.035;
            let c = target_volume / (4.0 / 3.0 * PI * a * a);
            ObjectSpec {
                shape,
                geom: Shape::Ellipsoid { a, b: a, c },
                mass,
                rest_height: c,
                rest_orientation: UnitQuaternion::identity(),
                grasp_radius: a,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_masses_and_volumes_match() {
        let reference = catalog_object(ObjectShape::Sphere, 0.2);
        let ref_volume = reference.volume();
        for shape in ObjectShape::ALL {
            let obj = catalog_object(shape, 0.2);
            assert!((obj.mass - reference.mass).abs() <= 0.01, "{shape:?} mass");
            let dv_cm3 = (obj.volume() - ref_volume).abs() * 1e6;
            assert!(dv_cm3 <= 5.0, "{shape:?} volume differs by {dv_cm3} cm^3");
        }
    }

    #[test]
    fn rest_heights_touch_the_table() {
        for shape in ObjectShape::ALL {
            let obj = catalog_object(shape, 0.2);
            assert!(obj.rest_height > 0.0 && obj.rest_height < 0.06);
        }
    }
}
