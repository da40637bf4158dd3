//! JSON scene documents.
//!
//! A scene lists bodies, geometries with masks and friction, the global
//! impedance, gravity and the step size. Field names below are the schema;
//! orientations are `[w, x, y, z]` quaternions and default to identity.
//!
//! ```json
//! {
//!   "dt": 0.002,
//!   "gravity": [0.0, 0.0, -9.81],
//!   "impedance": { "k": 1000.0, "b": 30.0, "d": 0.9 },
//!   "bodies": [
//!     { "name": "ball", "mass": 0.2, "position": [0.0, 0.0, 0.1] }
//!   ],
//!   "geoms": [
//!     { "body": 0, "shape": { "type": "sphere", "radius": 0.05 },
//!       "contype": 1, "conaffinity": 1, "mu1": 0.5 }
//!   ],
//!   "pair_impedance": [
//!     { "geom_a": 0, "geom_b": 1, "k": 500.0, "b": 20.0, "d": 0.8 }
//!   ]
//! }
//! ```
//!
//! A dynamic body without `inertia_tensor` takes the solid inertia of its
//! first geometry; `inertia_alpha` defaults to all-ones.

use nalgebra::{Isometry3, Matrix3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;
use crate::types::{
    BodyId, GeomSpec, ImpedanceParams, InertiaSpec, RigidBodyState, Shape, WorldState,
};

fn default_orientation() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

fn default_mask() -> u32 {
    1
}

fn default_mu1() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyDoc {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub mass: f64,
    pub position: [f64; 3],
    #[serde(default = "default_orientation")]
    pub orientation_wxyz: [f64; 4],
    #[serde(default)]
    pub linear_velocity: [f64; 3],
    #[serde(default)]
    pub angular_velocity: [f64; 3],
    #[serde(default)]
    pub inertia_tensor: Option<[[f64; 3]; 3]>,
    #[serde(default)]
    pub inertia_alpha: Option<[[f64; 3]; 3]>,
    #[serde(default, rename = "static")]
    pub is_static: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeomDoc {
    /// Index into `bodies`.
    pub body: usize,
    pub shape: Shape,
    #[serde(default = "default_mask")]
    pub contype: u32,
    #[serde(default = "default_mask")]
    pub conaffinity: u32,
    #[serde(default = "default_mu1")]
    pub mu1: f64,
    #[serde(default)]
    pub local_position: [f64; 3],
    #[serde(default = "default_orientation")]
    pub local_orientation_wxyz: [f64; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairImpedanceDoc {
    pub geom_a: usize,
    pub geom_b: usize,
    pub k: f64,
    pub b: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneDoc {
    pub dt: f64,
    #[serde(default = "SceneDoc::default_gravity")]
    pub gravity: [f64; 3],
    #[serde(default)]
    pub impedance: Option<ImpedanceParams>,
    pub bodies: Vec<BodyDoc>,
    pub geoms: Vec<GeomDoc>,
    #[serde(default)]
    pub pair_impedance: Vec<PairImpedanceDoc>,
}

impl SceneDoc {
    fn default_gravity() -> [f64; 3] {
        [0.0, 0.0, -9.81]
    }

    pub fn from_json(json: &str) -> Result<Self, DynamicsError> {
        serde_json::from_str(json).map_err(|e| DynamicsError::config(e.to_string()))
    }

    /// Build a validated [`WorldState`] from the document.
    pub fn build(&self) -> Result<WorldState, DynamicsError> {
        let mut world = WorldState::new(self.dt);
        world.gravity = Vector3::from(self.gravity);
        if let Some(imp) = self.impedance {
            world.impedance = imp;
        }

        for (i, doc) in self.bodies.iter().enumerate() {
            let orientation = unit_quat(&doc.orientation_wxyz, &format!("bodies[{i}]"))?;
            let tensor = match doc.inertia_tensor {
                Some(rows) => Matrix3::from_fn(|r, c| rows[r][c]),
                None => {
                    if doc.is_static {
                        Matrix3::identity()
                    } else {
                        let geom = self
                            .geoms
                            .iter()
                            .find(|g| g.body == i)
                            .ok_or_else(|| {
                                DynamicsError::config(format!(
                                    "bodies[{i}]: dynamic body needs inertia_tensor or a geom"
                                ))
                            })?;
                        geom.shape.solid_inertia(doc.mass)
                    }
                }
            };
            let alpha = match doc.inertia_alpha {
                Some(rows) => Matrix3::from_fn(|r, c| rows[r][c]),
                None => Matrix3::repeat(1.0),
            };
            world.add_body(RigidBodyState {
                position: Vector3::from(doc.position),
                orientation,
                linear_velocity: Vector3::from(doc.linear_velocity),
                angular_velocity: Vector3::from(doc.angular_velocity),
                mass: if doc.is_static { f64::INFINITY } else { doc.mass },
                inertia: InertiaSpec { tensor, alpha },
                is_static: doc.is_static,
                external_force: Vector3::zeros(),
                external_torque: Vector3::zeros(),
            });
        }

        for (i, doc) in self.geoms.iter().enumerate() {
            if doc.body >= world.bodies.len() {
                return Err(DynamicsError::config(format!(
                    "geoms[{i}].body: no body with index {}",
                    doc.body
                )));
            }
            let orientation = unit_quat(&doc.local_orientation_wxyz, &format!("geoms[{i}]"))?;
            world.add_geom(GeomSpec {
                shape: doc.shape,
                contype: doc.contype,
                conaffinity: doc.conaffinity,
                mu1: doc.mu1,
                parent_body: BodyId(doc.body),
                local_pose: Isometry3::from_parts(
                    Vector3::from(doc.local_position).into(),
                    orientation,
                ),
            });
        }

        for (i, doc) in self.pair_impedance.iter().enumerate() {
            if doc.geom_a >= world.geoms.len() || doc.geom_b >= world.geoms.len() {
                return Err(DynamicsError::config(format!(
                    "pair_impedance[{i}]: geom index out of range"
                )));
            }
            world.set_pair_impedance(
                crate::types::GeomId(doc.geom_a),
                crate::types::GeomId(doc.geom_b),
                ImpedanceParams::new(doc.k, doc.b, doc.d),
            );
        }

        world.validate()?;
        Ok(world)
    }
}

fn unit_quat(wxyz: &[f64; 4], ctx: &str) -> Result<UnitQuaternion<f64>, DynamicsError> {
    let q = nalgebra::Quaternion::new(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
    if q.norm() < 1e-12 {
        return Err(DynamicsError::config(format!(
            "{ctx}: orientation quaternion has zero norm"
        )));
    }
    Ok(UnitQuaternion::from_quaternion(q))
}

/// Parse and build a world in one call.
pub fn load_scene(json: &str) -> Result<WorldState, DynamicsError> {
    SceneDoc::from_json(json)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BALL_SCENE: &str = r#"{
        "dt": 0.002,
        "bodies": [
            { "name": "ball", "mass": 0.2, "position": [0.0, 0.0, 0.1] },
            { "name": "ground", "static": true, "position": [0.0, 0.0, 0.0] }
        ],
        "geoms": [
            { "body": 0, "shape": { "type": "sphere", "radius": 0.05 }, "mu1": 0.5 },
            { "body": 1, "shape": { "type": "plane" }, "mu1": 0.5 }
        ]
    }"#;

    #[test]
    fn loads_and_steps() {
        let world = load_scene(BALL_SCENE).unwrap();
        assert_eq!(world.bodies.len(), 2);
        assert_eq!(world.geoms.len(), 2);
        let next = crate::step(&world).unwrap();
        assert!(next.bodies[0].position.z < 0.1);
    }

    #[test]
    fn missing_body_reference_is_config_error() {
        let bad = BALL_SCENE.replace("\"body\": 1", "\"body\": 7");
        match load_scene(&bad) {
            Err(DynamicsError::Config(msg)) => assert!(msg.contains("geoms[1]")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_shape_dimension_rejected() {
        let bad = BALL_SCENE.replace("\"radius\": 0.05", "\"radius\": -0.05");
        assert!(load_scene(&bad).is_err());
    }
}
