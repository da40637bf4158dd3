//! Core state types: bodies, geometries, impedance parameters, contacts,
//! and the world container.

use std::collections::BTreeMap;

use nalgebra::{Isometry3, Matrix3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;

/// Index of a body in [`WorldState::bodies`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BodyId(pub usize);

/// Index of a geometry in [`WorldState::geoms`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeomId(pub usize);

/// Collision primitive. Capsules and cylinders are aligned with their local
/// Z axis; a plane's outward normal is its local Z axis and it passes
/// through its local origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Sphere { radius: f64 },
    Capsule { radius: f64, half_length: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    Box { hx: f64, hy: f64, hz: f64 },
    Cylinder { radius: f64, half_length: f64 },
    Plane,
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Sphere { .. } => "sphere",
            Shape::Capsule { .. } => "capsule",
            Shape::Ellipsoid { .. } => "ellipsoid",
            Shape::Box { .. } => "box",
            Shape::Cylinder { .. } => "cylinder",
            Shape::Plane => "plane",
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let dims: &[f64] = match self {
            Shape::Sphere { radius } => &[*radius],
            Shape::Capsule {
                radius,
                half_length,
            } => &[*radius, *half_length],
            Shape::Ellipsoid { a, b, c } => &[*a, *b, *c],
            Shape::Box { hx, hy, hz } => &[*hx, *hy, *hz],
            Shape::Cylinder {
                radius,
                half_length,
            } => &[*radius, *half_length],
            Shape::Plane => &[],
        };
        if dims.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(DynamicsError::model(format!(
                "{} has a non-positive dimension",
                self.name()
            )));
        }
        Ok(())
    }

    /// Radius of a bounding sphere centered at the shape's local origin.
    /// Infinite for planes.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            Shape::Sphere { radius } => radius,
            Shape::Capsule {
                radius,
                half_length,
            } => radius + half_length,
            Shape::Ellipsoid { a, b, c } => a.max(b).max(c),
            Shape::Box { hx, hy, hz } => (hx * hx + hy * hy + hz * hz).sqrt(),
            Shape::Cylinder {
                radius,
                half_length,
            } => (radius * radius + half_length * half_length).sqrt(),
            Shape::Plane => f64::INFINITY,
        }
    }

    /// Enclosed volume in m^3. Zero for planes.
    pub fn volume(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Shape::Sphere { radius } => 4.0 / 3.0 * PI * radius.powi(3),
            Shape::Capsule {
                radius,
                half_length,
            } => PI * radius * radius * 2.0 * half_length + 4.0 / 3.0 * PI * radius.powi(3),
            Shape::Ellipsoid { a, b, c } => 4.0 / 3.0 * PI * a * b * c,
            Shape::Box { hx, hy, hz } => 8.0 * hx * hy * hz,
            Shape::Cylinder {
                radius,
                half_length,
            } => PI * radius * radius * 2.0 * half_length,
            Shape::Plane => 0.0,
        }
    }

    /// Inertia tensor of the solid shape with uniform density, about its
    /// center of mass, in the shape's local frame.
    pub fn solid_inertia(&self, mass: f64) -> Matrix3<f64> {
        use std::f64::consts::PI;
        match *self {
            Shape::Sphere { radius } => {
                let i = 0.4 * mass * radius * radius;
                Matrix3::from_diagonal(&Vector3::new(i, i, i))
            }
            Shape::Capsule {
                radius,
                half_length,
            } => {
                // Split the mass between cylinder and hemispherical caps by volume.
                let h = 2.0 * half_length;
                let r = radius;
                let vc = PI * r * r * h;
                let vs = 4.0 / 3.0 * PI * r.powi(3);
                let mc = mass * vc / (vc + vs);
                let ms = mass * vs / (vc + vs);
                let ic_z = 0.5 * mc * r * r;
                let ic_x = mc * (3.0 * r * r + h * h) / 12.0;
                let is_z = 0.4 * ms * r * r;
                let is_x = is_z + ms * (0.5 * h * h + 3.0 / 8.0 * h * r);
                Matrix3::from_diagonal(&Vector3::new(ic_x + is_x, ic_x + is_x, ic_z + is_z))
            }
            Shape::Ellipsoid { a, b, c } => Matrix3::from_diagonal(&Vector3::new(
                0.2 * mass * (b * b + c * c),
                0.2 * mass * (a * a + c * c),
                0.2 * mass * (a * a + b * b),
            )),
            Shape::Box { hx, hy, hz } => {
                let (x2, y2, z2) = (4.0 * hx * hx, 4.0 * hy * hy, 4.0 * hz * hz);
                Matrix3::from_diagonal(&Vector3::new(
                    mass / 12.0 * (y2 + z2),
                    mass / 12.0 * (x2 + z2),
                    mass / 12.0 * (x2 + y2),
                ))
            }
            Shape::Cylinder {
                radius,
                half_length,
            } => {
                let h = 2.0 * half_length;
                let ix = mass * (3.0 * radius * radius + h * h) / 12.0;
                Matrix3::from_diagonal(&Vector3::new(ix, ix, 0.5 * mass * radius * radius))
            }
            Shape::Plane => Matrix3::zeros(),
        }
    }
}

/// Rotational inertia with a per-entry scale factor applied on top of the
/// base tensor (see [`crate::scaled_inertia`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaSpec {
    /// Symmetric 3x3 inertia tensor (kg·m²) in the body frame.
    pub tensor: Matrix3<f64>,
    /// Elementwise positive scale; all-ones leaves the tensor unchanged.
    pub alpha: Matrix3<f64>,
}

impl InertiaSpec {
    pub fn from_tensor(tensor: Matrix3<f64>) -> Self {
        InertiaSpec {
            tensor,
            alpha: Matrix3::repeat(1.0),
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        for i in 0..3 {
            if !(self.tensor[(i, i)] > 0.0) {
                return Err(DynamicsError::model(
                    "inertia tensor diagonal must be positive",
                ));
            }
            for j in 0..3 {
                if (self.tensor[(i, j)] - self.tensor[(j, i)]).abs() > 1e-12 {
                    return Err(DynamicsError::model("inertia tensor must be symmetric"));
                }
                if !(self.alpha[(i, j)] > 0.0) {
                    return Err(DynamicsError::model("inertia alpha entries must be positive"));
                }
            }
        }
        Ok(())
    }
}

impl Default for InertiaSpec {
    fn default() -> Self {
        InertiaSpec::from_tensor(Matrix3::from_diagonal_element(1e-3))
    }
}

/// State of one rigid body. Static bodies take part in collisions but are
/// never moved by the integrator; their velocities describe prescribed
/// (kinematic) motion and feed into contact response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidBodyState {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    pub linear_velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
    pub mass: f64,
    pub inertia: InertiaSpec,
    pub is_static: bool,
    /// Accumulated external force (N), cleared after each step.
    #[serde(default = "Vector3::zeros")]
    pub external_force: Vector3<f64>,
    /// Accumulated external torque (N·m), cleared after each step.
    #[serde(default = "Vector3::zeros")]
    pub external_torque: Vector3<f64>,
}

impl RigidBodyState {
    /// A dynamic body at rest at `position`.
    pub fn dynamic(position: Vector3<f64>, mass: f64, inertia: InertiaSpec) -> Self {
        RigidBodyState {
            position,
            orientation: UnitQuaternion::identity(),
            linear_velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
            mass,
            inertia,
            is_static: false,
            external_force: Vector3::zeros(),
            external_torque: Vector3::zeros(),
        }
    }

    /// A static (or kinematically driven) body.
    pub fn fixed(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        RigidBodyState {
            position,
            orientation,
            linear_velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
            mass: f64::INFINITY,
            inertia: InertiaSpec::default(),
            is_static: true,
            external_force: Vector3::zeros(),
            external_torque: Vector3::zeros(),
        }
    }

    pub fn pose(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.position), self.orientation)
    }

    /// Velocity of the material point of this body currently at `point`.
    pub fn velocity_at(&self, point: &Vector3<f64>) -> Vector3<f64> {
        self.linear_velocity + self.angular_velocity.cross(&(point - self.position))
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !self.is_static && !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(DynamicsError::model("dynamic body must have positive mass"));
        }
        if !self.is_static {
            self.inertia.validate()?;
        }
        Ok(())
    }
}

/// Collision geometry attached to a body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomSpec {
    pub shape: Shape,
    /// Collision type bitmask; see [`crate::collision_enabled`].
    pub contype: u32,
    /// Collision affinity bitmask; see [`crate::collision_enabled`].
    pub conaffinity: u32,
    /// Sliding friction coefficient (dimensionless, >= 0).
    pub mu1: f64,
    pub parent_body: BodyId,
    /// Pose of the shape relative to the parent body frame.
    pub local_pose: Isometry3<f64>,
}

impl GeomSpec {
    pub fn new(shape: Shape, parent_body: BodyId) -> Self {
        GeomSpec {
            shape,
            contype: 1,
            conaffinity: 1,
            mu1: 0.5,
            parent_body,
            local_pose: Isometry3::identity(),
        }
    }

    pub fn with_masks(mut self, contype: u32, conaffinity: u32) -> Self {
        self.contype = contype;
        self.conaffinity = conaffinity;
        self
    }

    pub fn with_friction(mut self, mu1: f64) -> Self {
        self.mu1 = mu1;
        self
    }

    pub fn with_local_pose(mut self, pose: Isometry3<f64>) -> Self {
        self.local_pose = pose;
        self
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        self.shape.validate()?;
        if !(self.mu1 >= 0.0) || !self.mu1.is_finite() {
            return Err(DynamicsError::model("mu1 must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Constraint-impedance parameters of the virtual contact spring.
///
/// `k` and `b` live in acceleration space (the spring reference acceleration
/// is `-b*v - k*r`), `d` blends between the unconstrained motion (d=0) and
/// the full spring reference (d=1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceParams {
    pub k: f64,
    pub b: f64,
    pub d: f64,
}

impl Default for ImpedanceParams {
    fn default() -> Self {
        ImpedanceParams {
            k: 1000.0,
            b: 30.0,
            d: 0.9,
        }
    }
}

impl ImpedanceParams {
    pub fn new(k: f64, b: f64, d: f64) -> Self {
        ImpedanceParams { k, b, d }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.k >= 0.0) || !(self.b >= 0.0) {
            return Err(DynamicsError::model("impedance k and b must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.d) {
            return Err(DynamicsError::model("impedance d must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// One resolved contact between a pair of geometries.
///
/// The normal points from geometry `geom_b` into geometry `geom_a`;
/// `normal_force` and `friction_force` are filled in by the stepper for the
/// step in which the contact acted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactPoint {
    pub geom_a: GeomId,
    pub geom_b: GeomId,
    /// Contact location in world coordinates (m).
    pub position: Vector3<f64>,
    /// Unit normal, from B into A.
    pub normal: Vector3<f64>,
    /// Overlap depth along the normal (m, >= 0).
    pub penetration: f64,
    /// Normal force magnitude applied this step (N, >= 0).
    pub normal_force: f64,
    /// Relative tangential velocity of A with respect to B at the contact.
    pub tangential_velocity: Vector3<f64>,
    /// Friction force applied to A this step (N).
    pub friction_force: Vector3<f64>,
}

/// All simulation state for one world instance.
///
/// Stepping is deterministic: identical `WorldState` values and identical
/// external inputs produce bit-identical successors. An instance is
/// single-threaded; independent instances may run in parallel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub bodies: Vec<RigidBodyState>,
    pub geoms: Vec<GeomSpec>,
    /// Global default impedance, overridable per geom pair.
    pub impedance: ImpedanceParams,
    /// Per-pair impedance overrides keyed by ordered geom index pairs.
    #[serde(default)]
    pub pair_impedance: BTreeMap<(usize, usize), ImpedanceParams>,
    pub gravity: Vector3<f64>,
    pub time: f64,
    /// Fixed integration step (s); constant across an episode.
    pub dt: f64,
    /// Contacts resolved during the most recent step.
    #[serde(default)]
    pub contacts: Vec<ContactPoint>,
}

impl WorldState {
    pub fn new(dt: f64) -> Self {
        WorldState {
            bodies: Vec::new(),
            geoms: Vec::new(),
            impedance: ImpedanceParams::default(),
            pair_impedance: BTreeMap::new(),
            gravity: Vector3::new(0.0, 0.0, -9.81),
            time: 0.0,
            dt,
            contacts: Vec::new(),
        }
    }

    pub fn add_body(&mut self, body: RigidBodyState) -> BodyId {
        self.bodies.push(body);
        BodyId(self.bodies.len() - 1)
    }

    pub fn add_geom(&mut self, geom: GeomSpec) -> GeomId {
        self.geoms.push(geom);
        GeomId(self.geoms.len() - 1)
    }

    pub fn body(&self, id: BodyId) -> &RigidBodyState {
        &self.bodies[id.0]
    }

    pub fn body_mut(&mut self, id: BodyId) -> &mut RigidBodyState {
        &mut self.bodies[id.0]
    }

    pub fn geom(&self, id: GeomId) -> &GeomSpec {
        &self.geoms[id.0]
    }

    /// World pose of a geometry (parent body pose composed with local pose).
    pub fn geom_world_pose(&self, id: GeomId) -> Isometry3<f64> {
        let geom = &self.geoms[id.0];
        self.bodies[geom.parent_body.0].pose() * geom.local_pose
    }

    /// Impedance for a contact between two geoms, honoring pair overrides.
    pub fn impedance_for(&self, a: GeomId, b: GeomId) -> ImpedanceParams {
        let key = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
        self.pair_impedance
            .get(&key)
            .copied()
            .unwrap_or(self.impedance)
    }

    pub fn set_pair_impedance(&mut self, a: GeomId, b: GeomId, params: ImpedanceParams) {
        let key = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
        self.pair_impedance.insert(key, params);
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt > 0.0) {
            return Err(DynamicsError::model("dt must be positive"));
        }
        for body in &self.bodies {
            body.validate()?;
        }
        for geom in &self.geoms {
            geom.validate()?;
            if geom.parent_body.0 >= self.bodies.len() {
                return Err(DynamicsError::model("geom references missing body"));
            }
        }
        self.impedance.validate()?;
        for params in self.pair_impedance.values() {
            params.validate()?;
        }
        Ok(())
    }
}
