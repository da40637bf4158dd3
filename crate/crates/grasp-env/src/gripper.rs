//! Parametric floating-base gripper with prescribed (kinematic) motion.
//!
//! Fingers mount on a circle around the palm axis and curl inward; each
//! link is one kinematic body whose pose comes from forward kinematics and
//! whose velocity is the finite difference across the substep, so contacts
//! see the true closing motion. Fingertip pads are spheres carrying the
//! taxel arrays.

use dynamics_core::{BodyId, GeomId, GeomSpec, RigidBodyState, Shape, WorldState};
use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};

use crate::config::GripperConfig;
use crate::EnvError;

/// Collision masks: the object and table use group 1, gripper geoms group 2
/// with affinity 1. Gripper-gripper pairs stay filtered out while
/// gripper-object pairs are enabled.
pub const OBJECT_CONTYPE: u32 = 1;
pub const OBJECT_CONAFFINITY: u32 = 1;
pub const GRIPPER_CONTYPE: u32 = 2;
pub const GRIPPER_CONAFFINITY: u32 = 1;

/// Built gripper: body/geom ids plus the driven degrees of freedom.
#[derive(Debug, Clone)]
pub struct GripperRig {
    pub config: GripperConfig,
    pub palm_body: BodyId,
    /// One body per link, `n_fingers * joints_per_finger`, finger-major.
    pub link_bodies: Vec<BodyId>,
    pub fingertip_geom_ids: Vec<GeomId>,
    /// Current base pose (world).
    pub base_pose: Isometry3<f64>,
    /// Current joint angles, finger-major (rad).
    pub joints: Vec<f64>,
    /// Canonical base pose the workspace box is centered on.
    pub canonical_base: Isometry3<f64>,
}

impl GripperRig {
    /// Add the gripper bodies and geoms to `world`, posed at `base_pose`
    /// with all joints at zero.
    pub fn build(
        world: &mut WorldState,
        config: &GripperConfig,
        base_pose: Isometry3<f64>,
        friction: f64,
    ) -> Result<Self, EnvError> {
        config.validate()?;
        let palm_body = world.add_body(RigidBodyState::fixed(
            base_pose.translation.vector,
            base_pose.rotation,
        ));
        world.add_geom(
            GeomSpec::new(
                Shape::Capsule {
                    radius: config.palm_radius,
                    half_length: 0.01,
                },
                palm_body,
            )
            .with_masks(GRIPPER_CONTYPE, GRIPPER_CONAFFINITY)
            .with_friction(friction),
        );

        let mut link_bodies = Vec::new();
        let mut fingertip_geom_ids = Vec::new();
        for _finger in 0..config.n_fingers {
            for joint in 0..config.joints_per_finger {
                let body = world.add_body(RigidBodyState::fixed(
                    Vector3::zeros(),
                    UnitQuaternion::identity(),
                ));
                link_bodies.push(body);
                let length = config.link_lengths[joint];
                world.add_geom(
                    GeomSpec::new(
                        Shape::Capsule {
                            radius: config.link_radius,
                            half_length: length / 2.0,
                        },
                        body,
                    )
                    .with_local_pose(Isometry3::translation(0.0, 0.0, length / 2.0))
                    .with_masks(GRIPPER_CONTYPE, GRIPPER_CONAFFINITY)
                    .with_friction(friction),
                );
                if joint == config.joints_per_finger - 1 {
                    // Fingertip pad on the distal link: a sphere whose pad
                    // frame Z points in the pressing direction.
                    let pad = world.add_geom(
                        GeomSpec::new(
                            Shape::Sphere {
                                radius: config.tip_radius,
                            },
                            body,
                        )
                        .with_local_pose(Isometry3::from_parts(
                            Translation3::new(0.0, 0.0, length),
                            UnitQuaternion::from_axis_angle(
                                &Vector3::y_axis(),
                                std::f64::consts::FRAC_PI_2,
                            ),
                        ))
                        .with_masks(GRIPPER_CONTYPE, GRIPPER_CONAFFINITY)
                        .with_friction(friction),
                    );
                    fingertip_geom_ids.push(pad);
                }
            }
        }

        let mut rig = GripperRig {
            config: config.clone(),
            palm_body,
            link_bodies,
            fingertip_geom_ids,
            base_pose,
            joints: vec![0.0; config.n_joints()],
            canonical_base: base_pose,
        };
        rig.write_poses(world, &base_pose, &rig.joints.clone(), None);
        Ok(rig)
    }

    /// World pose of every link body for the given base pose and joints.
    fn link_poses(&self, base: &Isometry3<f64>, joints: &[f64]) -> Vec<Isometry3<f64>> {
        let cfg = &self.config;
        let mut poses = Vec::with_capacity(self.link_bodies.len());
        for finger in 0..cfg.n_fingers {
            let phi = 2.0 * std::f64::consts::PI * finger as f64 / cfg.n_fingers as f64;
            let mount = base
                * Isometry3::from_parts(
                    Translation3::identity(),
                    UnitQuaternion::from_axis_angle(&Vector3::z_axis(), phi),
                )
                * Isometry3::translation(cfg.mount_radius, 0.0, 0.0);
            let mut theta = 0.0;
            let mut origin = Vector3::zeros();
            for joint in 0..cfg.joints_per_finger {
                theta += joints[finger * cfg.joints_per_finger + joint];
                // Link frame: origin at the joint, local Z along the link,
                // curling inward (toward the palm axis) for positive angles.
                let rot = UnitQuaternion::from_axis_angle(
                    &Vector3::y_axis(),
                    std::f64::consts::PI + theta,
                );
                poses.push(mount * Isometry3::from_parts(Translation3::from(origin), rot));
                let direction = Vector3::new(-theta.sin(), 0.0, -theta.cos());
                origin += cfg.link_lengths[joint] * direction;
            }
        }
        poses
    }

    /// Write body poses into the world. With `dt`, velocities are the
    /// finite difference from the current poses; without, they are zeroed.
    fn write_poses(
        &mut self,
        world: &mut WorldState,
        base: &Isometry3<f64>,
        joints: &[f64],
        dt: Option<f64>,
    ) {
        let poses = self.link_poses(base, joints);
        let mut apply = |body: BodyId, pose: &Isometry3<f64>| {
            let b = world.body_mut(body);
            match dt {
                Some(dt) => {
                    b.linear_velocity = (pose.translation.vector - b.position) / dt;
                    let delta = pose.rotation * b.orientation.inverse();
                    b.angular_velocity = delta.scaled_axis() / dt;
                }
                None => {
                    b.linear_velocity = Vector3::zeros();
                    b.angular_velocity = Vector3::zeros();
                }
            }
            b.position = pose.translation.vector;
            b.orientation = pose.rotation;
        };
        apply(self.palm_body, base);
        for (body, pose) in self.link_bodies.iter().zip(&poses) {
            apply(*body, pose);
        }
        self.base_pose = *base;
        self.joints = joints.to_vec();
    }

    /// Drive the gripper to a new configuration over one substep of `dt`.
    pub fn drive(
        &mut self,
        world: &mut WorldState,
        base: &Isometry3<f64>,
        joints: &[f64],
        dt: f64,
    ) {
        self.write_poses(world, base, joints, Some(dt));
    }

    /// Teleport without inducing velocities (used at reset).
    pub fn place(&mut self, world: &mut WorldState, base: &Isometry3<f64>, joints: &[f64]) {
        self.write_poses(world, base, joints, None);
    }

    /// Grasp configuration vector `[pos (3), quat wxyz (4), joints (n)]`.
    pub fn config_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.config.config_len());
        v.extend_from_slice(self.base_pose.translation.vector.as_slice());
        let q = self.base_pose.rotation;
        v.extend_from_slice(&[q.w, q.i, q.j, q.k]);
        v.extend_from_slice(&self.joints);
        v
    }

    /// World position of each fingertip pad center.
    pub fn fingertip_positions(&self, world: &WorldState) -> Vec<Vector3<f64>> {
        self.fingertip_geom_ids
            .iter()
            .map(|id| world.geom_world_pose(*id).translation.vector)
            .collect()
    }

}

/// Joint angle at which a fingertip surface reaches `grasp_radius` plus a
/// small press depth, with every finger joint at the same angle. Solved by
/// bisection on the monotone tip-travel function.
pub fn closing_angle(cfg: &GripperConfig, grasp_radius: f64, press_depth: f64) -> f64 {
    let needed = cfg.mount_radius - (grasp_radius + cfg.tip_radius - press_depth);
    if needed <= 0.0 {
        return 0.0;
    }
    let travel = |q: f64| -> f64 {
        let mut theta = 0.0;
        let mut t = 0.0;
        for length in &cfg.link_lengths {
            theta += q;
            t += length * theta.sin();
        }
        t
    };
    let (mut lo, mut hi) = (0.0, cfg.joint_limits.1);
    if travel(hi) < needed {
        return hi;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if travel(mid) < needed {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Vertical distance from the palm origin down to the fingertip center with
/// every joint at angle `q`.
pub fn vertical_reach(cfg: &GripperConfig, q: f64) -> f64 {
    let mut theta = 0.0;
    let mut depth = 0.0;
    for length in &cfg.link_lengths {
        theta += q;
        depth += length * theta.cos();
    }
    depth
}
