//! The grasping environment: reset with noisy pose observation and gripper
//! placement error, incremental action application, reward, and episode
//! success logic.

use dynamics_core::{
    step, BodyId, GeomId, GeomSpec, InertiaSpec, RigidBodyState, Shape, WorldState,
};
use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{mix_seeds, NoiseSpec, ObjectShape, TaskConfig};
use crate::gripper::{
    closing_angle, vertical_reach, GripperRig, OBJECT_CONAFFINITY, OBJECT_CONTYPE,
};
use crate::objects::{catalog_object, ObjectSpec};
use crate::reward::{grasp_config_diff, object_pose_error, reward_from_parts, RewardBreakdown};
use crate::EnvError;
use tactile_array::{tactile_observation, update_taxels, TactileSystem, TaxelArray};

const SCENE_STREAM: u64 = 0x5CE4E;
const NOISE_STREAM: u64 = 0x0B5E7;

/// Depth a closed fingertip presses past the object surface when planning
/// the canonical grasp (m).
const PRESS_DEPTH: f64 = 0.004;

/// Policy observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Current finger joint angles (rad).
    pub joint_angles: Vec<f64>,
    /// Gripper base pose `[x, y, z, qw, qx, qy, qz]`.
    pub ee_pose: [f64; 7],
    /// The noisy object pose captured at reset; held constant over the
    /// episode (the policy never sees the live object state).
    pub object_pose_noisy: [f64; 7],
    /// Downsampled taxel readings; present iff the condition is
    /// tactile-enabled.
    pub tactile: Option<Vec<f64>>,
}

impl Observation {
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::new();
        v.extend_from_slice(&self.joint_angles);
        v.extend_from_slice(&self.ee_pose);
        v.extend_from_slice(&self.object_pose_noisy);
        if let Some(t) = &self.tactile {
            v.extend_from_slice(t);
        }
        v
    }
}

/// Motion increments for one control step, in physical units. Components
/// are clamped to the per-step limits before application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    /// Joint increments (rad per step).
    pub d_joints: Vec<f64>,
    /// Base increments: translation (m) then rotation vector (rad).
    pub d_ee_pose: [f64; 6],
}

impl Action {
    pub fn zeros(n_joints: usize) -> Self {
        Action {
            d_joints: vec![0.0; n_joints],
            d_ee_pose: [0.0; 6],
        }
    }

    /// Split a flat policy vector `[d_joints.., d_ee_pose..]`.
    pub fn from_flat(flat: &[f64], n_joints: usize) -> Result<Self, EnvError> {
        if flat.len() != n_joints + 6 {
            return Err(EnvError::Argument(format!(
                "action length {} does not match {}",
                flat.len(),
                n_joints + 6
            )));
        }
        let mut d_ee_pose = [0.0; 6];
        d_ee_pose.copy_from_slice(&flat[n_joints..]);
        Ok(Action {
            d_joints: flat[..n_joints].to_vec(),
            d_ee_pose,
        })
    }
}

/// Per-control-step record kept for traces and the success check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t_contacts: usize,
    pub reward: RewardBreakdown,
    pub pos_err: f64,
    pub ori_err: f64,
    pub joint_norm: f64,
    pub ee_pos: [f64; 3],
    pub tactile_sum: f64,
    pub tactile_max: f64,
    pub action: Vec<f64>,
}

/// One grasping episode instance. Single-threaded; run several instances
/// with independent seeds for parallel collection.
pub struct GraspEnv {
    task: TaskConfig,
    object: ObjectSpec,
    world: WorldState,
    tactile: TactileSystem,
    rig: GripperRig,
    object_body: BodyId,
    object_geom: GeomId,
    target_config: Vec<f64>,
    target_obj_pos: Vector3<f64>,
    target_obj_ori: UnitQuaternion<f64>,
    observed_pose: [f64; 7],
    setpoint_base: Isometry3<f64>,
    setpoint_joints: Vec<f64>,
    q_close: f64,
    step_count: usize,
    done: bool,
    failed: bool,
    trace: Vec<StepRecord>,
}

impl GraspEnv {
    /// Build the environment; call [`GraspEnv::reset`] before stepping.
    pub fn new(task: TaskConfig) -> Result<Self, EnvError> {
        task.validate()?;
        let object = catalog_object(task.shape, task.object_mass);
        let mut env = GraspEnv {
            object,
            world: WorldState::new(task.dt),
            tactile: TactileSystem::new(vec![], &[])?,
            rig: GripperRig {
                config: task.gripper.clone(),
                palm_body: BodyId(0),
                link_bodies: vec![],
                fingertip_geom_ids: vec![],
                base_pose: Isometry3::identity(),
                joints: vec![],
                canonical_base: Isometry3::identity(),
            },
            object_body: BodyId(0),
            object_geom: GeomId(0),
            target_config: vec![],
            target_obj_pos: Vector3::zeros(),
            target_obj_ori: UnitQuaternion::identity(),
            observed_pose: [0.0; 7],
            setpoint_base: Isometry3::identity(),
            setpoint_joints: vec![],
            q_close: 0.0,
            step_count: 0,
            done: true,
            failed: false,
            trace: vec![],
            task,
        };
        env.reset(0)?;
        Ok(env)
    }

    pub fn task(&self) -> &TaskConfig {
        &self.task
    }

    /// Penetration depth at which a resting contact balances gravity under
    /// the discrete update, so objects can be placed settled.
    fn equilibrium_penetration(&self) -> f64 {
        let imp = self.world.impedance;
        let g = 9.81;
        ((g * (1.0 - imp.d) / imp.d - imp.b * g * self.task.dt) / imp.k).max(0.0)
    }

    /// Start a fresh episode.
    ///
    /// The object rests at its catalog pose; the gripper is placed at the
    /// canonical pre-grasp above it with a seed-driven placement error; the
    /// observed object pose is the true pose corrupted by the noise stream.
    /// Everything is deterministic given `(seed, noise.seed)`, and the true
    /// scene depends only on `seed`.
    pub fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        let task = self.task.clone();
        let object = catalog_object(task.shape, task.object_mass);

        let mut world = WorldState::new(task.dt);
        let ground = world.add_body(RigidBodyState::fixed(
            Vector3::zeros(),
            UnitQuaternion::identity(),
        ));
        world.add_geom(
            GeomSpec::new(Shape::Plane, ground)
                .with_masks(OBJECT_CONTYPE, OBJECT_CONAFFINITY)
                .with_friction(task.friction),
        );

        let rest_z = object.rest_height - self.equilibrium_penetration();
        let obj_pos = Vector3::new(0.0, 0.0, rest_z);
        let obj_ori = object.rest_orientation;
        let object_body = world.add_body(RigidBodyState {
            orientation: obj_ori,
            ..RigidBodyState::dynamic(
                obj_pos,
                object.mass,
                InertiaSpec::from_tensor(object.geom.solid_inertia(object.mass)),
            )
        });
        let object_geom = world.add_geom(
            GeomSpec::new(object.geom, object_body)
                .with_masks(OBJECT_CONTYPE, OBJECT_CONAFFINITY)
                .with_friction(task.friction),
        );

        // Canonical pre-grasp: palm centered over the object, high enough
        // that fingertips meet the grasp equator once closed.
        let q_close = closing_angle(&task.gripper, object.grasp_radius, PRESS_DEPTH);
        let palm_height = obj_pos.z + vertical_reach(&task.gripper, q_close);
        let canonical_base = Isometry3::translation(obj_pos.x, obj_pos.y, palm_height);

        // Placement error drawn from the episode stream only.
        let mut scene_rng = ChaCha12Rng::seed_from_u64(mix_seeds(seed, SCENE_STREAM));
        let jitter_pos = sample_vector(&mut scene_rng, task.grasp_jitter_pos);
        let jitter_rot = sample_rotation(&mut scene_rng, task.grasp_jitter_ori);
        let base_pose = Isometry3::from_parts(
            Translation3::from(canonical_base.translation.vector + jitter_pos),
            jitter_rot * canonical_base.rotation,
        );

        let mut rig = GripperRig::build(&mut world, &task.gripper, base_pose, task.friction)?;
        rig.canonical_base = canonical_base;

        // Taxel arrays on each fingertip pad, centered on the pressing face.
        let mut arrays = Vec::new();
        for pad in &rig.fingertip_geom_ids {
            arrays.push(
                TaxelArray::grid(
                    *pad,
                    task.tactile.rows,
                    task.tactile.cols,
                    task.tactile.pitch,
                    Vector3::new(0.0, 0.0, task.gripper.tip_radius),
                    task.tactile.taxel,
                )
                .map_err(EnvError::from)?,
            );
        }
        let tactile = TactileSystem::new(arrays, &rig.fingertip_geom_ids)?;

        // Observation noise comes from its own stream; it never touches the
        // simulated state.
        let noise = &task.noise;
        let mut noise_rng =
            ChaCha12Rng::seed_from_u64(mix_seeds(noise.seed, mix_seeds(seed, NOISE_STREAM)));
        let observed = observe_pose(&obj_pos, &obj_ori, noise, &mut noise_rng);

        // The target grasp configuration: palm at the canonical pre-grasp
        // over the true object, fingers at the planned closing angle.
        let mut target_config = Vec::with_capacity(task.gripper.config_len());
        target_config.extend_from_slice(canonical_base.translation.vector.as_slice());
        let cq = canonical_base.rotation;
        target_config.extend_from_slice(&[cq.w, cq.i, cq.j, cq.k]);
        target_config.extend(std::iter::repeat(q_close).take(task.gripper.n_joints()));

        self.world = world;
        self.tactile = tactile;
        self.setpoint_base = rig.base_pose;
        self.setpoint_joints = rig.joints.clone();
        self.rig = rig;
        self.object = object;
        self.object_body = object_body;
        self.object_geom = object_geom;
        self.target_config = target_config;
        self.target_obj_pos = obj_pos;
        self.target_obj_ori = obj_ori;
        self.observed_pose = observed;
        self.q_close = q_close;
        self.step_count = 0;
        self.done = false;
        self.failed = false;
        self.trace.clear();
        Ok(self.observation())
    }

    fn observation(&self) -> Observation {
        let base = &self.rig.base_pose;
        let q = base.rotation;
        let tactile = if self.task.tactile_enabled {
            let arrays = self.tactile.arrays_cloned();
            Some(tactile_observation(&arrays, self.task.tactile.stride).expect("stride >= 1"))
        } else {
            None
        };
        Observation {
            joint_angles: self.rig.joints.clone(),
            ee_pose: [
                base.translation.x,
                base.translation.y,
                base.translation.z,
                q.w,
                q.i,
                q.j,
                q.k,
            ],
            object_pose_noisy: self.observed_pose,
            tactile,
        }
    }

    /// Number of fingertip pads with at least one contact on the object
    /// carrying more normal force than the counting threshold.
    pub fn fingertip_contact_count(&self) -> usize {
        let pads = &self.rig.fingertip_geom_ids;
        pads.iter()
            .filter(|pad| {
                self.world.contacts.iter().any(|c| {
                    let on_pad = (c.geom_a == **pad && c.geom_b == self.object_geom)
                        || (c.geom_b == **pad && c.geom_a == self.object_geom);
                    on_pad && c.normal_force > self.task.f_contact_min
                })
            })
            .count()
    }

    /// Reward of the current world state.
    pub fn compute_reward(&self) -> RewardBreakdown {
        let t = self.fingertip_contact_count();
        let g_diff = grasp_config_diff(&self.rig.config_vector(), &self.target_config)
            .expect("config layouts match");
        let body = self.world.body(self.object_body);
        let (pos_err, ori_err) = object_pose_error(
            &body.position,
            &body.orientation,
            &self.target_obj_pos,
            &self.target_obj_ori,
        );
        reward_from_parts(t, &g_diff, pos_err, ori_err, &self.task.reward)
    }

    /// Apply one control step: clamp the increments, move the setpoints,
    /// drive the gripper through the dynamics substeps, update taxels, and
    /// recompute the reward.
    pub fn env_step(
        &mut self,
        action: &Action,
    ) -> Result<(Observation, RewardBreakdown, bool), EnvError> {
        if self.done {
            return Err(EnvError::Argument("episode already finished".into()));
        }
        let task = &self.task;
        let limits = &task.limits;
        let n = task.gripper.n_joints();
        if action.d_joints.len() != n {
            return Err(EnvError::Argument(format!(
                "action has {} joint increments, gripper has {n}",
                action.d_joints.len()
            )));
        }

        // Clamp increments and advance the setpoints.
        for (i, dq) in action.d_joints.iter().enumerate() {
            let dq = dq.clamp(-limits.d_joint, limits.d_joint);
            self.setpoint_joints[i] = (self.setpoint_joints[i] + dq)
                .clamp(task.gripper.joint_limits.0, task.gripper.joint_limits.1);
        }
        let dp = Vector3::new(
            action.d_ee_pose[0].clamp(-limits.d_pos, limits.d_pos),
            action.d_ee_pose[1].clamp(-limits.d_pos, limits.d_pos),
            action.d_ee_pose[2].clamp(-limits.d_pos, limits.d_pos),
        );
        let dr = Vector3::new(
            action.d_ee_pose[3].clamp(-limits.d_ori, limits.d_ori),
            action.d_ee_pose[4].clamp(-limits.d_ori, limits.d_ori),
            action.d_ee_pose[5].clamp(-limits.d_ori, limits.d_ori),
        );
        let center = self.rig.canonical_base.translation.vector;
        let range = task.gripper.base_pos_range;
        let mut target_pos = self.setpoint_base.translation.vector + dp;
        for i in 0..3 {
            target_pos[i] = target_pos[i].clamp(center[i] - range, center[i] + range);
        }
        let target_rot = UnitQuaternion::from_scaled_axis(dr) * self.setpoint_base.rotation;
        self.setpoint_base = Isometry3::from_parts(Translation3::from(target_pos), target_rot);

        // Drive the gripper toward the setpoints across the substeps.
        let start_joints = self.rig.joints.clone();
        let start_base = self.rig.base_pose;
        for s in 1..=task.substeps {
            let alpha = s as f64 / task.substeps as f64;
            let joints: Vec<f64> = start_joints
                .iter()
                .zip(&self.setpoint_joints)
                .map(|(a, b)| a + (b - a) * alpha)
                .collect();
            let pos = start_base.translation.vector
                + (self.setpoint_base.translation.vector - start_base.translation.vector) * alpha;
            let rot = start_base
                .rotation
                .slerp(&self.setpoint_base.rotation, alpha);
            let base = Isometry3::from_parts(Translation3::from(pos), rot);
            self.rig.drive(&mut self.world, &base, &joints, task.dt);
            match step(&self.world) {
                Ok(next) => self.world = next,
                Err(e) => {
                    self.done = true;
                    self.failed = true;
                    return Err(EnvError::Diverged {
                        step: self.step_count,
                        source: e,
                    });
                }
            }
            update_taxels(&mut self.tactile, &self.world, task.dt)?;
        }

        let breakdown = self.compute_reward();
        let t = self.fingertip_contact_count();
        let body = self.world.body(self.object_body);
        let (pos_err, ori_err) = object_pose_error(
            &body.position,
            &body.orientation,
            &self.target_obj_pos,
            &self.target_obj_ori,
        );
        let obs = self.observation();
        let (tactile_sum, tactile_max) = match &obs.tactile {
            Some(t) => (
                t.iter().sum(),
                t.iter().fold(0.0f64, |m, &v| m.max(v)),
            ),
            None => (0.0, 0.0),
        };
        let mut flat_action = action.d_joints.clone();
        flat_action.extend_from_slice(&action.d_ee_pose);
        self.trace.push(StepRecord {
            step: self.step_count,
            t_contacts: t,
            reward: breakdown,
            pos_err,
            ori_err,
            joint_norm: self.rig.joints.iter().map(|v| v * v).sum::<f64>().sqrt(),
            ee_pos: [
                self.rig.base_pose.translation.x,
                self.rig.base_pose.translation.y,
                self.rig.base_pose.translation.z,
            ],
            tactile_sum,
            tactile_max,
            action: flat_action,
        });

        self.step_count += 1;
        if self.step_count >= task.horizon {
            self.done = true;
        }
        Ok((obs, breakdown, self.done))
    }

    /// Episode success: the hold window at the end of the trace keeps
    /// enough fingertips in contact with the object close to its reset pose.
    pub fn is_success(&self) -> bool {
        self.done && !self.failed && trace_success(&self.trace, &self.task.success)
    }

    pub fn trace(&self) -> &[StepRecord] {
        &self.trace
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn has_failed(&self) -> bool {
        self.failed
    }

    pub fn steps_taken(&self) -> usize {
        self.step_count
    }

    pub fn q_close(&self) -> f64 {
        self.q_close
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn current_config(&self) -> Vec<f64> {
        self.rig.config_vector()
    }

    pub fn target_config(&self) -> &[f64] {
        &self.target_config
    }

    pub fn object_pose(&self) -> (Vector3<f64>, UnitQuaternion<f64>) {
        let body = self.world.body(self.object_body);
        (body.position, body.orientation)
    }

    pub fn target_object_pose(&self) -> (Vector3<f64>, UnitQuaternion<f64>) {
        (self.target_obj_pos, self.target_obj_ori)
    }

    /// Write the episode trace as CSV.
    pub fn write_trace_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let n_action = self.task.action_dim();
        write!(
            w,
            "step,t_contacts,q_fingertip,z_hand,z_fjoint,d_diff,o_diff,total,pos_err,ori_err,joint_norm,ee_x,ee_y,ee_z,tactile_sum,tactile_max"
        )?;
        for i in 0..n_action {
            write!(w, ",action_{i}")?;
        }
        writeln!(w)?;
        for r in &self.trace {
            write!(
                w,
                "{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                r.step,
                r.t_contacts,
                r.reward.q_fingertip,
                r.reward.z_hand,
                r.reward.z_fjoint,
                r.reward.d_diff,
                r.reward.o_diff,
                r.reward.total,
                r.pos_err,
                r.ori_err,
                r.joint_norm,
                r.ee_pos[0],
                r.ee_pos[1],
                r.ee_pos[2],
                r.tactile_sum,
                r.tactile_max,
            )?;
            for a in &r.action {
                write!(w, ",{a:?}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Success over a finished trace: every record in the final hold window has
/// at least `min_contacts` fingertips touching and the object within the
/// pose tolerances.
pub fn trace_success(trace: &[StepRecord], cfg: &crate::config::SuccessConfig) -> bool {
    if trace.len() < cfg.hold_steps {
        return false;
    }
    trace[trace.len() - cfg.hold_steps..].iter().all(|r| {
        r.t_contacts >= cfg.min_contacts && r.pos_err < cfg.pos_tol && r.ori_err < cfg.ori_tol
    })
}

fn sample_vector(rng: &mut ChaCha12Rng, sigma: f64) -> Vector3<f64> {
    if sigma <= 0.0 {
        return Vector3::zeros();
    }
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    Vector3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng))
}

fn sample_rotation(rng: &mut ChaCha12Rng, sigma: f64) -> UnitQuaternion<f64> {
    if sigma <= 0.0 {
        return UnitQuaternion::identity();
    }
    let axis = loop {
        let v = Vector3::new(
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        );
        let n = v.norm();
        if n > 1e-6 && n <= 1.0 {
            break v / n;
        }
    };
    let angle = Normal::new(0.0, sigma).expect("finite sigma").sample(rng);
    UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_unchecked(axis), angle)
}

/// Corrupt the true pose with zero-mean Gaussian noise: per-axis position
/// noise and an axis-angle rotation with angle ~ N(0, ori_sigma). Zero
/// sigmas reproduce the true pose exactly.
pub fn observe_pose(
    position: &Vector3<f64>,
    orientation: &UnitQuaternion<f64>,
    noise: &NoiseSpec,
    rng: &mut ChaCha12Rng,
) -> [f64; 7] {
    let p = position + sample_vector(rng, noise.pos_sigma);
    let q = sample_rotation(rng, noise.ori_sigma) * orientation;
    [p.x, p.y, p.z, q.w, q.i, q.j, q.k]
}

/// Scripted closing controller used as an oracle: steadily closes every
/// finger joint toward the planned grasp angle and keeps the base still.
pub struct ScriptedCloser {
    pub close_rate: f64,
}

impl Default for ScriptedCloser {
    fn default() -> Self {
        // Reaches a typical closing angle in ~60 control steps.
        ScriptedCloser { close_rate: 0.005 }
    }
}

impl ScriptedCloser {
    pub fn action(&self, env: &GraspEnv) -> Action {
        let n = env.task.gripper.n_joints();
        let mut d = vec![0.0; n];
        for (i, dq) in d.iter_mut().enumerate() {
            let remaining = env.q_close - env.setpoint_joints[i];
            *dq = remaining.clamp(-self.close_rate, self.close_rate);
        }
        Action {
            d_joints: d,
            d_ee_pose: [0.0; 6],
        }
    }
}

/// Catalog lookup matching the task shape.
pub fn object_for(shape: ObjectShape, mass: f64) -> ObjectSpec {
    catalog_object(shape, mass)
}
