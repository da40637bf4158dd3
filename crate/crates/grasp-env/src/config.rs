//! Task configuration: gripper morphology, noise model, reward scales,
//! success thresholds, and the tactile layout. Serialized as the task JSON
//! consumed by the training and evaluation tools.

use serde::{Deserialize, Serialize};

use crate::EnvError;

/// The four catalog shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectShape {
    Column,
    Capsule,
    Ellipsoid,
    Sphere,
}

impl ObjectShape {
    pub const ALL: [ObjectShape; 4] = [
        ObjectShape::Column,
        ObjectShape::Capsule,
        ObjectShape::Ellipsoid,
        ObjectShape::Sphere,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ObjectShape::Column => "column",
            ObjectShape::Capsule => "capsule",
            ObjectShape::Ellipsoid => "ellipsoid",
            ObjectShape::Sphere => "sphere",
        }
    }

    pub fn parse(s: &str) -> Result<Self, EnvError> {
        match s {
            "column" => Ok(ObjectShape::Column),
            "capsule" => Ok(ObjectShape::Capsule),
            "ellipsoid" => Ok(ObjectShape::Ellipsoid),
            "sphere" => Ok(ObjectShape::Sphere),
            other => Err(EnvError::Config(format!(
                "shape: unknown object shape '{other}' (expected column|capsule|ellipsoid|sphere)"
            ))),
        }
    }
}

/// Observation-noise model for the object pose. The noise corrupts only the
/// observed pose, never the simulated one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Std-dev of the positional noise per axis (m).
    pub pos_sigma: f64,
    /// Std-dev of the axis-angle orientation noise (rad).
    pub ori_sigma: f64,
    /// Seed of the noise stream, independent of the episode seed.
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            pos_sigma: 0.01,
            ori_sigma: 0.05,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.pos_sigma >= 0.0) || !(self.ori_sigma >= 0.0) {
            return Err(EnvError::Config("noise sigmas must be >= 0".into()));
        }
        Ok(())
    }
}

/// Scales of the reward terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// Contact reward amplitude per touching fingertip.
    pub beta: f64,
    /// Hand-displacement penalty scale.
    pub gamma: f64,
    /// Object position-deviation multiplier.
    pub pos_scale: f64,
    /// Object orientation-deviation multiplier.
    pub ori_scale: f64,
    /// Optional penalty applied when no fingertip touches (0 disables it).
    #[serde(default)]
    pub no_contact_penalty: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            beta: 2.0,
            gamma: 10.0,
            pos_scale: 10.0,
            ori_scale: 50.0,
            no_contact_penalty: 0.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.beta > 0.0 && self.gamma > 0.0 && self.pos_scale > 0.0 && self.ori_scale > 0.0) {
            return Err(EnvError::Config("reward scales must be > 0".into()));
        }
        Ok(())
    }
}

/// What counts as a successful episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessConfig {
    /// Number of final control steps over which the hold must persist.
    pub hold_steps: usize,
    /// Fingertips required in contact throughout the hold window.
    pub min_contacts: usize,
    /// Object position tolerance relative to its reset pose (m).
    pub pos_tol: f64,
    /// Object orientation tolerance relative to its reset pose (rad).
    pub ori_tol: f64,
}

impl Default for SuccessConfig {
    fn default() -> Self {
        SuccessConfig {
            hold_steps: 25,
            min_contacts: 2,
            pos_tol: 0.02,
            ori_tol: 0.2,
        }
    }
}

/// Per-control-step action increment limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionLimits {
    /// Joint increment limit (rad per control step).
    pub d_joint: f64,
    /// Base translation increment limit (m per control step).
    pub d_pos: f64,
    /// Base rotation increment limit (rad per control step).
    pub d_ori: f64,
}

impl Default for ActionLimits {
    fn default() -> Self {
        ActionLimits {
            d_joint: 0.02,
            d_pos: 0.002,
            d_ori: 0.01,
        }
    }
}

/// Parametric gripper morphology and motion limits.
///
/// The grasp configuration vector follows the layout
/// `[base position (3), base orientation quaternion (4), finger joints (n)]`
/// so that slices `[..3]` and `[7..]` select the hand-displacement and
/// finger-joint blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GripperConfig {
    pub n_fingers: usize,
    pub joints_per_finger: usize,
    /// One length per joint, proximal to distal (m).
    pub link_lengths: Vec<f64>,
    pub link_radius: f64,
    pub tip_radius: f64,
    /// Radius of the circle the fingers mount on (m).
    pub mount_radius: f64,
    pub palm_radius: f64,
    /// Shared (min, max) limit for every finger joint (rad).
    pub joint_limits: (f64, f64),
    /// Half-width of the workspace box around the canonical base pose (m).
    pub base_pos_range: f64,
}

impl Default for GripperConfig {
    fn default() -> Self {
        GripperConfig {
            n_fingers: 3,
            joints_per_finger: 2,
            link_lengths: vec![0.06, 0.05],
            link_radius: 0.008,
            tip_radius: 0.011,
            mount_radius: 0.08,
            palm_radius: 0.05,
            joint_limits: (0.0, 1.2),
            base_pos_range: 0.08,
        }
    }
}

impl GripperConfig {
    pub fn n_joints(&self) -> usize {
        self.n_fingers * self.joints_per_finger
    }

    /// Length of the grasp configuration vector (3 + 4 + n_joints).
    pub fn config_len(&self) -> usize {
        7 + self.n_joints()
    }

    /// Distance from the palm origin to the fingertip center with all
    /// joints at zero.
    pub fn finger_reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if self.n_fingers < 2 {
            return Err(EnvError::Config("n_fingers must be >= 2".into()));
        }
        if self.joints_per_finger == 0 || self.link_lengths.len() != self.joints_per_finger {
            return Err(EnvError::Config(
                "link_lengths must have one entry per finger joint".into(),
            ));
        }
        if self
            .link_lengths
            .iter()
            .chain([&self.link_radius, &self.tip_radius, &self.mount_radius, &self.palm_radius])
            .any(|&l| !(l > 0.0))
        {
            return Err(EnvError::Config("gripper dimensions must be > 0".into()));
        }
        if !(self.joint_limits.0 < self.joint_limits.1) {
            return Err(EnvError::Config("joint_limits must satisfy min < max".into()));
        }
        Ok(())
    }
}

/// Taxel array layout shared by all finger pads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TactileConfig {
    pub rows: usize,
    pub cols: usize,
    /// Taxel spacing (m).
    pub pitch: f64,
    pub taxel: tactile_array::TaxelParams,
    /// Downsampling stride for the policy observation.
    pub stride: usize,
}

impl Default for TactileConfig {
    fn default() -> Self {
        TactileConfig {
            rows: 8,
            cols: 8,
            pitch: 0.002,
            taxel: tactile_array::TaxelParams::default(),
            stride: 2,
        }
    }
}

/// Full task description. This is the schema of the task JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskConfig {
    pub shape: ObjectShape,
    /// Whether the observation includes the tactile block. This is the only
    /// knob distinguishing the tactile-enabled and tactile-disabled
    /// conditions.
    pub tactile_enabled: bool,
    pub noise: NoiseSpec,
    pub reward: RewardConfig,
    pub success: SuccessConfig,
    pub limits: ActionLimits,
    pub gripper: GripperConfig,
    pub tactile: TactileConfig,
    /// Control steps per episode.
    pub horizon: usize,
    /// Dynamics substeps per control step.
    pub substeps: usize,
    /// Dynamics step (s); control runs at 1 / (dt * substeps).
    pub dt: f64,
    /// Minimum normal force for a fingertip contact to count (N).
    pub f_contact_min: f64,
    /// Std-dev of the gripper placement error at reset: position (m).
    pub grasp_jitter_pos: f64,
    /// Std-dev of the gripper placement error at reset: orientation (rad).
    pub grasp_jitter_ori: f64,
    /// Friction coefficient shared by object, pads and table.
    pub friction: f64,
    /// Object mass (kg), identical across the catalog.
    pub object_mass: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            shape: ObjectShape::Sphere,
            tactile_enabled: true,
            noise: NoiseSpec::default(),
            reward: RewardConfig::default(),
            success: SuccessConfig::default(),
            limits: ActionLimits::default(),
            gripper: GripperConfig::default(),
            tactile: TactileConfig::default(),
            horizon: 200,
            substeps: 4,
            dt: 0.002,
            f_contact_min: 0.1,
            grasp_jitter_pos: 0.01,
            grasp_jitter_ori: 0.05,
            friction: 0.6,
            object_mass: 0.2,
        }
    }
}

impl TaskConfig {
    pub fn from_json(json: &str) -> Result<Self, EnvError> {
        let cfg: TaskConfig =
            serde_json::from_str(json).map_err(|e| EnvError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        self.noise.validate()?;
        self.reward.validate()?;
        self.gripper.validate()?;
        if self.horizon == 0 || self.substeps == 0 {
            return Err(EnvError::Config("horizon and substeps must be >= 1".into()));
        }
        if !(self.dt > 0.0) {
            return Err(EnvError::Config("dt must be > 0".into()));
        }
        if self.tactile.stride < 1 {
            return Err(EnvError::Config("tactile.stride must be >= 1".into()));
        }
        if self.success.hold_steps == 0 || self.success.hold_steps > self.horizon {
            return Err(EnvError::Config(
                "success.hold_steps must be in [1, horizon]".into(),
            ));
        }
        Ok(())
    }

    /// Length of the tactile observation block.
    pub fn tactile_len(&self) -> usize {
        let per_pad = self.tactile.rows.div_ceil(self.tactile.stride)
            * self.tactile.cols.div_ceil(self.tactile.stride);
        self.gripper.n_fingers * per_pad
    }

    /// Policy observation length: joints + base pose (7) + object pose (7)
    /// + optional tactile block.
    pub fn obs_dim(&self) -> usize {
        let base = self.gripper.n_joints() + 7 + 7;
        if self.tactile_enabled {
            base + self.tactile_len()
        } else {
            base
        }
    }

    /// Policy action length: joint increments + base pose increments (6).
    pub fn action_dim(&self) -> usize {
        self.gripper.n_joints() + 6
    }
}

/// Per-trial seed derivation: a split-mix step over `base + index`, so that
/// extending a run never reshuffles earlier trials.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(index))
}

/// SplitMix64 scrambler.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Combine two seeds into one deterministic stream seed.
pub fn mix_seeds(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}
