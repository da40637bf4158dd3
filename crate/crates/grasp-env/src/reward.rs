//! Grasp reward: contact reward minus movement and object-deviation
//! penalties.
//!
//! `total = q_fingertip - z_hand - z_fjoint - o_diff - d_diff`, where the
//! contact term scales the number of touching fingertips by `beta`, the two
//! movement penalties come from the grasp-configuration difference vector
//! (base block and finger-joint block), and the object terms penalize its
//! drift from the reset pose.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::config::RewardConfig;
use crate::EnvError;

/// The five reward terms plus their signed sum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub q_fingertip: f64,
    pub z_hand: f64,
    pub z_fjoint: f64,
    pub d_diff: f64,
    pub o_diff: f64,
    pub total: f64,
}

/// Difference between two grasp configuration vectors laid out as
/// `[position (3), quaternion wxyz (4), joints (n)]`.
///
/// Position and joint blocks subtract componentwise; the quaternion block
/// becomes the rotation vector of `target^-1 * current` in slots 3..6 with
/// slot 6 zero-padded, so the `[..3]` and `[7..]` slicing conventions hold.
pub fn grasp_config_diff(current: &[f64], target: &[f64]) -> Result<Vec<f64>, EnvError> {
    if current.len() != target.len() || current.len() < 7 {
        return Err(EnvError::Argument(format!(
            "config vectors must share the [3+4+n] layout, got {} vs {}",
            current.len(),
            target.len()
        )));
    }
    let mut diff = vec![0.0; current.len()];
    for i in 0..3 {
        diff[i] = current[i] - target[i];
    }
    let qc = unit_quat(&current[3..7])?;
    let qt = unit_quat(&target[3..7])?;
    let rotvec = (qt.inverse() * qc).scaled_axis();
    diff[3] = rotvec.x;
    diff[4] = rotvec.y;
    diff[5] = rotvec.z;
    diff[6] = 0.0;
    for i in 7..current.len() {
        diff[i] = current[i] - target[i];
    }
    Ok(diff)
}

fn unit_quat(wxyz: &[f64]) -> Result<UnitQuaternion<f64>, EnvError> {
    let q = nalgebra::Quaternion::new(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
    if q.norm() < 1e-12 {
        return Err(EnvError::Argument("zero-norm quaternion in config".into()));
    }
    Ok(UnitQuaternion::from_quaternion(q))
}

fn norm(slice: &[f64]) -> f64 {
    slice.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Assemble the reward from its raw ingredients.
///
/// `t_contacts` is the fingertip contact count, `g_diff` the configuration
/// difference from [`grasp_config_diff`], and the object errors are the
/// position distance (m) and geodesic orientation angle (rad) from the
/// target pose.
pub fn reward_from_parts(
    t_contacts: usize,
    g_diff: &[f64],
    pos_err: f64,
    ori_err: f64,
    cfg: &RewardConfig,
) -> RewardBreakdown {
    let mut q_fingertip = cfg.beta * t_contacts as f64;
    if t_contacts == 0 {
        q_fingertip -= cfg.no_contact_penalty;
    }
    let z_hand = norm(&g_diff[..3]) * cfg.gamma;
    let z_fjoint = norm(&g_diff[7..]);
    let d_diff = cfg.pos_scale * pos_err;
    let o_diff = cfg.ori_scale * ori_err;
    RewardBreakdown {
        q_fingertip,
        z_hand,
        z_fjoint,
        d_diff,
        o_diff,
        total: q_fingertip - z_hand - z_fjoint - o_diff - d_diff,
    }
}

/// Object pose errors against the target: Euclidean position distance and
/// geodesic angle between orientations.
pub fn object_pose_error(
    position: &Vector3<f64>,
    orientation: &UnitQuaternion<f64>,
    target_position: &Vector3<f64>,
    target_orientation: &UnitQuaternion<f64>,
) -> (f64, f64) {
    let pos_err = (position - target_position).norm();
    let ori_err = target_orientation.angle_to(orientation);
    (pos_err, ori_err)
}
