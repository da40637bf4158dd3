//! Constraint-impedance contact law and Coulomb sliding friction.

use nalgebra::Vector3;

use crate::types::ImpedanceParams;

/// Relative tangential speed below which a contact is treated as static.
/// The sliding law is singular at zero velocity; below this threshold the
/// friction force opposes the residual tangential force instead.
pub const V_EPS: f64 = 1e-4;

/// Solve the impedance relation `a1 + d*(b*v + k*r) = (1 - d)*a0` for `a1`.
///
/// All quantities live on a single constraint axis: `r` is the residual
/// (penetration depth for contacts, displacement for taxels, zero in
/// friction dimensions), `v` its rate, and `a0` the acceleration the axis
/// would see without the constraint. At `d = 0` the motion is unconstrained
/// (`a1 = a0`); at `d = 1` it follows the virtual spring reference
/// `-b*v - k*r` exactly.
pub fn constraint_acceleration(params: &ImpedanceParams, v: f64, r: f64, a0: f64) -> f64 {
    (1.0 - params.d) * a0 - params.d * (params.b * v + params.k * r)
}

/// Scale a vector down so its norm does not exceed `max_norm`.
pub fn clamp_norm(v: &Vector3<f64>, max_norm: f64) -> Vector3<f64> {
    let n = v.norm();
    if n > max_norm {
        if n > 0.0 {
            v * (max_norm / n)
        } else {
            Vector3::zeros()
        }
    } else {
        *v
    }
}

/// Coulomb friction force for a contact carrying normal force `f_n`.
///
/// Above [`V_EPS`] the contact slides and the force is `-mu1 * f_n * v_t/|v_t|`.
/// At or below the threshold the contact is static and the force opposes the
/// residual tangential force (`stopping_force`, the force that would bring
/// the relative tangential motion to rest this step), clamped to the cone
/// radius `mu1 * f_n`.
pub fn friction_force(
    mu1: f64,
    f_n: f64,
    v_t: &Vector3<f64>,
    stopping_force: &Vector3<f64>,
) -> Vector3<f64> {
    if mu1 <= 0.0 || f_n <= 0.0 {
        return Vector3::zeros();
    }
    let speed = v_t.norm();
    if speed > V_EPS {
        -v_t * (mu1 * f_n / speed)
    } else {
        clamp_norm(stopping_force, mu1 * f_n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unconstrained_limit_returns_a0() {
        let p = ImpedanceParams::new(123.0, 45.0, 0.0);
        assert_eq!(constraint_acceleration(&p, 7.0, -2.0, 3.0), 3.0);
    }

    #[test]
    fn full_impedance_limit_returns_reference() {
        let p = ImpedanceParams::new(100.0, 10.0, 1.0);
        assert_relative_eq!(
            constraint_acceleration(&p, 0.1, 0.01, 55.0),
            -2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn half_impedance_hand_value() {
        let p = ImpedanceParams::new(100.0, 10.0, 0.5);
        assert_relative_eq!(
            constraint_acceleration(&p, 0.1, 0.01, 2.0),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn sliding_friction_direct_substitution() {
        let f = friction_force(0.5, 10.0, &Vector3::new(1.0, 0.0, 0.0), &Vector3::zeros());
        assert_relative_eq!(f, Vector3::new(-5.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn zero_velocity_zero_residual_is_zero() {
        let f = friction_force(0.5, 10.0, &Vector3::zeros(), &Vector3::zeros());
        assert_eq!(f, Vector3::zeros());
    }

    #[test]
    fn zero_mu_is_zero() {
        let f = friction_force(0.0, 10.0, &Vector3::new(1.0, 2.0, 3.0), &Vector3::new(9.0, 0.0, 0.0));
        assert_eq!(f, Vector3::zeros());
    }

    #[test]
    fn static_branch_clamps_to_cone() {
        let f = friction_force(0.5, 10.0, &Vector3::zeros(), &Vector3::new(100.0, 0.0, 0.0));
        assert_relative_eq!(f.norm(), 5.0, epsilon = 1e-12);
        assert!(f.x > 0.0);
    }
}
