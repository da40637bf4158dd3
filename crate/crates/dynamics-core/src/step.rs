//! Semi-implicit Euler stepper with impulse-based contact response.
//!
//! Per step: external and gravity accelerations update velocities first,
//! contacts are detected on the current poses, each contact applies a normal
//! impulse from the impedance law and a friction impulse, then positions
//! integrate from the post-impulse velocities. Static bodies are never moved
//! by the integrator.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

use crate::contact::{clamp_norm, constraint_acceleration, friction_force, V_EPS};
use crate::error::DynamicsError;
use crate::inertia::scaled_inertia;
use crate::narrow::detect_contacts;
use crate::types::{BodyId, RigidBodyState, WorldState};

/// Inverse mass and inverse world-frame inertia of a body (zeros when static).
struct InverseMass {
    inv_m: f64,
    inv_inertia: Matrix3<f64>,
}

fn inverse_mass(body: &RigidBodyState) -> Result<InverseMass, DynamicsError> {
    if body.is_static {
        return Ok(InverseMass {
            inv_m: 0.0,
            inv_inertia: Matrix3::zeros(),
        });
    }
    let rot = body.orientation.to_rotation_matrix();
    let inertia_world = rot * scaled_inertia(&body.inertia)? * rot.transpose();
    let inv = inertia_world
        .try_inverse()
        .ok_or_else(|| DynamicsError::model("inertia tensor is singular"))?;
    Ok(InverseMass {
        inv_m: 1.0 / body.mass,
        inv_inertia: inv,
    })
}

/// Generalized inverse mass of the contact pair along direction `dir`
/// at offsets `ra`, `rb` from the body origins.
fn pair_inverse_mass(
    wa: &InverseMass,
    wb: &InverseMass,
    ra: &Vector3<f64>,
    rb: &Vector3<f64>,
    dir: &Vector3<f64>,
) -> f64 {
    let term = |w: &InverseMass, r: &Vector3<f64>| {
        let rxd = r.cross(dir);
        w.inv_m + rxd.dot(&(w.inv_inertia * rxd))
    };
    term(wa, ra) + term(wb, rb)
}

fn apply_impulse(
    body: &mut RigidBodyState,
    w: &InverseMass,
    impulse: &Vector3<f64>,
    at: &Vector3<f64>,
) {
    if body.is_static {
        return;
    }
    body.linear_velocity += impulse * w.inv_m;
    let r = at - body.position;
    body.angular_velocity += w.inv_inertia * r.cross(impulse);
}

/// Advance the world by one fixed step `dt`.
///
/// The returned state carries the resolved contacts of this step with their
/// recorded normal force (`impulse / dt`) and friction force. Any non-finite
/// state component aborts with [`DynamicsError::SimulationDiverged`].
pub fn step(world: &WorldState) -> Result<WorldState, DynamicsError> {
    let mut next = world.clone();
    let dt = next.dt;

    // Unconstrained accelerations, then the velocity half of the update.
    let mut accel = vec![Vector3::zeros(); next.bodies.len()];
    let mut inv = Vec::with_capacity(next.bodies.len());
    for (i, body) in next.bodies.iter_mut().enumerate() {
        let w = inverse_mass(body)?;
        if !body.is_static {
            let a_lin = next.gravity + body.external_force * w.inv_m;
            // No gyroscopic term.
            let a_ang = w.inv_inertia * body.external_torque;
            body.linear_velocity += a_lin * dt;
            body.angular_velocity += a_ang * dt;
            accel[i] = a_lin;
        }
        inv.push(w);
    }

    // Contacts on current poses; sequential impulse resolution.
    let mut contacts = detect_contacts(&next)?;
    for contact in &mut contacts {
        let (ga, gb) = (
            next.geoms[contact.geom_a.0].parent_body,
            next.geoms[contact.geom_b.0].parent_body,
        );
        let n = contact.normal;
        let ra = contact.position - next.bodies[ga.0].position;
        let rb = contact.position - next.bodies[gb.0].position;

        // Impedance channel runs along the penetration coordinate
        // (deepening positive): v is the approach rate, a0 the unconstrained
        // deepening acceleration, r the current depth.
        let v_rel = next.bodies[ga.0].velocity_at(&contact.position)
            - next.bodies[gb.0].velocity_at(&contact.position);
        let v_pen = -v_rel.dot(&n);
        let a0 = -(accel[ga.0] - accel[gb.0]).dot(&n);
        let params = next.impedance_for(contact.geom_a, contact.geom_b);
        let a1 = constraint_acceleration(&params, v_pen, contact.penetration, a0);

        let k_n = pair_inverse_mass(&inv[ga.0], &inv[gb.0], &ra, &rb, &n);
        if k_n <= 0.0 {
            continue;
        }
        let jn = ((a0 - a1) * dt / k_n).max(0.0);
        let (body_a, body_b) = {
            let (lo, hi) = next.bodies.split_at_mut(ga.0.max(gb.0));
            if ga.0 < gb.0 {
                (&mut lo[ga.0], &mut hi[0])
            } else {
                (&mut hi[0], &mut lo[gb.0])
            }
        };
        apply_impulse(body_a, &inv[ga.0], &(n * jn), &contact.position);
        apply_impulse(body_b, &inv[gb.0], &(-n * jn), &contact.position);
        contact.normal_force = jn / dt;

        // Friction from the post-normal-impulse tangential velocity.
        let v_rel = body_a.velocity_at(&contact.position) - body_b.velocity_at(&contact.position);
        let v_t = v_rel - n * v_rel.dot(&n);
        contact.tangential_velocity = v_t;
        let speed = v_t.norm();
        let mu = 0.5 * (next.geoms[contact.geom_a.0].mu1 + next.geoms[contact.geom_b.0].mu1);
        if mu > 0.0 && contact.normal_force > 0.0 && speed > 0.0 {
            let t_dir = v_t / speed;
            let k_t = pair_inverse_mass(&inv[ga.0], &inv[gb.0], &ra, &rb, &t_dir);
            if k_t > 0.0 {
                // Force that would zero the tangential motion this step; the
                // sliding force never exceeds it, which keeps a decelerating
                // slide from reversing.
                let stopping = -v_t / (k_t * dt);
                let f = friction_force(mu, contact.normal_force, &v_t, &stopping);
                let f = if speed > V_EPS {
                    clamp_norm(&f, stopping.norm())
                } else {
                    f
                };
                apply_impulse(body_a, &inv[ga.0], &(f * dt), &contact.position);
                apply_impulse(body_b, &inv[gb.0], &(-f * dt), &contact.position);
                contact.friction_force = f;
            }
        }
    }

    // Position half of the update; static bodies never move.
    for (i, body) in next.bodies.iter_mut().enumerate() {
        if !body.is_static {
            body.position += body.linear_velocity * dt;
            let spin = UnitQuaternion::from_scaled_axis(body.angular_velocity * dt);
            body.orientation = spin * body.orientation;
            body.orientation.renormalize();
        }
        body.external_force = Vector3::zeros();
        body.external_torque = Vector3::zeros();

        let finite = body.position.iter().all(|v| v.is_finite())
            && body.linear_velocity.iter().all(|v| v.is_finite())
            && body.angular_velocity.iter().all(|v| v.is_finite())
            && body.orientation.coords.iter().all(|v| v.is_finite());
        if !finite {
            return Err(DynamicsError::SimulationDiverged {
                body: BodyId(i),
                time: next.time,
            });
        }
    }

    next.time += dt;
    next.contacts = contacts;
    Ok(next)
}
