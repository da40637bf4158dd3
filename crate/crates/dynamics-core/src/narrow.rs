//! Narrow-phase contact detection.
//!
//! Sphere/capsule/plane pairs are resolved in closed form. Pairs against
//! boxes, cylinders and ellipsoids reduce to point-to-solid queries; the
//! ellipsoid query and the capsule sweep are iterative with a positional
//! tolerance of 1e-6 m. Anything outside the supported matrix is a hard
//! error, never a silently dropped contact.

use nalgebra::{Isometry3, Vector3};

use crate::error::DynamicsError;
use crate::types::{ContactPoint, GeomId, GeomSpec, Shape, WorldState};

/// Positional tolerance of the iterative routines (m).
pub const NARROW_PHASE_TOL: f64 = 1e-6;

/// Mask rule deciding whether two geometries may collide: the pair is
/// enabled iff either geometry's `contype` overlaps the other's
/// `conaffinity`. Symmetric by construction.
pub fn collision_enabled(a: &GeomSpec, b: &GeomSpec) -> bool {
    (a.contype & b.conaffinity) != 0 || (b.contype & a.conaffinity) != 0
}

/// Geometry-only contact, before body kinematics are attached.
#[derive(Debug, Clone, Copy)]
pub struct RawContact {
    pub position: Vector3<f64>,
    /// Unit normal from shape B into shape A.
    pub normal: Vector3<f64>,
    pub penetration: f64,
}

/// Closest-feature answer for a query point against a solid shape.
#[derive(Debug, Clone, Copy)]
struct PointQuery {
    /// Distance to the surface; negative when the point is inside.
    signed_distance: f64,
    surface_point: Vector3<f64>,
    /// Outward surface normal at `surface_point`.
    normal: Vector3<f64>,
}

fn point_vs_sphere(center: &Vector3<f64>, radius: f64, p: &Vector3<f64>) -> PointQuery {
    let delta = p - center;
    let dist = delta.norm();
    let normal = if dist > 1e-12 {
        delta / dist
    } else {
        Vector3::z()
    };
    PointQuery {
        signed_distance: dist - radius,
        surface_point: center + normal * radius,
        normal,
    }
}

/// Closest point on segment [a, b] to point p.
fn closest_on_segment(a: &Vector3<f64>, b: &Vector3<f64>, p: &Vector3<f64>) -> Vector3<f64> {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= 1e-24 {
        return *a;
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Closest points between segments [p1, q1] and [p2, q2] (Ericson, RTCD 5.1.9).
fn closest_between_segments(
    p1: &Vector3<f64>,
    q1: &Vector3<f64>,
    p2: &Vector3<f64>,
    q2: &Vector3<f64>,
) -> (Vector3<f64>, Vector3<f64>) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let eps = 1e-24;

    let (s, t);
    if a <= eps && e <= eps {
        (s, t) = (0.0, 0.0);
    } else if a <= eps {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= eps {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s_ = if denom > eps {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t_ = (b * s_ + f) / e;
            if t_ < 0.0 {
                t_ = 0.0;
                s_ = (-c / a).clamp(0.0, 1.0);
            } else if t_ > 1.0 {
                t_ = 1.0;
                s_ = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t) = (s_, t_);
        }
    }
    (p1 + d1 * s, p2 + d2 * t)
}

fn capsule_segment(pose: &Isometry3<f64>, half_length: f64) -> (Vector3<f64>, Vector3<f64>) {
    let axis = pose.rotation * Vector3::z();
    let c = pose.translation.vector;
    (c - axis * half_length, c + axis * half_length)
}

fn point_vs_capsule(
    pose: &Isometry3<f64>,
    radius: f64,
    half_length: f64,
    p: &Vector3<f64>,
) -> PointQuery {
    let (a, b) = capsule_segment(pose, half_length);
    let q = closest_on_segment(&a, &b, p);
    point_vs_sphere(&q, radius, p)
}

fn point_vs_box(pose: &Isometry3<f64>, half: &Vector3<f64>, p: &Vector3<f64>) -> PointQuery {
    let local = pose.inverse_transform_point(&(*p).into()).coords;
    let clamped = Vector3::new(
        local.x.clamp(-half.x, half.x),
        local.y.clamp(-half.y, half.y),
        local.z.clamp(-half.z, half.z),
    );
    let (sd, surf_local, n_local);
    if (clamped - local).norm_squared() > 0.0 {
        // Outside: the clamp is the closest surface point.
        let delta = local - clamped;
        let dist = delta.norm();
        sd = dist;
        surf_local = clamped;
        n_local = delta / dist;
    } else {
        // Inside: exit through the nearest face.
        let margins = [
            half.x - local.x.abs(),
            half.y - local.y.abs(),
            half.z - local.z.abs(),
        ];
        let axis = margins
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let sign = if local[axis] >= 0.0 { 1.0 } else { -1.0 };
        let mut s = local;
        s[axis] = sign * half[axis];
        sd = -margins[axis];
        surf_local = s;
        let mut n = Vector3::zeros();
        n[axis] = sign;
        n_local = n;
    }
    PointQuery {
        signed_distance: sd,
        surface_point: pose.transform_point(&surf_local.into()).coords,
        normal: pose.rotation * n_local,
    }
}

fn point_vs_cylinder(
    pose: &Isometry3<f64>,
    radius: f64,
    half_length: f64,
    p: &Vector3<f64>,
) -> PointQuery {
    let local = pose.inverse_transform_point(&(*p).into()).coords;
    let rho = (local.x * local.x + local.y * local.y).sqrt();
    let radial = if rho > 1e-12 {
        Vector3::new(local.x / rho, local.y / rho, 0.0)
    } else {
        Vector3::x()
    };
    let zsign = if local.z >= 0.0 { 1.0 } else { -1.0 };

    let (sd, surf_local, n_local);
    if rho <= radius && local.z.abs() <= half_length {
        // Inside: closest exit is the side wall or an end cap.
        let to_side = radius - rho;
        let to_cap = half_length - local.z.abs();
        if to_side <= to_cap {
            sd = -to_side;
            surf_local = Vector3::new(radial.x * radius, radial.y * radius, local.z);
            n_local = radial;
        } else {
            sd = -to_cap;
            surf_local = Vector3::new(local.x, local.y, zsign * half_length);
            n_local = Vector3::new(0.0, 0.0, zsign);
        }
    } else {
        let dz = (local.z.abs() - half_length).max(0.0);
        let dr = (rho - radius).max(0.0);
        if dr <= 0.0 {
            // Above or below a cap.
            sd = dz;
            surf_local = Vector3::new(local.x, local.y, zsign * half_length);
            n_local = Vector3::new(0.0, 0.0, zsign);
        } else if dz <= 0.0 {
            // Beside the wall.
            sd = dr;
            surf_local = Vector3::new(radial.x * radius, radial.y * radius, local.z);
            n_local = radial;
        } else {
            // Past the rim.
            let rim = Vector3::new(radial.x * radius, radial.y * radius, zsign * half_length);
            let delta = local - rim;
            let dist = delta.norm();
            sd = dist;
            surf_local = rim;
            n_local = delta / dist;
        }
    }
    PointQuery {
        signed_distance: sd,
        surface_point: pose.transform_point(&surf_local.into()).coords,
        normal: pose.rotation * n_local,
    }
}

/// Closest point on an ellipsoid via bisection on the Lagrange parameter.
/// Handles interior points; accuracy well under [`NARROW_PHASE_TOL`].
fn point_vs_ellipsoid(
    pose: &Isometry3<f64>,
    semi: &Vector3<f64>,
    p: &Vector3<f64>,
) -> PointQuery {
    let mut y = pose.inverse_transform_point(&(*p).into()).coords;
    // Nudge exact on-axis components so the parametric form stays solvable.
    for i in 0..3 {
        if y[i].abs() < 1e-12 * semi[i] {
            y[i] = 1e-12 * semi[i];
        }
    }
    let inside = (y.x / semi.x).powi(2) + (y.y / semi.y).powi(2) + (y.z / semi.z).powi(2) < 1.0;

    let f = |t: f64| -> f64 {
        let mut sum = 0.0;
        for i in 0..3 {
            let term = semi[i] * y[i] / (t + semi[i] * semi[i]);
            sum += term * term;
        }
        sum - 1.0
    };
    let e_min2 = semi.x.min(semi.y).min(semi.z).powi(2);
    let mut lo = -e_min2 + 1e-18 * e_min2.max(1.0);
    let mut hi = semi.amax() * y.norm() + semi.amax() * semi.amax() + 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * hi.abs().max(1.0) {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let mut x = Vector3::zeros();
    for i in 0..3 {
        x[i] = semi[i] * semi[i] * y[i] / (t + semi[i] * semi[i]);
    }
    let grad = Vector3::new(
        x.x / (semi.x * semi.x),
        x.y / (semi.y * semi.y),
        x.z / (semi.z * semi.z),
    );
    let n_local = grad.normalize();
    let dist = (y - x).norm();
    PointQuery {
        signed_distance: if inside { -dist } else { dist },
        surface_point: pose.transform_point(&x.into()).coords,
        normal: pose.rotation * n_local,
    }
}

/// Point query against any supported solid. Planes are handled by the
/// dedicated plane routines instead.
fn point_vs_solid(shape: &Shape, pose: &Isometry3<f64>, p: &Vector3<f64>) -> Option<PointQuery> {
    match *shape {
        Shape::Sphere { radius } => Some(point_vs_sphere(&pose.translation.vector, radius, p)),
        Shape::Capsule {
            radius,
            half_length,
        } => Some(point_vs_capsule(pose, radius, half_length, p)),
        Shape::Box { hx, hy, hz } => Some(point_vs_box(pose, &Vector3::new(hx, hy, hz), p)),
        Shape::Cylinder {
            radius,
            half_length,
        } => Some(point_vs_cylinder(pose, radius, half_length, p)),
        Shape::Ellipsoid { a, b, c } => {
            Some(point_vs_ellipsoid(pose, &Vector3::new(a, b, c), p))
        }
        Shape::Plane => None,
    }
}

/// Sphere of `radius` at `center` against a solid shape.
fn sphere_vs_solid(
    center: &Vector3<f64>,
    radius: f64,
    shape: &Shape,
    pose: &Isometry3<f64>,
) -> Option<RawContact> {
    let q = point_vs_solid(shape, pose, center)?;
    let penetration = radius - q.signed_distance;
    if penetration <= 0.0 {
        return None;
    }
    Some(RawContact {
        position: q.surface_point,
        normal: q.normal,
        penetration,
    })
}

/// Capsule against a solid shape: minimize the (convex) signed distance of
/// the swept segment by ternary search, then treat the argmin as a sphere.
fn capsule_vs_solid(
    cap_pose: &Isometry3<f64>,
    radius: f64,
    half_length: f64,
    shape: &Shape,
    pose: &Isometry3<f64>,
) -> Option<RawContact> {
    let (a, b) = capsule_segment(cap_pose, half_length);
    let dist_at = |t: f64| {
        let p = a + (b - a) * t;
        point_vs_solid(shape, pose, &p).expect("solid shape").signed_distance
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if dist_at(m1) <= dist_at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    sphere_vs_solid(&(a + (b - a) * t), radius, shape, pose)
}

/// World-space plane as (unit normal, offset).
fn plane_params(pose: &Isometry3<f64>) -> (Vector3<f64>, f64) {
    let n = pose.rotation * Vector3::z();
    (n, n.dot(&pose.translation.vector))
}

/// Height of a point above the plane surface.
fn plane_height(n: &Vector3<f64>, offset: f64, p: &Vector3<f64>) -> f64 {
    n.dot(p) - offset
}

/// Shape-vs-plane contact. Flat-resting features (capsule side, box face,
/// cylinder end) report their centroid so a level body does not rock on a
/// corner point.
fn solid_vs_plane(
    shape: &Shape,
    pose: &Isometry3<f64>,
    plane_pose: &Isometry3<f64>,
) -> Option<RawContact> {
    let (n, offset) = plane_params(plane_pose);
    match *shape {
        Shape::Sphere { radius } => {
            let c = pose.translation.vector;
            let pen = radius - plane_height(&n, offset, &c);
            (pen > 0.0).then(|| RawContact {
                position: c - n * radius,
                normal: n,
                penetration: pen,
            })
        }
        Shape::Capsule {
            radius,
            half_length,
        } => {
            let (a, b) = capsule_segment(pose, half_length);
            let da = radius - plane_height(&n, offset, &a);
            let db = radius - plane_height(&n, offset, &b);
            let pen = da.max(db);
            if pen <= 0.0 {
                return None;
            }
            let anchor = if (da - db).abs() <= 1e-9 {
                0.5 * (a + b)
            } else if da > db {
                a
            } else {
                b
            };
            Some(RawContact {
                position: anchor - n * radius,
                normal: n,
                penetration: pen,
            })
        }
        Shape::Box { hx, hy, hz } => {
            let mut deepest = 0.0_f64;
            let mut centroid = Vector3::zeros();
            let mut count = 0.0;
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    for sz in [-1.0, 1.0] {
                        let v = pose
                            .transform_point(&Vector3::new(sx * hx, sy * hy, sz * hz).into())
                            .coords;
                        let pen = -plane_height(&n, offset, &v);
                        if pen > 0.0 {
                            deepest = deepest.max(pen);
                            centroid += v;
                            count += 1.0;
                        }
                    }
                }
            }
            (count > 0.0).then(|| RawContact {
                position: centroid / count,
                normal: n,
                penetration: deepest,
            })
        }
        Shape::Cylinder {
            radius,
            half_length,
        } => {
            let axis = pose.rotation * Vector3::z();
            let c = pose.translation.vector;
            let w = n - axis * n.dot(&axis);
            let mut candidates = Vec::with_capacity(2);
            for end in [-1.0, 1.0] {
                let disc = c + axis * (end * half_length);
                // Lowest point of the end disc; its center when the disc lies flat.
                let p = if w.norm() > 1e-9 {
                    disc - w.normalize() * radius
                } else {
                    disc
                };
                let pen = -plane_height(&n, offset, &p);
                if pen > 0.0 {
                    candidates.push((p, pen));
                }
            }
            match candidates.as_slice() {
                [] => None,
                [(p, pen)] => Some(RawContact {
                    position: *p,
                    normal: n,
                    penetration: *pen,
                }),
                [(p0, pen0), (p1, pen1)] => {
                    if (pen0 - pen1).abs() <= 1e-9 {
                        Some(RawContact {
                            position: 0.5 * (p0 + p1),
                            normal: n,
                            penetration: pen0.max(*pen1),
                        })
                    } else if pen0 > pen1 {
                        Some(RawContact {
                            position: *p0,
                            normal: n,
                            penetration: *pen0,
                        })
                    } else {
                        Some(RawContact {
                            position: *p1,
                            normal: n,
                            penetration: *pen1,
                        })
                    }
                }
                _ => unreachable!(),
            }
        }
        Shape::Ellipsoid { a, b, c } => {
            // Support point in the downhill direction, exact for ellipsoids.
            let u = pose.rotation.inverse() * (-n);
            let semi = Vector3::new(a, b, c);
            let scaled = Vector3::new(
                semi.x * semi.x * u.x,
                semi.y * semi.y * u.y,
                semi.z * semi.z * u.z,
            );
            let len = (semi.x * u.x * semi.x * u.x
                + semi.y * u.y * semi.y * u.y
                + semi.z * u.z * semi.z * u.z)
                .sqrt();
            let support = pose.transform_point(&(scaled / len).into()).coords;
            let pen = -plane_height(&n, offset, &support);
            (pen > 0.0).then(|| RawContact {
                position: support,
                normal: n,
                penetration: pen,
            })
        }
        Shape::Plane => None,
    }
}

fn flip(contact: Option<RawContact>) -> Option<RawContact> {
    contact.map(|c| RawContact {
        position: c.position,
        normal: -c.normal,
        penetration: c.penetration,
    })
}

/// Contact between shape `a` and shape `b`; normal points from B into A.
/// `Err` marks an unsupported pair, `Ok(None)` a separated one.
pub fn collide_shapes(
    sa: &Shape,
    pa: &Isometry3<f64>,
    sb: &Shape,
    pb: &Isometry3<f64>,
) -> Result<Option<RawContact>, ()> {
    use Shape::*;
    match (sa, sb) {
        (Plane, Plane) => Err(()),
        (Plane, _) => Ok(flip(collide_shapes(sb, pb, sa, pa)?)),
        (_, Plane) => Ok(solid_vs_plane(sa, pa, pb)),

        (Sphere { radius }, _) => Ok(sphere_vs_solid(&pa.translation.vector, *radius, sb, pb)),
        (_, Sphere { .. }) => Ok(flip(collide_shapes(sb, pb, sa, pa)?)),

        (
            Capsule {
                radius: ra,
                half_length: ha,
            },
            Capsule {
                radius: rb,
                half_length: hb,
            },
        ) => {
            let (a0, a1) = capsule_segment(pa, *ha);
            let (b0, b1) = capsule_segment(pb, *hb);
            let (qa, qb) = closest_between_segments(&a0, &a1, &b0, &b1);
            let delta = qa - qb;
            let dist = delta.norm();
            let pen = ra + rb - dist;
            if pen <= 0.0 {
                return Ok(None);
            }
            let normal = if dist > 1e-12 {
                delta / dist
            } else {
                Vector3::z()
            };
            Ok(Some(RawContact {
                position: qb + normal * (rb - 0.5 * pen),
                normal,
                penetration: pen,
            }))
        }
        (
            Capsule {
                radius,
                half_length,
            },
            Box { .. } | Cylinder { .. } | Ellipsoid { .. },
        ) => Ok(capsule_vs_solid(pa, *radius, *half_length, sb, pb)),
        (Box { .. } | Cylinder { .. } | Ellipsoid { .. }, Capsule { .. }) => {
            Ok(flip(collide_shapes(sb, pb, sa, pa)?))
        }

        _ => Err(()),
    }
}

/// All contacts among collision-enabled, penetrating geom pairs.
///
/// Pairs sharing a parent body are skipped, as are pairs where both parents
/// are static (no dynamic response is possible). Unsupported shape pairs
/// abort with [`DynamicsError::UnsupportedPair`].
pub fn detect_contacts(world: &WorldState) -> Result<Vec<ContactPoint>, DynamicsError> {
    let mut contacts = Vec::new();
    for i in 0..world.geoms.len() {
        for j in (i + 1)..world.geoms.len() {
            let (ga, gb) = (&world.geoms[i], &world.geoms[j]);
            if ga.parent_body == gb.parent_body || !collision_enabled(ga, gb) {
                continue;
            }
            let (body_a, body_b) = (world.body(ga.parent_body), world.body(gb.parent_body));
            if body_a.is_static && body_b.is_static {
                continue;
            }
            let pa = world.geom_world_pose(GeomId(i));
            let pb = world.geom_world_pose(GeomId(j));
            let reach = ga.shape.bounding_radius() + gb.shape.bounding_radius();
            if reach.is_finite()
                && (pa.translation.vector - pb.translation.vector).norm() > reach
            {
                continue;
            }
            let raw = collide_shapes(&ga.shape, &pa, &gb.shape, &pb).map_err(|_| {
                DynamicsError::UnsupportedPair {
                    a: GeomId(i),
                    b: GeomId(j),
                    a_shape: ga.shape.name(),
                    b_shape: gb.shape.name(),
                }
            })?;
            if let Some(c) = raw {
                let va = body_a.velocity_at(&c.position);
                let vb = body_b.velocity_at(&c.position);
                let v_rel = va - vb;
                let v_t = v_rel - c.normal * v_rel.dot(&c.normal);
                contacts.push(ContactPoint {
                    geom_a: GeomId(i),
                    geom_b: GeomId(j),
                    position: c.position,
                    normal: c.normal,
                    penetration: c.penetration,
                    normal_force: 0.0,
                    tangential_velocity: v_t,
                    friction_force: Vector3::zeros(),
                });
            }
        }
    }
    Ok(contacts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{GeomSpec, RigidBodyState, WorldState};
    use approx::assert_relative_eq;
    use nalgebra::UnitQuaternion;

    fn world_with_spheres(positions: &[(Vector3<f64>, f64)]) -> WorldState {
        let mut w = WorldState::new(0.002);
        for (pos, r) in positions {
            let body = w.add_body(RigidBodyState::dynamic(
                *pos,
                1.0,
                crate::types::InertiaSpec::default(),
            ));
            w.add_geom(GeomSpec::new(Shape::Sphere { radius: *r }, body));
        }
        w
    }

    #[test]
    fn sphere_sphere_overlap() {
        // Upper sphere listed first so the normal (from B into A) is +z.
        let w = world_with_spheres(&[
            (Vector3::new(0.0, 0.0, 1.5), 1.0),
            (Vector3::new(0.0, 0.0, 0.0), 1.0),
        ]);
        let contacts = detect_contacts(&w).unwrap();
        assert_eq!(contacts.len(), 1);
        assert_relative_eq!(contacts[0].penetration, 0.5, epsilon = 1e-12);
        assert_relative_eq!(contacts[0].normal, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-12);
    }

    #[test]
    fn separated_spheres_yield_nothing() {
        let w = world_with_spheres(&[
            (Vector3::new(0.0, 0.0, 0.0), 1.0),
            (Vector3::new(3.0, 0.0, 0.0), 1.0),
        ]);
        assert!(detect_contacts(&w).unwrap().is_empty());
    }

    #[test]
    fn sphere_on_plane() {
        let mut w = WorldState::new(0.002);
        let ball = w.add_body(RigidBodyState::dynamic(
            Vector3::new(0.0, 0.0, 0.8),
            1.0,
            crate::types::InertiaSpec::default(),
        ));
        w.add_geom(GeomSpec::new(Shape::Sphere { radius: 1.0 }, ball));
        let ground = w.add_body(RigidBodyState::fixed(
            Vector3::zeros(),
            UnitQuaternion::identity(),
        ));
        w.add_geom(GeomSpec::new(Shape::Plane, ground));
        let contacts = detect_contacts(&w).unwrap();
        assert_eq!(contacts.len(), 1);
        assert_relative_eq!(contacts[0].penetration, 0.2, epsilon = 1e-12);
        assert_relative_eq!(contacts[0].normal, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-12);
    }

    #[test]
    fn horizontal_capsule_rests_on_midpoint() {
        let pose = Isometry3::from_parts(
            Vector3::new(0.0, 0.0, 0.08).into(),
            UnitQuaternion::from_axis_angle(&Vector3::y_axis(), std::f64::consts::FRAC_PI_2),
        );
        let c = solid_vs_plane(
            &Shape::Capsule {
                radius: 0.1,
                half_length: 0.3,
            },
            &pose,
            &Isometry3::identity(),
        )
        .unwrap();
        // Axis now lies along world X; both ends are equally deep.
        assert_relative_eq!(c.penetration, 0.02, epsilon = 1e-9);
        assert_relative_eq!(c.position.x, 0.0, epsilon = 1e-9);
        assert_relative_eq!(c.position.z, -0.02, epsilon = 1e-9);
    }

    #[test]
    fn upright_cylinder_contact_is_disc_center() {
        let pose = Isometry3::translation(0.2, -0.1, 0.045);
        let c = solid_vs_plane(
            &Shape::Cylinder {
                radius: 0.05,
                half_length: 0.05,
            },
            &pose,
            &Isometry3::identity(),
        )
        .unwrap();
        assert_relative_eq!(c.penetration, 0.005, epsilon = 1e-12);
        assert_relative_eq!(c.position.x, 0.2, epsilon = 1e-12);
        assert_relative_eq!(c.position.y, -0.1, epsilon = 1e-12);
    }

    #[test]
    fn ellipsoid_plane_support_point() {
        let pose = Isometry3::translation(0.0, 0.0, 0.03);
        let c = solid_vs_plane(
            &Shape::Ellipsoid {
                a: 0.02,
                b: 0.03,
                c: 0.04,
            },
            &pose,
            &Isometry3::identity(),
        )
        .unwrap();
        assert_relative_eq!(c.penetration, 0.01, epsilon = 1e-9);
        assert_relative_eq!(c.position.z, -0.01, epsilon = 1e-9);
    }

    #[test]
    fn point_inside_box_exits_nearest_face() {
        let q = point_vs_box(
            &Isometry3::identity(),
            &Vector3::new(1.0, 1.0, 0.1),
            &Vector3::new(0.2, 0.3, 0.05),
        );
        assert_relative_eq!(q.signed_distance, -0.05, epsilon = 1e-12);
        assert_relative_eq!(q.normal, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-12);
    }

    #[test]
    fn point_vs_ellipsoid_matches_sphere_case() {
        // A degenerate ellipsoid with equal semi-axes is a sphere.
        let q = point_vs_ellipsoid(
            &Isometry3::identity(),
            &Vector3::new(0.5, 0.5, 0.5),
            &Vector3::new(2.0, 0.0, 0.0),
        );
        assert_relative_eq!(q.signed_distance, 1.5, epsilon = 1e-9);
        assert_relative_eq!(q.surface_point.x, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn point_vs_ellipsoid_interior_is_negative() {
        let q = point_vs_ellipsoid(
            &Isometry3::identity(),
            &Vector3::new(0.04, 0.04, 0.02),
            &Vector3::new(0.0, 0.0, 0.01),
        );
        assert!(q.signed_distance < 0.0);
        assert!(q.signed_distance > -0.02);
    }

    #[test]
    fn capsule_vs_cylinder_side() {
        // Capsule parallel to the cylinder axis, offset 0.14 along X; wall
        // gap 0.04 against capsule radius 0.05 leaves 0.01 overlap.
        let cap = Isometry3::translation(0.14, 0.0, 0.0);
        let c = collide_shapes(
            &Shape::Capsule {
                radius: 0.05,
                half_length: 0.2,
            },
            &cap,
            &Shape::Cylinder {
                radius: 0.1,
                half_length: 0.3,
            },
            &Isometry3::identity(),
        )
        .unwrap()
        .unwrap();
        assert_relative_eq!(c.penetration, 0.01, epsilon = 1e-6);
        assert_relative_eq!(c.normal.x, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn box_box_is_unsupported() {
        let shape = Shape::Box {
            hx: 1.0,
            hy: 1.0,
            hz: 1.0,
        };
        assert!(collide_shapes(&shape, &Isometry3::identity(), &shape, &Isometry3::identity())
            .is_err());
    }

    #[test]
    fn filter_masks() {
        let mk = |contype, conaffinity| {
            GeomSpec::new(Shape::Sphere { radius: 1.0 }, crate::types::BodyId(0))
                .with_masks(contype, conaffinity)
        };
        assert!(collision_enabled(&mk(1, 1), &mk(1, 1)));
        assert!(!collision_enabled(&mk(2, 4), &mk(8, 16)));
        assert!(collision_enabled(&mk(1, 0), &mk(0, 1)));
    }
}
