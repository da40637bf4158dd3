//! Deterministic rigid-body simulation with primitive-shape contacts.
//!
//! The contact response follows a constraint-impedance law: each contact
//! channel blends the unconstrained acceleration with a virtual spring
//! reference `-b*v - k*r` through the impedance `d`, and sliding friction is
//! Coulomb (`-mu1 * F_n * v_t/|v_t|`). Integration is fixed-step
//! semi-implicit Euler. Collision pairs are filtered by contype/conaffinity
//! bitmasks; see [`collision_enabled`].
//!
//! Stepping is bit-for-bit deterministic: the same [`WorldState`] always
//! produces the same successor. A world is single-threaded but may be moved
//! between threads; independent worlds step in parallel freely.

mod contact;
mod error;
mod inertia;
mod narrow;
pub mod scene;
mod step;
mod types;

pub use contact::{clamp_norm, constraint_acceleration, friction_force, V_EPS};
pub use error::DynamicsError;
pub use inertia::scaled_inertia;
pub use narrow::{collision_enabled, detect_contacts, NARROW_PHASE_TOL};
pub use step::step;
pub use types::{
    BodyId, ContactPoint, GeomId, GeomSpec, ImpedanceParams, InertiaSpec, RigidBodyState, Shape,
    WorldState,
};
