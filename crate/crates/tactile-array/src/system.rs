//! Wiring between world contacts and the taxel arrays of a scene.

use std::collections::BTreeMap;

use dynamics_core::{GeomId, WorldState};
use serde::{Deserialize, Serialize};

use crate::array::TaxelArray;
use crate::TactileError;

/// All taxel arrays of one simulation instance, keyed by pad geometry.
///
/// Owned by its world; single-threaded per instance, independent instances
/// run in parallel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TactileSystem {
    arrays: BTreeMap<GeomId, TaxelArray>,
    /// Pads declared by the scene; every one of them must carry an array.
    declared_pads: Vec<GeomId>,
}

impl TactileSystem {
    pub fn new(arrays: Vec<TaxelArray>, declared_pads: &[GeomId]) -> Result<Self, TactileError> {
        let mut map = BTreeMap::new();
        for array in arrays {
            if map.insert(array.pad_id, array).is_some() {
                return Err(TactileError::Config(
                    "duplicate taxel array for one pad".into(),
                ));
            }
        }
        for pad in declared_pads {
            if !map.contains_key(pad) {
                return Err(TactileError::Config(format!(
                    "declared pad {pad:?} has no taxel array"
                )));
            }
        }
        Ok(TactileSystem {
            arrays: map,
            declared_pads: declared_pads.to_vec(),
        })
    }

    /// Arrays in canonical (pad id) order.
    pub fn arrays(&self) -> Vec<&TaxelArray> {
        self.arrays.values().collect()
    }

    pub fn arrays_cloned(&self) -> Vec<TaxelArray> {
        self.arrays.values().cloned().collect()
    }

    pub fn array(&self, pad: GeomId) -> Option<&TaxelArray> {
        self.arrays.get(&pad)
    }

    /// Per-pad `(rows, cols)` in canonical order.
    pub fn layout(&self) -> Vec<(usize, usize)> {
        self.arrays.values().map(|a| (a.rows, a.cols)).collect()
    }

    pub fn reset(&mut self) {
        for array in self.arrays.values_mut() {
            for taxel in &mut array.taxels {
                taxel.state = Default::default();
            }
        }
    }
}

/// Feed the contacts of the last dynamics step into the taxel arrays and
/// advance their spring-dampers by `dt`.
///
/// A contact touching a declared pad that has no array is a configuration
/// error; contacts on other geoms are not tactile and are skipped.
pub fn update_taxels(
    system: &mut TactileSystem,
    world: &WorldState,
    dt: f64,
) -> Result<(), TactileError> {
    let mut per_pad: BTreeMap<GeomId, Vec<(nalgebra::Vector3<f64>, f64)>> = BTreeMap::new();
    for contact in &world.contacts {
        for pad in [contact.geom_a, contact.geom_b] {
            if !system.declared_pads.contains(&pad) {
                continue;
            }
            if !system.arrays.contains_key(&pad) {
                return Err(TactileError::Config(format!(
                    "contact references pad {pad:?} without a taxel array"
                )));
            }
            let pose = world.geom_world_pose(pad);
            let local = pose.inverse_transform_point(&contact.position.into()).coords;
            per_pad
                .entry(pad)
                .or_default()
                .push((local, contact.normal_force));
        }
    }
    for (pad, array) in system.arrays.iter_mut() {
        let loads = per_pad.remove(pad).unwrap_or_default();
        array.apply_contact_forces(&loads);
        array.integrate(dt);
    }
    Ok(())
}
