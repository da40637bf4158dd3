//! End-to-end tactile pipeline: dynamics contacts feed taxel readings.

use dynamics_core::{step, GeomId, GeomSpec, InertiaSpec, RigidBodyState, Shape, WorldState};
use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;
use tactile_array::{downsample, tactile_observation, update_taxels, TactileSystem, TaxelArray, TaxelParams};

/// A ball resting on a static pad plate whose upper face carries a taxel grid.
fn pad_scene() -> (WorldState, TactileSystem) {
    let mut world = WorldState::new(0.002);

    let pad_body = world.add_body(RigidBodyState::fixed(
        Vector3::zeros(),
        UnitQuaternion::identity(),
    ));
    let pad_geom = world.add_geom(
        GeomSpec::new(
            Shape::Box {
                hx: 0.02,
                hy: 0.02,
                hz: 0.005,
            },
            pad_body,
        )
        .with_friction(0.6),
    );

    let ball_shape = Shape::Sphere { radius: 0.01 };
    let mass = 0.05;
    let ball = world.add_body(RigidBodyState::dynamic(
        Vector3::new(0.0, 0.0, 0.0149),
        mass,
        InertiaSpec::from_tensor(ball_shape.solid_inertia(mass)),
    ));
    world.add_geom(GeomSpec::new(ball_shape, ball).with_friction(0.6));

    // Grid on the pad's top face (z = +hz in the pad frame).
    let array = TaxelArray::grid(
        pad_geom,
        8,
        8,
        0.002,
        Vector3::new(0.0, 0.0, 0.005),
        TaxelParams::default(),
    )
    .unwrap();
    let system = TactileSystem::new(vec![array], &[pad_geom]).unwrap();
    (world, system)
}

#[test]
fn resting_ball_produces_centered_reading_near_its_weight() {
    let (mut world, mut system) = pad_scene();
    for _ in 0..1500 {
        world = step(&world).unwrap();
        update_taxels(&mut system, &world, world.dt).unwrap();
    }
    let array = system.array(GeomId(0)).unwrap();
    let grid = array.readings();

    let total: f64 = grid.values.iter().sum();
    let weight = 0.05 * 9.81;
    assert!(
        (total - weight).abs() <= 0.1 * weight,
        "summed reading {total} vs weight {weight}"
    );

    // The ball sits over the grid center; corner taxels stay silent.
    assert_eq!(grid.at(0, 0), 0.0);
    assert_eq!(grid.at(7, 7), 0.0);
    let center_peak = grid.at(3, 3).max(grid.at(3, 4)).max(grid.at(4, 3)).max(grid.at(4, 4));
    assert!(center_peak > 0.0);
}

#[test]
fn observation_vector_tracks_contact() {
    let (mut world, mut system) = pad_scene();
    for _ in 0..500 {
        world = step(&world).unwrap();
        update_taxels(&mut system, &world, world.dt).unwrap();
    }
    let arrays = system.arrays_cloned();
    let obs = tactile_observation(&arrays, 2).unwrap();
    assert_eq!(obs.len(), 16);
    assert!(obs.iter().any(|&v| v > 0.0));
    assert!(obs.iter().all(|&v| v >= 0.0));
}

#[test]
fn lifting_the_ball_lets_readings_decay() {
    let (mut world, mut system) = pad_scene();
    for _ in 0..500 {
        world = step(&world).unwrap();
        update_taxels(&mut system, &world, world.dt).unwrap();
    }
    // Teleport the ball away; readings must decay toward zero.
    world.bodies[1].position.z = 0.1;
    world.bodies[1].linear_velocity = Vector3::zeros();
    world.gravity = Vector3::zeros();
    for _ in 0..500 {
        world = step(&world).unwrap();
        update_taxels(&mut system, &world, world.dt).unwrap();
    }
    let grid = system.array(GeomId(0)).unwrap().readings();
    assert!(grid.values.iter().all(|&v| v < 1e-3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn readings_stay_non_negative_under_random_presses(
        x in -0.008..0.008f64,
        y in -0.008..0.008f64,
        drop in 0.0..0.002f64,
    ) {
        let (mut world, mut system) = pad_scene();
        world.bodies[1].position = Vector3::new(x, y, 0.0149 + drop);
        for _ in 0..400 {
            world = step(&world).unwrap();
            update_taxels(&mut system, &world, world.dt).unwrap();
            let grid = system.array(GeomId(0)).unwrap().readings();
            prop_assert!(grid.values.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn downsample_idempotence(stride in 1usize..6) {
        let (mut world, mut system) = pad_scene();
        for _ in 0..200 {
            world = step(&world).unwrap();
            update_taxels(&mut system, &world, world.dt).unwrap();
        }
        let grid = system.array(GeomId(0)).unwrap().readings();
        let once = downsample(&grid, stride).unwrap();
        let again = downsample(&once, 1).unwrap();
        prop_assert_eq!(once, again);
    }
}
