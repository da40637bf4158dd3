//! Episode-level behavior: reset noise, determinism, action clamping, the
//! scripted closing oracle, and success classification.

use grasp_env::{
    trace_success, Action, Environment, GraspEnv, NoiseSpec, ObjectShape, RewardBreakdown,
    ScriptedCloser, StepRecord, SuccessConfig, TaskConfig,
};

fn task(shape: ObjectShape, tactile: bool) -> TaskConfig {
    TaskConfig {
        shape,
        tactile_enabled: tactile,
        ..TaskConfig::default()
    }
}

#[test]
fn zero_noise_observation_equals_true_pose() {
    let mut cfg = task(ObjectShape::Sphere, true);
    cfg.noise = NoiseSpec {
        pos_sigma: 0.0,
        ori_sigma: 0.0,
        seed: 7,
    };
    let mut env = GraspEnv::new(cfg).unwrap();
    let obs = env.reset(123).unwrap();
    let (pos, ori) = env.object_pose();
    assert_eq!(obs.object_pose_noisy[0], pos.x);
    assert_eq!(obs.object_pose_noisy[1], pos.y);
    assert_eq!(obs.object_pose_noisy[2], pos.z);
    assert_eq!(obs.object_pose_noisy[3], ori.w);
}

#[test]
fn same_seed_gives_identical_noisy_observation() {
    let mut env = GraspEnv::new(task(ObjectShape::Sphere, true)).unwrap();
    let a = env.reset(99).unwrap();
    let b = env.reset(99).unwrap();
    assert_eq!(a.object_pose_noisy, b.object_pose_noisy);
    assert_eq!(a.ee_pose, b.ee_pose);
}

#[test]
fn noise_statistics_match_the_sampler() {
    let mut cfg = task(ObjectShape::Sphere, false);
    cfg.noise.pos_sigma = 0.01;
    cfg.grasp_jitter_pos = 0.0;
    cfg.grasp_jitter_ori = 0.0;
    let mut env = GraspEnv::new(cfg).unwrap();
    let n = 10_000;
    let mut sums = [0.0f64; 3];
    let mut sq = [0.0f64; 3];
    for seed in 0..n {
        let obs = env.reset(seed).unwrap();
        let (true_pos, _) = env.object_pose();
        let err = [
            obs.object_pose_noisy[0] - true_pos.x,
            obs.object_pose_noisy[1] - true_pos.y,
            obs.object_pose_noisy[2] - true_pos.z,
        ];
        for i in 0..3 {
            sums[i] += err[i];
            sq[i] += err[i] * err[i];
        }
    }
    for i in 0..3 {
        let mean = sums[i] / n as f64;
        let std = (sq[i] / n as f64 - mean * mean).sqrt();
        assert!(mean.abs() <= 3.0 * (0.01 / 100.0), "axis {i} mean {mean}");
        assert!((std - 0.01).abs() <= 0.05 * 0.01, "axis {i} std {std}");
    }
}

#[test]
fn zero_action_keeps_the_scene_still() {
    let mut cfg = task(ObjectShape::Sphere, true);
    cfg.grasp_jitter_pos = 0.0;
    cfg.grasp_jitter_ori = 0.0;
    let mut env = GraspEnv::new(cfg).unwrap();
    env.reset(5).unwrap();
    let (pos0, _) = env.object_pose();
    let base0 = env.current_config();
    let mut reward = RewardBreakdown::default();
    for i in 0..20 {
        let (_, r, _) = env.env_step(&Action::zeros(6)).unwrap();
        if i == 0 {
            reward = r;
        } else {
            assert!((r.total - reward.total).abs() < 1e-9, "reward drifted");
        }
    }
    let (pos1, _) = env.object_pose();
    assert!((pos1 - pos0).norm() < 1e-6, "object moved {:?}", pos1 - pos0);
    let base1 = env.current_config();
    for (a, b) in base0.iter().zip(&base1) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn action_increments_are_clamped_to_limits() {
    let mut env = GraspEnv::new(task(ObjectShape::Sphere, false)).unwrap();
    env.reset(5).unwrap();
    let q0 = env.current_config();
    let mut action = Action::zeros(6);
    action.d_joints[0] = 10.0; // far beyond the 0.02 rad limit
    env.env_step(&action).unwrap();
    let q1 = env.current_config();
    let applied = q1[7] - q0[7];
    assert!((applied - 0.02).abs() < 1e-9, "applied {applied}");
}

#[test]
fn scripted_close_on_sphere_reaches_contact() {
    let mut cfg = task(ObjectShape::Sphere, true);
    cfg.grasp_jitter_pos = 0.0;
    cfg.grasp_jitter_ori = 0.0;
    cfg.noise.pos_sigma = 0.0;
    cfg.noise.ori_sigma = 0.0;
    let mut env = GraspEnv::new(cfg).unwrap();
    env.reset(3).unwrap();
    let closer = ScriptedCloser::default();
    let mut saw_zero = false;
    let mut max_t = 0;
    for _ in 0..200 {
        let action = closer.action(&env);
        let (_, _, done) = env.env_step(&action).unwrap();
        let t = env.fingertip_contact_count();
        if env.steps_taken() == 1 && t == 0 {
            saw_zero = true;
        }
        max_t = max_t.max(t);
        if done {
            break;
        }
    }
    assert!(saw_zero, "grasp should start contact-free");
    assert!(max_t >= 2, "scripted close only reached T={max_t}");
    assert!(env.is_success(), "scripted grasp should succeed");
}

#[test]
fn scripted_close_also_succeeds_on_column_and_ellipsoid() {
    for shape in [ObjectShape::Column, ObjectShape::Ellipsoid] {
        let mut cfg = task(shape, true);
        cfg.grasp_jitter_pos = 0.0;
        cfg.grasp_jitter_ori = 0.0;
        cfg.noise.pos_sigma = 0.0;
        cfg.noise.ori_sigma = 0.0;
        let mut env = GraspEnv::new(cfg).unwrap();
        env.reset(11).unwrap();
        let closer = ScriptedCloser::default();
        loop {
            let action = closer.action(&env);
            let (_, _, done) = env.env_step(&action).unwrap();
            if done {
                break;
            }
        }
        assert!(env.is_success(), "{shape:?} scripted grasp failed");
    }
}

#[test]
fn noise_seed_never_touches_the_true_trajectory() {
    let run = |noise_seed: u64| {
        let mut cfg = task(ObjectShape::Sphere, true);
        cfg.noise.seed = noise_seed;
        let mut env = GraspEnv::new(cfg).unwrap();
        env.reset(77).unwrap();
        let closer = ScriptedCloser::default();
        let mut poses = Vec::new();
        for _ in 0..60 {
            let action = closer.action(&env);
            env.env_step(&action).unwrap();
            poses.push(env.object_pose());
        }
        poses
    };
    let (a, b) = (run(1), run(2));
    for ((pa, qa), (pb, qb)) in a.iter().zip(&b) {
        assert_eq!(pa, pb, "true object position depends on the noise seed");
        assert_eq!(qa, qb);
    }
}

#[test]
fn tactile_block_present_iff_enabled() {
    let mut te = GraspEnv::new(task(ObjectShape::Sphere, true)).unwrap();
    let obs = te.reset(1).unwrap();
    assert_eq!(obs.tactile.as_ref().map(|t| t.len()), Some(48));
    assert_eq!(Environment::obs_dim(&te), 68);

    let mut td = GraspEnv::new(task(ObjectShape::Sphere, false)).unwrap();
    let obs = td.reset(1).unwrap();
    assert!(obs.tactile.is_none());
    assert_eq!(Environment::obs_dim(&td), 20);
}

#[test]
fn tactile_fires_once_fingers_touch() {
    let mut cfg = task(ObjectShape::Sphere, true);
    cfg.grasp_jitter_pos = 0.0;
    cfg.grasp_jitter_ori = 0.0;
    let mut env = GraspEnv::new(cfg).unwrap();
    env.reset(3).unwrap();
    let closer = ScriptedCloser::default();
    let mut max_sum = 0.0f64;
    for _ in 0..120 {
        let action = closer.action(&env);
        let (obs, _, _) = env.env_step(&action).unwrap();
        let sum: f64 = obs.tactile.as_ref().unwrap().iter().sum();
        max_sum = max_sum.max(sum);
    }
    assert!(max_sum > 0.1, "taxels never fired (max sum {max_sum})");
}

fn record(t: usize, pos_err: f64, ori_err: f64) -> StepRecord {
    StepRecord {
        step: 0,
        t_contacts: t,
        reward: RewardBreakdown::default(),
        pos_err,
        ori_err,
        joint_norm: 0.0,
        ee_pos: [0.0; 3],
        tactile_sum: 0.0,
        tactile_max: 0.0,
        action: vec![],
    }
}

#[test]
fn success_logic_on_constructed_traces() {
    let cfg = SuccessConfig::default();

    // Never touched.
    let untouched: Vec<_> = (0..200).map(|_| record(0, 0.0, 0.0)).collect();
    assert!(!trace_success(&untouched, &cfg));

    // Perfect hold.
    let held: Vec<_> = (0..200).map(|_| record(3, 0.002, 0.01)).collect();
    assert!(trace_success(&held, &cfg));

    // Grasp achieved, then the object slips out in the last 10 steps.
    let mut slipped: Vec<_> = (0..190).map(|_| record(3, 0.002, 0.01)).collect();
    slipped.extend((0..10).map(|_| record(0, 0.05, 0.01)));
    assert!(!trace_success(&slipped, &cfg));

    // Holding but the object drifted past the tolerance.
    let drifted: Vec<_> = (0..200).map(|_| record(3, 0.03, 0.01)).collect();
    assert!(!trace_success(&drifted, &cfg));
}

#[test]
fn reward_total_identity_along_an_episode() {
    let mut env = GraspEnv::new(task(ObjectShape::Capsule, true)).unwrap();
    env.reset(21).unwrap();
    let closer = ScriptedCloser::default();
    for _ in 0..80 {
        let action = closer.action(&env);
        let (_, r, _) = env.env_step(&action).unwrap();
        assert_eq!(
            r.total,
            r.q_fingertip - r.z_hand - r.z_fjoint - r.o_diff - r.d_diff
        );
        assert!(r.z_hand >= 0.0 && r.z_fjoint >= 0.0 && r.d_diff >= 0.0 && r.o_diff >= 0.0);
        assert!(r.total <= 2.0 * 3.0 + 1e-12);
    }
}

#[test]
fn stepping_after_done_is_an_error() {
    let mut cfg = task(ObjectShape::Sphere, false);
    cfg.horizon = 3;
    cfg.success.hold_steps = 2;
    let mut env = GraspEnv::new(cfg).unwrap();
    env.reset(1).unwrap();
    for _ in 0..3 {
        env.env_step(&Action::zeros(6)).unwrap();
    }
    assert!(env.is_done());
    assert!(env.env_step(&Action::zeros(6)).is_err());
}
