use std::f64::consts::{PI, TAU};

use hexwall_core::gait::{max_yaw_per_cycle, xy};
use hexwall_core::robot::{TRIPOD_A, TRIPOD_B};
use hexwall_core::stability::convex_hull;
use hexwall_core::tasks::{TaskKind, DEFAULT_PRIORITY_ORDER};
use hexwall_core::{
    assemble_task_stack, plan_swing_trajectory, plan_tripod_gait, plan_turn_in_place, stability_margin, BodyCommand,
    FootstepPlan, GaitParams, PlanarPose, RobotModel, StabilityError,
};
use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gait() -> GaitParams<f64> {
    GaitParams { cycle_period: 2.0, duty_factor: 0.5, step_height: 0.08, step_length_max: 0.4, stance_width: 1.15 }
}

fn walk(v: [f64; 2], horizon: f64) -> FootstepPlan<f64> {
    let cmd = BodyCommand { velocity: v, yaw_rate: 0.0, body_height: 0.5 };
    plan_tripod_gait(&RobotModel::desk_scale(), &gait(), &cmd, PlanarPose::default(), horizon).unwrap()
}

fn check_tripod_invariant(plan: &FootstepPlan<f64>) {
    let n = (plan.horizon / 0.01) as usize;
    for i in 0..=n {
        let t = i as f64 * 0.01;
        let s = plan.stance_set(t);
        let down: Vec<usize> = (0..6).filter(|&k| s[k]).collect();
        assert!(down.len() == 6 || down == TRIPOD_A || down == TRIPOD_B, "t = {t}: {down:?}");
        let feet: Vec<Vector2<f64>> = down.iter().map(|&k| xy(&plan.foot_target(k, t))).collect();
        let centre = xy(&plan.reference.pose_at(t).translation);
        assert!(stability_margin(&feet, &centre).unwrap() > 0.0);
    }
}

#[test]
fn walking_plan_keeps_a_tripod_down() {
    check_tripod_invariant(&walk([0.1, 0.05], 12.0));
}

#[test]
fn turning_plan_keeps_a_tripod_down() {
    let plan = plan_turn_in_place(&RobotModel::desk_scale(), PI, &gait(), PlanarPose::default(), 0.5).unwrap();
    check_tripod_invariant(&plan);
}

#[test]
fn straight_walk_advances_footholds_uniformly() {
    let v = [0.1, 0.0];
    let plan = walk(v, 12.0);
    let step = Vector3::new(v[0] * 2.0, v[1] * 2.0, 0.0);
    for leg in 0..6 {
        let holds = plan.footholds(leg);
        // The first step of each leg covers a partial cycle; the rest span exactly one.
        for w in holds[1..].windows(2) {
            assert!((w[1] - w[0] - step).norm() < 1e-9, "leg {leg}");
        }
    }
    for k in 0..6 {
        let a = plan.reference.pose_at(2.0 * k as f64).translation;
        let b = plan.reference.pose_at(2.0 * (k + 1) as f64).translation;
        assert!(((b - a).norm() - v[0] * 2.0).abs() < 1e-9);
    }
}

#[test]
fn two_cycle_horizon_gives_two_swings_per_leg() {
    let plan = walk([0.1, 0.0], 4.0);
    for leg in 0..6 {
        assert_eq!(plan.legs[leg].swings.len(), 2, "leg {leg}");
    }
    for t in [0.5, 2.5] {
        assert!(TRIPOD_A.iter().all(|&k| !plan.in_stance(k, t)) && TRIPOD_B.iter().all(|&k| plan.in_stance(k, t)));
    }
    for t in [1.5, 3.5] {
        assert!(TRIPOD_B.iter().all(|&k| !plan.in_stance(k, t)) && TRIPOD_A.iter().all(|&k| plan.in_stance(k, t)));
    }
}

#[test]
fn zero_turn_has_no_swings() {
    let plan = plan_turn_in_place(&RobotModel::desk_scale(), 0.0, &gait(), PlanarPose::default(), 0.5).unwrap();
    assert_eq!(plan.swing_count(), 0);
}

#[test]
fn full_turn_keeps_footholds_on_a_circle() {
    let start = PlanarPose { x: 0.3, y: -0.2, yaw: 0.1 };
    let plan = plan_turn_in_place(&RobotModel::desk_scale(), TAU, &gait(), start, 0.5).unwrap();
    let centre = Vector3::new(start.x, start.y, 0.0);
    for leg in 0..6 {
        for f in plan.footholds(leg) {
            assert!(((f - centre).norm() - 1.15).abs() < 1e-9);
        }
    }
    let end = plan.reference.planar_at(plan.horizon);
    assert!((end.yaw - start.yaw - TAU).abs() < 1e-12);
    assert!((end.x - start.x).abs() < 1e-12 && (end.y - start.y).abs() < 1e-12);
    for leg in 0..6 {
        let holds = plan.footholds(leg);
        for w in holds.windows(2) {
            assert!((w[1] - w[0]).norm() <= gait().step_length_max + 1e-12);
        }
    }
    assert!(max_yaw_per_cycle(&gait()) > 0.3);
}

#[test]
fn turning_is_rotation_equivariant() {
    let model = RobotModel::desk_scale();
    let delta = 0.37;
    let a = plan_turn_in_place(&model, 1.2, &gait(), PlanarPose::default(), 0.5).unwrap();
    let b = plan_turn_in_place(&model, 1.2, &gait(), PlanarPose { x: 0.0, y: 0.0, yaw: delta }, 0.5).unwrap();
    let rot = nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), delta);
    for leg in 0..6 {
        for (fa, fb) in a.footholds(leg).iter().zip(b.footholds(leg)) {
            assert!((rot * fa - fb).norm() < 1e-9);
        }
    }
}

#[test]
fn swing_apex_clears_both_ends() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let s = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.1..0.1));
        let e = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.1..0.1));
        let h = rng.random_range(0.01..0.2);
        let d = rng.random_range(0.2..2.0);
        let path = plan_swing_trajectory(s, e, h, d);
        assert!((path.position(0.0) - s).norm() < 1e-12 && (path.position(d) - e).norm() < 1e-12);
        let top = (0..=2000).map(|i| path.position(d * i as f64 / 2000.0).z).fold(f64::MIN, f64::max);
        assert!(top >= s.z.max(e.z) + h - 1e-9);
    }
    let p = Vector3::<f64>::new(0.4, 0.2, 0.0);
    let in_place = plan_swing_trajectory(p, p, 0.1f64, 1.0);
    assert!((in_place.position(0.5).z - 0.1).abs() < 1e-12);
    assert!((in_place.position(0.3).xy() - p.xy()).norm() < 1e-15);
}

#[test]
fn stack_structure_follows_the_schedule() {
    let standstill = walk([0.0, 0.0], 4.0);
    let trunk = standstill.reference.pose_at(1.0);
    let stack = assemble_task_stack(&standstill, trunk, None, 1.0, &DEFAULT_PRIORITY_ORDER);
    stack.validate().unwrap();
    assert_eq!(stack.tasks.len(), 7);
    assert_eq!(stack.tasks.iter().filter(|t| matches!(t.kind, TaskKind::StancePin { .. })).count(), 6);

    let plan = walk([0.1, 0.0], 8.0);
    let stack = assemble_task_stack(&plan, plan.reference.pose_at(0.5), None, 0.5, &DEFAULT_PRIORITY_ORDER);
    let pins = stack.tasks.iter().filter(|t| matches!(t.kind, TaskKind::StancePin { .. })).count();
    let swings = stack.tasks.iter().filter(|t| matches!(t.kind, TaskKind::SwingFoot { .. })).count();
    assert_eq!((pins, swings), (3, 3));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let t = rng.random_range(0.0..8.0);
        let stack = assemble_task_stack(&plan, plan.reference.pose_at(t), Some(plan.reference.pose_at(t)), t, &DEFAULT_PRIORITY_ORDER);
        stack.validate().unwrap();
        for leg in 0..6 {
            let n = stack.tasks.iter().filter(|x| matches!(x.kind, TaskKind::StancePin { leg: l, .. } if l == leg)).count();
            assert_eq!(n, usize::from(plan.in_stance(leg, t)));
        }
    }
}

/// Brute-force signed margin: hull edges found by testing every point pair,
/// distance as the minimum over point-to-segment distances.
fn margin_oracle(points: &[Vector2<f64>], p: &Vector2<f64>) -> f64 {
    let side = |a: &Vector2<f64>, b: &Vector2<f64>, c: &Vector2<f64>| (b - a).perp(&(c - a));
    let mut edges = Vec::new();
    for (i, a) in points.iter().enumerate() {
        for (j, b) in points.iter().enumerate() {
            if i != j && a != b && points.iter().all(|c| side(a, b, c) >= -1e-12) {
                edges.push((*a, *b));
            }
        }
    }
    let dist = |a: &Vector2<f64>, b: &Vector2<f64>| {
        let t = ((p - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
        (p - (a + (b - a) * t)).norm()
    };
    let d = edges.iter().map(|(a, b)| dist(a, b)).fold(f64::INFINITY, f64::min);
    let inside = edges.iter().all(|(a, b)| side(a, b, p) >= 0.0);
    if inside {
        d
    } else {
        -d
    }
}

#[test]
fn margin_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let n = rng.random_range(3..7);
        let pts: Vec<Vector2<f64>> = (0..n).map(|_| Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        if convex_hull(&pts).len() < 3 {
            continue;
        }
        let p = Vector2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        match stability_margin(&pts, &p) {
            Ok(m) => assert!((m - margin_oracle(&pts, &p)).abs() < 1e-12, "{pts:?} {p:?}"),
            Err(StabilityError::DegenerateSupport { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn margin_of_unit_square_and_its_edge() {
    let sq = [Vector2::<f64>::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(1.0, 1.0), Vector2::new(0.0, 1.0)];
    assert!((stability_margin(&sq, &Vector2::new(0.5, 0.5)).unwrap() - 0.5).abs() < 1e-15);
    assert!(stability_margin(&sq, &Vector2::new(0.3, 1.0)).unwrap().abs() < 1e-12);
}
