use hexwall_core::robot::NUM_LEGS;
use hexwall_core::{LegJointAngles, WholeBodyState};
use hexwall_sim::config::default_config;
use hexwall_sim::log::{header, LogRow};
use hexwall_sim::scenario::{bundled, parse_scenario};
use hexwall_sim::{emit_metrics, run_scenario, RunOutput, SimError};
use nalgebra::Vector2;

fn run(name: &str) -> RunOutput {
    run_scenario(&default_config(), &bundled(name).unwrap()).unwrap()
}

/// Signed distance from `p` to the boundary of the convex hull of `pts`,
/// found by checking every pair of points for a supporting line.
fn margin_oracle(pts: &[Vector2<f64>], p: &Vector2<f64>) -> f64 {
    let side = |a: &Vector2<f64>, b: &Vector2<f64>, c: &Vector2<f64>| (b - a).perp(&(c - a));
    let mut best = f64::INFINITY;
    let mut inside = true;
    for a in pts {
        for b in pts {
            if a == b || !pts.iter().all(|c| side(a, b, c) >= -1e-12) {
                continue;
            }
            let t = ((p - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
            best = best.min((p - (a + (b - a) * t)).norm());
            inside &= side(a, b, p) >= 0.0;
        }
    }
    if inside {
        best
    } else {
        -best
    }
}

fn state_of(row: &LogRow) -> WholeBodyState<f64> {
    let mut s = WholeBodyState {
        body: Default::default(),
        legs: [LegJointAngles::new(0.0, 0.0, 0.0); NUM_LEGS],
        arm: [0.0; 3],
        manipulator: [0.0; 3],
        stance: row.stance,
    };
    s.set_joint_angles(&row.joints);
    s
}

#[test]
fn standstill_holds_the_body_still() {
    let out = run("standstill");
    let first = out.rows[0].body;
    for r in &out.rows {
        for (a, b) in r.body.iter().zip(&first) {
            assert!((a - b).abs() < 1e-9);
        }
    }
    assert!(out.metrics.body_displacement < 1e-9 && out.metrics.body_yaw_deg.abs() < 1e-9);
}

#[test]
fn log_shape_and_time_base() {
    let scenario = bundled("walk_and_install").unwrap();
    let out = run_scenario(&default_config(), &scenario).unwrap();
    assert_eq!(out.rows.len(), (scenario.duration / scenario.tick).round() as usize + 1);
    assert!(out.rows.windows(2).all(|w| w[1].time > w[0].time));
    assert_eq!(header().len(), out.rows[0].record().len());
    assert_eq!(out.metrics.rows, out.rows.len());
}

#[test]
fn angles_and_extensions_agree_on_every_row() {
    let config = default_config();
    let out = run("walk_and_adjust");
    for row in &out.rows {
        let state = state_of(row);
        let ext = config.cylinder_extensions(&state).unwrap();
        for (a, b) in ext.iter().zip(&row.extensions) {
            assert!((a - b).abs() < 1e-9);
        }
        let arm = config.arm_angles_from_extensions(&row.extensions).unwrap();
        for (a, b) in arm.iter().zip(&row.joints[18..]) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn metrics_match_recomputation_from_the_log() {
    let config = default_config();
    let out = run("turn_in_place_360");
    let mut min_margin = f64::INFINITY;
    for row in &out.rows {
        let feet: Vec<Vector2<f64>> = (0..6).filter(|&k| row.stance[k]).map(|k| Vector2::new(row.feet[k][0], row.feet[k][1])).collect();
        let m = margin_oracle(&feet, &Vector2::new(row.com[0], row.com[1]));
        assert!((m - row.margin).abs() < 1e-12);
        min_margin = min_margin.min(m);
    }
    assert!((out.metrics.min_margin - min_margin).abs() < 1e-12);
    assert_eq!(out.metrics.saturated_ticks, out.rows.iter().filter(|r| r.saturated).count());
    let mut flagged = out.rows.clone();
    for r in flagged.iter_mut().step_by(7) {
        r.saturated = true;
    }
    assert_eq!(emit_metrics(&flagged, &config.limits).saturated_ticks, flagged.iter().filter(|r| r.saturated).count());
}

#[test]
fn stance_feet_stay_pinned() {
    for name in ["turn_in_place_360", "walk_and_install", "walk_and_adjust"] {
        assert!(run(name).metrics.max_pin_slip < 1e-9, "{name}");
    }
}

#[test]
fn body_height_stays_level_while_walking() {
    let out = run("walk_and_install");
    let per_cycle = 200;
    for chunk in out.rows.chunks(per_cycle) {
        let (lo, hi) = chunk.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.body[2]), hi.max(r.body[2])));
        assert!(hi - lo < 2e-3);
    }
}

#[test]
fn overlong_steps_are_infeasible() {
    let text = include_str!("../data/scenarios/walk_and_install.toml").replace("velocity = [0.1, 0.0]", "velocity = [0.25, 0.0]");
    let err = run_scenario(&default_config(), &parse_scenario(&text).unwrap()).unwrap_err();
    assert!(matches!(err, SimError::Plan(_)) && !err.is_validation(), "{err}");
}

#[test]
fn payload_over_capacity_is_rejected() {
    let text = include_str!("../data/scenarios/walk_and_install.toml").replace("payload = 60.0", "payload = 150.0");
    let err = run_scenario(&default_config(), &parse_scenario(&text).unwrap()).unwrap_err();
    assert!(err.is_validation(), "{err}");
}
