use std::f64::consts::PI;

use hexwall_core::folding_arm::fold_angle_from_extension;
use hexwall_core::manipulator::{module_angle_from_extension, module_aux_extension, module_primary_extension};
use hexwall_core::{fold_extension, fold_torque, module_torque, FoldLinkGeometry, ModuleGeometry, RobotModel, RotationSense};
use nalgebra::{Rotation2, Vector2};

fn rotate(p: Vector2<f64>, angle: f64) -> Vector2<f64> {
    Rotation2::new(angle) * p
}

/// Cylinder extension from explicit anchor coordinates: `C` fixed on the
/// parent link, `B` carried by the child link rotating about `A` (origin).
fn fold_oracle(link: &FoldLinkGeometry<f64>, theta: f64) -> f64 {
    let c = Vector2::new(link.l_anchor_b, 0.0);
    let b_rest = rotate(Vector2::new(link.l_anchor_a, 0.0), link.rest_angle);
    (rotate(b_rest, theta) - c).norm() - (b_rest - c).norm()
}

/// Module cylinder extensions (rest minus current) from rotated points about `O`.
fn module_oracle(m: &ModuleGeometry<f64>, theta: f64) -> (f64, f64) {
    let l = Vector2::new(m.l_lo, 0.0);
    let k = rotate(Vector2::new(m.l_lo, 0.0), -m.ang_kol);
    let r = Vector2::new(-m.l_ro, 0.0);
    let mm = rotate(Vector2::new(-m.l_ro, 0.0), m.ang_mor);
    let kl = (k - l).norm() - (rotate(k, theta) - l).norm();
    let mr = (mm - r).norm() - (rotate(mm, theta) - r).norm();
    (kl, mr)
}

fn sweep(limits: [f64; 2], n: usize) -> impl Iterator<Item = f64> {
    let [lo, hi] = limits;
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

#[test]
fn fold_extension_matches_anchor_coordinates() {
    let model = RobotModel::<f64>::desk_scale();
    for link in model.fold_arm.links.iter().chain(&model.leg_cylinders) {
        for theta in sweep(link.joint_limits, 1000) {
            assert!((fold_extension(link, theta).unwrap() - fold_oracle(link, theta)).abs() < 1e-12);
        }
    }
}

#[test]
fn module_extensions_match_rotated_points() {
    let model = RobotModel::<f64>::desk_scale();
    for m in &model.manipulator.modules {
        for theta in sweep(m.joint_limits, 1000) {
            let (kl, mr) = module_oracle(m, theta);
            assert!((module_primary_extension(m, theta).unwrap() - kl).abs() < 1e-12);
            assert!((module_aux_extension(m, theta).unwrap() - mr).abs() < 1e-12);
        }
    }
}

#[test]
fn unequal_apex_angles_match_rotated_points() {
    let m = ModuleGeometry::from_apex_angles(0.2, 0.1, 1.9, 1.2, [-0.6, 0.6]).unwrap();
    for theta in sweep(m.joint_limits, 200) {
        let (kl, mr) = module_oracle(&m, theta);
        assert!((module_primary_extension(&m, theta).unwrap() - kl).abs() < 1e-12);
        assert!((module_aux_extension(&m, theta).unwrap() - mr).abs() < 1e-12);
    }
}

#[test]
fn fold_torque_is_force_times_extension_rate() {
    let model = RobotModel::<f64>::desk_scale();
    let h = 1e-6;
    let force = 1234.5;
    for link in &model.fold_arm.links {
        let [lo, hi] = link.joint_limits;
        for theta in sweep([lo + h, hi - h], 500) {
            let rate = (fold_extension(link, theta + h).unwrap() - fold_extension(link, theta - h).unwrap()) / (2.0 * h);
            let torque = fold_torque(link, theta, force).unwrap();
            assert!((torque - force * rate).abs() <= 1e-5 * (force * rate).abs(), "theta {theta}");
        }
    }
}

#[test]
fn module_primary_lever_is_extension_rate() {
    let model = RobotModel::<f64>::desk_scale();
    let m = &model.manipulator.modules[0];
    let h = 1e-6;
    for theta in sweep([m.joint_limits[0] + h, m.joint_limits[1] - h], 200) {
        let rate = (module_primary_extension(m, theta + h).unwrap() - module_primary_extension(m, theta - h).unwrap()) / (2.0 * h);
        let t4 = module_torque(m, theta, 1.0, 0.0, 0.0).unwrap();
        assert!((t4 - rate).abs() < 1e-8);
    }
}

#[test]
fn auxiliary_lever_uses_the_primary_radius() {
    // The auxiliary term is scaled by l_LO; virtual work on the MR triangle
    // gives l_RO instead, so the two differ by exactly l_LO / l_RO.
    let model = RobotModel::<f64>::desk_scale();
    let m = &model.manipulator.modules[0];
    let h = 1e-6;
    for theta in sweep([-0.5, 0.5], 11) {
        let rate = (module_aux_extension(m, theta + h).unwrap() - module_aux_extension(m, theta - h).unwrap()) / (2.0 * h);
        let t4 = module_torque(m, theta, 0.0, 0.5, 0.5).unwrap();
        assert!((t4 / rate - m.l_lo / m.l_ro).abs() < 1e-6);
    }
}

#[test]
fn inverse_maps_round_trip() {
    let model = RobotModel::<f64>::desk_scale();
    for link in &model.fold_arm.links {
        for theta in sweep(link.joint_limits, 300) {
            let back = fold_angle_from_extension(link, fold_extension(link, theta).unwrap()).unwrap();
            assert!((back - theta).abs() < 1e-9);
        }
    }
    for m in &model.manipulator.modules {
        for theta in sweep(m.joint_limits, 300) {
            let back = module_angle_from_extension(m, module_primary_extension(m, theta).unwrap()).unwrap();
            assert!((back - theta).abs() < 1e-12);
        }
    }
}

#[test]
fn clockwise_link_reverses_the_physical_angle() {
    let link = FoldLinkGeometry::from_triangle(0.1, 0.3, PI / 3.0, [-0.5, 0.5], RotationSense::Clockwise).unwrap();
    assert_eq!(link.coordinate_from_physical(0.2), -0.2);
}
