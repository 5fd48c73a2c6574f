//! Coxa-femur-tibia leg kinematics.
//!
//! The leg base frame has its z axis on the body-coxa joint. The D-H table is
//! `(a1, pi/2, 0)`, `(a2, 0, 0)`, `(a3, 0, 0)`; link lengths are configuration
//! values.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dh_link_transform, DhRow, HomogeneousTransform};
use crate::scalar::{lit, to_f64, wrap_angle, Real};

/// Foot position `(P_X, P_Y, P_Z)` in a leg base frame, meters.
pub type FootPosition<T> = Vector3<T>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LegError {
    #[error("foot target ({x:.6}, {y:.6}, {z:.6}) is unreachable: {reason}")]
    Unreachable { x: f64, y: f64, z: f64, reason: &'static str },
    #[error("joint {joint} solution {value:.6} rad outside limits [{min:.6}, {max:.6}]")]
    JointLimitViolation { joint: usize, value: f64, min: f64, max: f64 },
    #[error("invalid leg geometry: {0}")]
    InvalidGeometry(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegGeometry<T> {
    /// Coxa length.
    pub a1: T,
    /// Femur length.
    pub a2: T,
    /// Tibia length.
    pub a3: T,
    /// `[min, max]` per joint, radians.
    pub joint_limits: [[T; 2]; 3],
}

impl<T: Real> LegGeometry<T> {
    pub fn new(a1: T, a2: T, a3: T, joint_limits: [[T; 2]; 3]) -> Result<Self, LegError> {
        let g = Self { a1, a2, a3, joint_limits };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), LegError> {
        if !(self.a1 > T::zero() && self.a2 > T::zero() && self.a3 > T::zero()) {
            return Err(LegError::InvalidGeometry("link lengths must be positive"));
        }
        if self.joint_limits.iter().any(|[lo, hi]| !(lo < hi)) {
            return Err(LegError::InvalidGeometry("joint limit min must be below max"));
        }
        Ok(())
    }

    pub fn dh_rows(&self) -> [DhRow<T>; 3] {
        [
            DhRow { a: self.a1, alpha: T::frac_pi_2(), d: T::zero(), theta_offset: T::zero() },
            DhRow { a: self.a2, alpha: T::zero(), d: T::zero(), theta_offset: T::zero() },
            DhRow { a: self.a3, alpha: T::zero(), d: T::zero(), theta_offset: T::zero() },
        ]
    }

    pub fn reach(&self) -> T {
        self.a1 + self.a2 + self.a3
    }

    pub fn within_limits(&self, q: &LegJointAngles<T>) -> bool {
        q.as_array().iter().zip(&self.joint_limits).all(|(v, [lo, hi])| v >= lo && v <= hi)
    }

    fn check_limits(&self, q: &LegJointAngles<T>) -> Result<(), LegError> {
        for (joint, (v, [lo, hi])) in q.as_array().iter().zip(&self.joint_limits).enumerate() {
            if v < lo || v > hi {
                return Err(LegError::JointLimitViolation {
                    joint,
                    value: to_f64(*v),
                    min: to_f64(*lo),
                    max: to_f64(*hi),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LegJointAngles<T> {
    pub theta1: T,
    pub theta2: T,
    pub theta3: T,
}

impl<T: Real> LegJointAngles<T> {
    pub fn new(theta1: T, theta2: T, theta3: T) -> Self {
        Self { theta1, theta2, theta3 }
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.theta1, self.theta2, self.theta3]
    }

    pub fn from_array([theta1, theta2, theta3]: [T; 3]) -> Self {
        Self { theta1, theta2, theta3 }
    }
}

/// Placement of a leg base frame in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegMount<T: Real> {
    pub leg_id: usize,
    pub mount: HomogeneousTransform<T>,
}

impl<T: Real> LegMount<T> {
    pub fn new(leg_id: usize, mount: HomogeneousTransform<T>) -> Self {
        Self { leg_id, mount }
    }
}

/// Six mounts on a regular hexagon, legs pointing radially outward.
/// Leg `k` sits at yaw `k * 60deg + yaw_offset`, counter-clockwise.
pub fn hexagon_mounts<T: Real>(circumradius: T, yaw_offset: T, height: T) -> [LegMount<T>; 6] {
    std::array::from_fn(|k| {
        let yaw = lit::<T>(k as f64) * T::frac_pi_3() + yaw_offset;
        let (s, c) = yaw.sin_cos();
        let mut mount = HomogeneousTransform::rot_z(yaw);
        mount.translation = Vector3::new(circumradius * c, circumradius * s, height);
        LegMount::new(k, mount)
    })
}

/// Closed-form foot position.
pub fn leg_fk<T: Real>(geom: &LegGeometry<T>, q: &LegJointAngles<T>) -> FootPosition<T> {
    let (s1, c1) = q.theta1.sin_cos();
    let (s2, c2) = q.theta2.sin_cos();
    let (s23, c23) = (q.theta2 + q.theta3).sin_cos();
    let radial = geom.a3 * c23 + geom.a2 * c2 + geom.a1;
    Vector3::new(c1 * radial, s1 * radial, geom.a3 * s23 + geom.a2 * s2)
}

/// Foot frame in the leg base frame, as the product of the three D-H links.
pub fn leg_fk_transform<T: Real>(geom: &LegGeometry<T>, q: &LegJointAngles<T>) -> HomogeneousTransform<T> {
    let [r1, r2, r3] = geom.dh_rows();
    dh_link_transform(&r1, q.theta1) * dh_link_transform(&r2, q.theta2) * dh_link_transform(&r3, q.theta3)
}

/// `d(foot)/d(q)` of [`leg_fk`], column `j` for joint `j`.
pub fn leg_jacobian<T: Real>(geom: &LegGeometry<T>, q: &LegJointAngles<T>) -> Matrix3<T> {
    let (s1, c1) = q.theta1.sin_cos();
    let (s2, c2) = q.theta2.sin_cos();
    let (s23, c23) = (q.theta2 + q.theta3).sin_cos();
    let radial = geom.a3 * c23 + geom.a2 * c2 + geom.a1;
    let d_radial_2 = -geom.a2 * s2 - geom.a3 * s23;
    let d_radial_3 = -geom.a3 * s23;
    Matrix3::new(
        -s1 * radial,
        c1 * d_radial_2,
        c1 * d_radial_3,
        c1 * radial,
        s1 * d_radial_2,
        s1 * d_radial_3,
        T::zero(),
        geom.a2 * c2 + geom.a3 * c23,
        geom.a3 * c23,
    )
}

/// Knee-down (`theta3 <= 0`) inverse kinematics.
///
/// `theta1 = atan2(P_Y, P_X)`; with `tau = |P|^2 - 2 a1 sqrt(P_X^2 + P_Y^2)` the
/// femur-to-foot distance is `sqrt(tau + a1^2)`, and the femur and knee angles
/// follow from the law of cosines. The femur elevation term is taken as
/// `atan2(P_Z, rho - a1)`, which equals `asin(P_Z / sqrt(tau + a1^2))` whenever
/// the foot lies outside the coxa tip and stays correct when it does not.
pub fn leg_ik<T: Real>(geom: &LegGeometry<T>, p: &FootPosition<T>) -> Result<LegJointAngles<T>, LegError> {
    let unreachable = |reason| LegError::Unreachable { x: to_f64(p.x), y: to_f64(p.y), z: to_f64(p.z), reason };
    if !p.iter().all(|c| c.is_finite()) {
        return Err(unreachable("non-finite target"));
    }
    let scale = geom.reach();
    let rho = p.x.hypot(p.y);
    if rho <= lit::<T>(1e-12) * scale {
        return Err(unreachable("foot on the coxa axis, theta1 indeterminate"));
    }
    let theta1 = p.y.atan2(p.x);

    let (a1, a2, a3) = (geom.a1, geom.a2, geom.a3);
    // (rho - a1)^2 + P_Z^2 is the cancellation-free form of tau + a1^2.
    let planar = rho - a1;
    let reach_sq = planar * planar + p.z * p.z;
    let reach = reach_sq.sqrt();
    if reach <= lit::<T>(1e-12) * scale {
        return Err(unreachable("foot on the femur joint"));
    }

    let slack = lit::<T>(1e-12);
    let knee_cos = (reach_sq - a2 * a2 - a3 * a3) / (lit::<T>(2.0) * a2 * a3);
    let hip_cos = (reach_sq + a2 * a2 - a3 * a3) / (lit::<T>(2.0) * a2 * reach);
    if knee_cos > T::one() + slack || hip_cos.abs() > T::one() + slack {
        return Err(unreachable("beyond full extension"));
    }
    if knee_cos < -T::one() - slack {
        return Err(unreachable("inside the folded-leg dead zone"));
    }
    let clamp = |x: T| x.max(-T::one()).min(T::one());
    let theta3 = -clamp(knee_cos).acos();
    let theta2 = wrap_angle(p.z.atan2(planar) + clamp(hip_cos).acos());

    let q = LegJointAngles::new(theta1, theta2, theta3);
    if (leg_fk(geom, &q) - p).norm() > lit::<T>(1e-6) {
        return Err(unreachable("principal-branch solution fails the forward check"));
    }
    geom.check_limits(&q)?;
    Ok(q)
}

/// Foot position in the body frame.
pub fn foot_in_body_frame<T: Real>(mount: &LegMount<T>, geom: &LegGeometry<T>, q: &LegJointAngles<T>) -> Vector3<T> {
    mount.mount.transform_point(&leg_fk(geom, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn geom() -> LegGeometry<f64> {
        LegGeometry::new(0.18, 0.5, 0.5, [[-0.8, 0.8], [-0.8, 1.4], [-3.09, 0.0]]).unwrap()
    }

    #[test]
    fn straight_leg() {
        let g = geom();
        let p = leg_fk(&g, &LegJointAngles::new(0.0, 0.0, 0.0));
        assert_eq!(p, Vector3::new(1.18, 0.0, 0.0));
        let p = leg_fk(&g, &LegJointAngles::new(FRAC_PI_2, 0.0, 0.0));
        assert!((p - Vector3::new(0.0, 1.18, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn closed_form_matches_link_product() {
        let g = geom();
        let q = LegJointAngles::new(0.3, 0.4, -1.2);
        let t = leg_fk_transform(&g, &q);
        assert!((t.translation - leg_fk(&g, &q)).norm() < 1e-15);
        assert!(t.orthonormality_error() < 1e-15);
    }

    #[test]
    fn full_extension_inverts_to_zero() {
        let g = geom();
        let q = leg_ik(&g, &Vector3::new(1.18, 0.0, 0.0)).unwrap();
        assert!(q.theta1.abs() < 1e-12 && q.theta2.abs() < 1e-6 && q.theta3.abs() < 1e-6);
    }

    #[test]
    fn beyond_reach_is_unreachable() {
        let g = geom();
        assert!(matches!(leg_ik(&g, &Vector3::new(1.28, 0.0, 0.0)), Err(LegError::Unreachable { .. })));
    }

    #[test]
    fn coxa_axis_is_unreachable() {
        let g = geom();
        assert!(matches!(leg_ik(&g, &Vector3::new(0.0, 0.0, -0.5)), Err(LegError::Unreachable { .. })));
    }

    #[test]
    fn limit_violation_reported() {
        let g = geom();
        // Reachable, but theta1 = 2.0 exceeds +-0.8.
        let p = leg_fk(&g, &LegJointAngles::new(2.0, 0.1, -1.0));
        assert!(matches!(leg_ik(&g, &p), Err(LegError::JointLimitViolation { joint: 0, .. })));
    }

    #[test]
    fn standing_pose_round_trip() {
        let g = geom();
        let q = LegJointAngles::new(0.2, 0.05, -1.5);
        let back = leg_ik(&g, &leg_fk(&g, &q)).unwrap();
        for (a, b) in q.as_array().iter().zip(back.as_array()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_central_difference() {
        let g = geom();
        let q = LegJointAngles::new(0.3, 0.2, -1.4);
        let j = leg_jacobian(&g, &q);
        let h = 1e-6;
        for col in 0..3 {
            let mut plus = q.as_array();
            let mut minus = q.as_array();
            plus[col] += h;
            minus[col] -= h;
            let fd = (leg_fk(&g, &LegJointAngles::from_array(plus)) - leg_fk(&g, &LegJointAngles::from_array(minus)))
                / (2.0 * h);
            assert!((fd - j.column(col)).norm() < 1e-8);
        }
    }

    #[test]
    fn mounted_feet() {
        let g = geom();
        let zero = LegJointAngles::default();
        let id = LegMount::new(0, HomogeneousTransform::identity());
        assert_eq!(foot_in_body_frame(&id, &g, &zero), Vector3::new(1.18, 0.0, 0.0));
        let flipped = LegMount::new(3, HomogeneousTransform::rot_z(PI));
        assert!((foot_in_body_frame(&flipped, &g, &zero) - Vector3::new(-1.18, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hexagon_layout() {
        let mounts = hexagon_mounts(0.45f64, 0.0, 0.0);
        for (k, m) in mounts.iter().enumerate() {
            assert_eq!(m.leg_id, k);
            assert!((m.mount.translation.norm() - 0.45).abs() < 1e-15);
            assert!(m.mount.orthonormality_error() < 1e-15);
            // x axis of the leg frame points radially outward.
            let out = m.mount.rotation.column(0).into_owned();
            assert!((out * 0.45 - m.mount.translation).norm() < 1e-15);
        }
    }

    #[test]
    fn geometry_validation() {
        assert!(LegGeometry::new(0.0, 0.5, 0.5, [[-1.0, 1.0]; 3]).is_err());
        assert!(LegGeometry::new(0.1, 0.5, 0.5, [[1.0, -1.0]; 3]).is_err());
    }
}
