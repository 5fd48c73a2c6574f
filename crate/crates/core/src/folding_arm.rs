//! Folding arm: cylinder-driven revolute joints whose cylinder spans a
//! triangle `A` (joint), `B` (anchor on one link), `C` (anchor on the other).
//!
//! Every joint coordinate is stored so that a positive angle lengthens its
//! cylinder; [`RotationSense`] maps that coordinate to the physical turning
//! direction.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{self, JointAxis, PitchLink};
use crate::geometry::HomogeneousTransform;
use crate::scalar::{lit, to_f64, Real};

/// Absolute tolerance on the rest-length closure checked at construction.
/// Tight enough that a validated linkage reports `|extension(0)| < 1e-12`.
pub const CLOSURE_TOL: f64 = 5e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkageError {
    #[error("joint angle {value:.9} rad outside [{min:.9}, {max:.9}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("included angle {0:.9} rad leaves [0, pi]")]
    IncludedAngle(f64),
    #[error("cylinder length {length:.9} m outside the triangle range [{min:.9}, {max:.9}]")]
    LengthOutOfRange { length: f64, min: f64, max: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationSense {
    Counterclockwise,
    Clockwise,
}

impl RotationSense {
    pub fn sign<T: Real>(self) -> T {
        match self {
            RotationSense::Counterclockwise => T::one(),
            RotationSense::Clockwise => -T::one(),
        }
    }
}

/// Constants of one cylinder-driven revolute joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldLinkGeometry<T> {
    /// `l_AB`: joint to the anchor the force acts through.
    pub l_anchor_a: T,
    /// `l_AC`: joint to the opposite anchor.
    pub l_anchor_b: T,
    /// `l_BC` at zero joint angle.
    pub l_cyl_rest: T,
    /// Included angle `BAC` at zero joint angle.
    pub rest_angle: T,
    pub joint_limits: [T; 2],
    pub direction: RotationSense,
}

impl<T: Real> FoldLinkGeometry<T> {
    /// Builds a linkage whose rest cylinder length closes the triangle exactly.
    pub fn from_triangle(
        l_anchor_a: T,
        l_anchor_b: T,
        rest_angle: T,
        joint_limits: [T; 2],
        direction: RotationSense,
    ) -> Result<Self, LinkageError> {
        let l_cyl_rest = triangle_side(l_anchor_a, l_anchor_b, rest_angle);
        let g = Self { l_anchor_a, l_anchor_b, l_cyl_rest, rest_angle, joint_limits, direction };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), LinkageError> {
        let (a, b, l) = (self.l_anchor_a, self.l_anchor_b, self.l_cyl_rest);
        if !(a > T::zero() && b > T::zero() && l > T::zero()) {
            return Err(LinkageError::InvariantViolation("positive link lengths"));
        }
        if !((a - b).abs() < l && l < a + b) {
            return Err(LinkageError::InvariantViolation("triangle inequality"));
        }
        if (triangle_side(a, b, self.rest_angle) - l).abs() > lit(CLOSURE_TOL) {
            return Err(LinkageError::InvariantViolation("law-of-cosines closure"));
        }
        let [lo, hi] = self.joint_limits;
        if !(lo < hi) {
            return Err(LinkageError::InvariantViolation("joint limit order"));
        }
        if !(lo <= T::zero() && T::zero() <= hi) {
            return Err(LinkageError::InvariantViolation("rest pose within joint limits"));
        }
        if !(self.rest_angle + lo >= T::zero() && self.rest_angle + hi <= T::pi()) {
            return Err(LinkageError::InvariantViolation("included angle within [0, pi] over joint limits"));
        }
        Ok(())
    }

    /// Converts a physical joint angle into the cylinder-lengthening coordinate.
    pub fn coordinate_from_physical(&self, physical: T) -> T {
        self.direction.sign::<T>() * physical
    }

    fn check(&self, theta: T) -> Result<T, LinkageError> {
        let [lo, hi] = self.joint_limits;
        if theta < lo || theta > hi {
            return Err(LinkageError::OutOfRange { value: to_f64(theta), min: to_f64(lo), max: to_f64(hi) });
        }
        let included = theta + self.rest_angle;
        if included < T::zero() || included > T::pi() {
            return Err(LinkageError::IncludedAngle(to_f64(included)));
        }
        Ok(included)
    }

    /// Current cylinder length `l_BC(theta)`.
    pub fn cylinder_length(&self, theta: T) -> Result<T, LinkageError> {
        let included = self.check(theta)?;
        Ok(triangle_side(self.l_anchor_a, self.l_anchor_b, included))
    }

    /// Angle `ABC` at the force-carrying anchor, from the current triangle.
    pub fn anchor_angle(&self, theta: T) -> Result<T, LinkageError> {
        let included = self.check(theta)?;
        let (a, b) = (self.l_anchor_a, self.l_anchor_b);
        let l = triangle_side(a, b, included);
        let cos_b = (a * a + l * l - b * b) / (lit::<T>(2.0) * a * l);
        let sin_b = b * included.sin() / l;
        Ok(sin_b.atan2(cos_b))
    }

    /// Perpendicular lever arm of the cylinder force about the joint,
    /// `sin(pi - ABC) * l_AB`.
    pub fn lever_arm(&self, theta: T) -> Result<T, LinkageError> {
        Ok((T::pi() - self.anchor_angle(theta)?).sin() * self.l_anchor_a)
    }
}

/// Law of cosines.
fn triangle_side<T: Real>(a: T, b: T, included: T) -> T {
    (a * a + b * b - lit::<T>(2.0) * a * b * included.cos()).sqrt()
}

/// Cylinder extension at joint angle `theta`:
/// `sqrt(l_AB^2 + l_AC^2 - 2 l_AB l_AC cos(theta + BAC)) - l_BC`.
pub fn fold_extension<T: Real>(geom: &FoldLinkGeometry<T>, theta: T) -> Result<T, LinkageError> {
    Ok(geom.cylinder_length(theta)? - geom.l_cyl_rest)
}

/// Closed-form inverse of [`fold_extension`].
pub fn fold_angle_from_extension<T: Real>(geom: &FoldLinkGeometry<T>, dl: T) -> Result<T, LinkageError> {
    let (a, b) = (geom.l_anchor_a, geom.l_anchor_b);
    let length = geom.l_cyl_rest + dl;
    let (min, max) = ((a - b).abs(), a + b);
    if length < min || length > max {
        return Err(LinkageError::LengthOutOfRange {
            length: to_f64(length),
            min: to_f64(min),
            max: to_f64(max),
        });
    }
    let cos_included = ((a * a + b * b - length * length) / (lit::<T>(2.0) * a * b)).max(-T::one()).min(T::one());
    Ok(cos_included.acos() - geom.rest_angle)
}

/// Joint torque produced by an axial cylinder force (positive in extension).
pub fn fold_torque<T: Real>(geom: &FoldLinkGeometry<T>, theta: T, force: T) -> Result<T, LinkageError> {
    Ok((T::pi() - geom.anchor_angle(theta)?).sin() * force * geom.l_anchor_a)
}

/// Three-joint folding arm, a planar chain `A -> D -> G -> J` in the arm's
/// x-z plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldArm<T> {
    pub links: [FoldLinkGeometry<T>; 3],
    /// `|AD|`, `|DG|`, `|GJ|`.
    pub segment_lengths: [T; 3],
    /// Pitch of each segment relative to its parent at zero joint angles.
    pub rest_pitch: [T; 3],
}

impl<T: Real> FoldArm<T> {
    pub fn validate(&self) -> Result<(), LinkageError> {
        for link in &self.links {
            link.validate()?;
        }
        if self.segment_lengths.iter().any(|l| !(*l > T::zero())) {
            return Err(LinkageError::InvariantViolation("positive arm segment lengths"));
        }
        Ok(())
    }

    pub fn pitch_links(&self) -> [PitchLink<T>; 3] {
        std::array::from_fn(|i| PitchLink {
            offset: self.rest_pitch[i],
            sign: self.links[i].direction.sign(),
            length: self.segment_lengths[i],
        })
    }

    pub fn check_limits(&self, q: &[T; 3]) -> Result<(), LinkageError> {
        for (link, qi) in self.links.iter().zip(q) {
            link.check(*qi)?;
        }
        Ok(())
    }

    /// Joint axes and tip frame relative to `base`.
    pub fn chain(&self, base: &HomogeneousTransform<T>, q: &[T; 3]) -> ([JointAxis<T>; 3], HomogeneousTransform<T>) {
        chain::evaluate(base, &self.pitch_links(), q)
    }

    pub fn extensions(&self, q: &[T; 3]) -> Result<[T; 3], LinkageError> {
        let mut out = [T::zero(); 3];
        for ((o, link), qi) in out.iter_mut().zip(&self.links).zip(q) {
            *o = fold_extension(link, *qi)?;
        }
        Ok(out)
    }
}

/// Tip frame `J` relative to the arm base `A`.
pub fn fold_arm_fk<T: Real>(arm: &FoldArm<T>, q: &[T; 3]) -> Result<HomogeneousTransform<T>, LinkageError> {
    arm.check_limits(q)?;
    Ok(arm.chain(&HomogeneousTransform::identity(), q).1)
}

/// Tip position of the arm in its own x-z plane, handy for plotting.
pub fn fold_arm_tip<T: Real>(arm: &FoldArm<T>, q: &[T; 3]) -> Result<Vector3<T>, LinkageError> {
    Ok(fold_arm_fk(arm, q)?.translation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn link() -> FoldLinkGeometry<f64> {
        FoldLinkGeometry::from_triangle(0.15, 0.45, FRAC_PI_3, [-0.5, 1.8], RotationSense::Counterclockwise).unwrap()
    }

    #[test]
    fn rest_extension_is_zero() {
        assert_eq!(fold_extension(&link(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn collinear_limit() {
        let mut g = link();
        g.joint_limits = [-0.5, PI - g.rest_angle];
        let dl = fold_extension(&g, PI - g.rest_angle).unwrap();
        assert_relative_eq!(dl, 0.15 + 0.45 - g.l_cyl_rest, epsilon = 1e-12);
    }

    #[test]
    fn limits_enforced() {
        assert!(matches!(fold_extension(&link(), 1.9), Err(LinkageError::OutOfRange { .. })));
        assert!(matches!(fold_torque(&link(), -0.6, 1.0), Err(LinkageError::OutOfRange { .. })));
    }

    #[test]
    fn inverse_past_collinear_is_rejected() {
        let g = link();
        let dl = (0.15 + 0.45) - g.l_cyl_rest + 0.01;
        assert!(matches!(fold_angle_from_extension(&g, dl), Err(LinkageError::LengthOutOfRange { .. })));
        assert!(fold_angle_from_extension(&g, 0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn perpendicular_lever() {
        // 3-4-5 triangle: AB = 3, BC = 4, AC = 5 puts the right angle at B.
        let g = FoldLinkGeometry {
            l_anchor_a: 3.0,
            l_anchor_b: 5.0,
            l_cyl_rest: 4.0,
            rest_angle: (3.0_f64 / 5.0).acos(),
            joint_limits: [-0.1, 0.1],
            direction: RotationSense::Counterclockwise,
        };
        assert_eq!(fold_torque(&g, 0.0, 2.0).unwrap(), 6.0);
        assert_eq!(fold_torque(&g, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn closure_violation_named() {
        let mut g = link();
        g.l_cyl_rest += 1e-6;
        assert_eq!(g.validate(), Err(LinkageError::InvariantViolation("law-of-cosines closure")));
    }

    #[test]
    fn arm_rest_and_rotated_pose() {
        let arm = FoldArm {
            links: [link(); 3],
            segment_lengths: [0.6, 0.5, 0.3],
            rest_pitch: [0.0, 0.0, 0.0],
        };
        let tip = fold_arm_fk(&arm, &[0.0; 3]).unwrap();
        assert!((tip.translation - Vector3::new(1.4, 0.0, 0.0)).norm() < 1e-15);
        let up = fold_arm_fk(&arm, &[FRAC_PI_2, 0.0, 0.0]).unwrap();
        assert!((up.translation - Vector3::new(0.0, 0.0, 1.4)).norm() < 1e-14);
    }
}
