//! Homogeneous transforms and Denavit-Hartenberg link primitives.
//!
//! Transforms are stored as an explicit rotation matrix plus translation so the
//! D-H link matrices can be written down entry by entry.

use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("D-H link length must be non-negative, got {0}")]
    NegativeLinkLength(f64),
    #[error("D-H angle {name} = {value} outside (-pi, pi]")]
    AngleOutOfRange { name: &'static str, value: f64 },
}

/// Rigid transform `[R p; 0 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousTransform<T: Real> {
    pub rotation: Matrix3<T>,
    pub translation: Vector3<T>,
}

impl<T: Real> Default for HomogeneousTransform<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> HomogeneousTransform<T> {
    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity(), Vector3::zeros())
    }

    pub fn from_translation(p: Vector3<T>) -> Self {
        Self::new(Matrix3::identity(), p)
    }

    pub fn rot_x(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(
            Matrix3::new(T::one(), T::zero(), T::zero(), T::zero(), c, -s, T::zero(), s, c),
            Vector3::zeros(),
        )
    }

    pub fn rot_y(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(
            Matrix3::new(c, T::zero(), s, T::zero(), T::one(), T::zero(), -s, T::zero(), c),
            Vector3::zeros(),
        )
    }

    pub fn rot_z(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(
            Matrix3::new(c, -s, T::zero(), s, c, T::zero(), T::zero(), T::zero(), T::one()),
            Vector3::zeros(),
        )
    }

    /// Pitch in the x-z plane: positive angles lift +x towards +z
    /// (a rotation about -y).
    pub fn pitch(angle: T) -> Self {
        Self::rot_y(-angle)
    }

    /// `Rz(yaw) * Ry(pitch) * Rx(roll)` about a given origin.
    pub fn from_rpy(roll: T, pitch: T, yaw: T, translation: Vector3<T>) -> Self {
        let r = Rotation3::from_euler_angles(roll, pitch, yaw);
        Self::new(*r.matrix(), translation)
    }

    /// Returns `(roll, pitch, yaw)` for the ZYX convention of [`Self::from_rpy`].
    pub fn rpy(&self) -> (T, T, T) {
        Rotation3::from_matrix_unchecked(self.rotation).euler_angles()
    }

    pub fn to_matrix(&self) -> Matrix4<T> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Takes the upper 3x4 block of a homogeneous matrix as-is.
    pub fn from_matrix(m: &Matrix4<T>) -> Self {
        Self::new(m.fixed_view::<3, 3>(0, 0).into_owned(), m.fixed_view::<3, 1>(0, 3).into_owned())
    }

    pub fn transform_point(&self, p: &Vector3<T>) -> Vector3<T> {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vector3<T>) -> Vector3<T> {
        self.rotation * v
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -(rt * self.translation))
    }

    /// Largest entry of `RᵀR - I`.
    pub fn orthonormality_error(&self) -> T {
        (self.rotation.transpose() * self.rotation - Matrix3::identity()).abs().max()
    }

    /// Projects the rotation block back onto SO(3) (polar decomposition).
    pub fn reorthonormalized(&self) -> Self {
        let svd = self.rotation.svd(true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * v_t;
        if r.determinant() < T::zero() {
            let mut u = u;
            u.column_mut(2).neg_mut();
            r = u * v_t;
        }
        Self::new(r, self.translation)
    }

    /// Largest absolute difference between the two homogeneous matrices.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.to_matrix() - other.to_matrix()).abs().max()
    }
}

impl<T: Real> Mul for HomogeneousTransform<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

impl<'a, T: Real> Mul<&'a HomogeneousTransform<T>> for &'a HomogeneousTransform<T> {
    type Output = HomogeneousTransform<T>;

    fn mul(self, rhs: &'a HomogeneousTransform<T>) -> HomogeneousTransform<T> {
        self.compose(rhs)
    }
}

pub fn compose<T: Real>(t1: &HomogeneousTransform<T>, t2: &HomogeneousTransform<T>) -> HomogeneousTransform<T> {
    t1.compose(t2)
}

pub fn invert<T: Real>(t: &HomogeneousTransform<T>) -> HomogeneousTransform<T> {
    t.inverse()
}

/// One row of a D-H table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhRow<T> {
    pub a: T,
    pub alpha: T,
    pub d: T,
    pub theta_offset: T,
}

impl<T: Real> DhRow<T> {
    pub fn new(a: T, alpha: T, d: T, theta_offset: T) -> Result<Self, GeometryError> {
        let row = Self { a, alpha, d, theta_offset };
        row.validate()?;
        Ok(row)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.a < T::zero() {
            return Err(GeometryError::NegativeLinkLength(to_f64(self.a)));
        }
        for (name, value) in [("alpha", self.alpha), ("theta_offset", self.theta_offset)] {
            if value <= -T::pi() || value > T::pi() {
                return Err(GeometryError::AngleOutOfRange { name, value: to_f64(value) });
            }
        }
        Ok(())
    }
}

/// Standard D-H link matrix evaluated at `theta_offset + theta`.
pub fn dh_link_transform<T: Real>(row: &DhRow<T>, theta: T) -> HomogeneousTransform<T> {
    let (st, ct) = (row.theta_offset + theta).sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    HomogeneousTransform::new(
        Matrix3::new(
            ct,
            -st * ca,
            st * sa,
            st,
            ct * ca,
            -ct * sa,
            T::zero(),
            sa,
            ca,
        ),
        Vector3::new(row.a * ct, row.a * st, row.d),
    )
}

/// Rotation vector (axis * angle) of a rotation matrix.
pub fn rotation_log<T: Real>(r: &Matrix3<T>) -> Vector3<T> {
    let w = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    let s = w.norm() * lit(0.5);
    let c = (r.trace() - T::one()) * lit(0.5);
    let angle = s.atan2(c);
    if s > lit(1e-6) {
        return w * (angle / (s * lit(2.0)));
    }
    if c > T::zero() {
        // theta / sin(theta) = 1 + theta^2 / 6 + ...
        return w * (lit::<T>(0.5) * (T::one() + angle * angle / lit(6.0)));
    }
    // Near a half turn: the axis comes from the symmetric part R + R^T = 2 a a^T (1 - c) + 2 c I.
    let k = (0..3).max_by(|&i, &j| r[(i, i)].partial_cmp(&r[(j, j)]).unwrap()).unwrap();
    let mut axis = Vector3::zeros();
    let denom = T::one() - c;
    axis[k] = ((r[(k, k)] - c) / denom).max(T::zero()).sqrt();
    for i in (0..3).filter(|&i| i != k) {
        axis[i] = (r[(i, k)] + r[(k, i)]) / (lit::<T>(2.0) * denom * axis[k]);
    }
    axis.normalize_mut();
    if axis.dot(&w) < T::zero() {
        axis = -axis;
    }
    axis * angle
}

/// Rotation matrix of a rotation vector.
pub fn rotation_exp<T: Real>(w: &Vector3<T>) -> Matrix3<T> {
    *Rotation3::from_scaled_axis(*w).matrix()
}

/// Angle of the relative rotation between two orientations.
pub fn rotation_angle_between<T: Real>(a: &Matrix3<T>, b: &Matrix3<T>) -> T {
    let rel = a.transpose() * b;
    // atan2 form stays accurate for tiny angles where acos of the trace does not.
    let w = Vector3::new(rel[(2, 1)] - rel[(1, 2)], rel[(0, 2)] - rel[(2, 0)], rel[(1, 0)] - rel[(0, 1)]);
    let s = w.norm() * lit(0.5);
    let c = (rel.trace() - T::one()) * lit(0.5);
    s.atan2(c)
}

pub fn skew<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    Matrix3::new(T::zero(), -v.z, v.y, v.z, T::zero(), -v.x, -v.y, v.x, T::zero())
}
