//! Least-squares rigid alignment of point sets.

use hexwall_core::HomogeneousTransform;
use nalgebra::{Matrix3, Vector3};

/// Rigid transform `T` minimizing `sum |T * from_i - to_i|^2` (Kabsch).
///
/// # Panics
/// If the slices differ in length or are empty.
pub fn rigid_fit(from: &[Vector3<f64>], to: &[Vector3<f64>]) -> HomogeneousTransform<f64> {
    assert!(!from.is_empty() && from.len() == to.len());
    let n = from.len() as f64;
    let cf = from.iter().sum::<Vector3<f64>>() / n;
    let ct = to.iter().sum::<Vector3<f64>>() / n;
    let h: Matrix3<f64> = from.iter().zip(to).map(|(a, b)| (a - cf) * (b - ct).transpose()).sum();
    let svd = h.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut d = Matrix3::identity();
    if (v_t.transpose() * u.transpose()).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rotation = v_t.transpose() * d * u.transpose();
    HomogeneousTransform::new(rotation, ct - rotation * cf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_known_transform() {
        let t = HomogeneousTransform::from_rpy(0.1, -0.2, 2.5, Vector3::new(1.0, -2.0, 0.5));
        let pts = [Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0), Vector3::new(-1.0, -0.5, 0.2)];
        let moved: Vec<_> = pts.iter().map(|p| t.transform_point(p)).collect();
        let fit = rigid_fit(&pts, &moved);
        assert!(fit.max_abs_diff(&t) < 1e-12);
    }
}
