//! Serial chains of pitch joints, shared by the folding arm and the
//! serial-parallel manipulator.

use nalgebra::Vector3;

use crate::geometry::HomogeneousTransform;
use crate::scalar::Real;

/// One pitch joint followed by a straight segment along the new x axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchLink<T> {
    /// Pitch of the segment relative to its parent at zero joint angle.
    pub offset: T,
    /// +1 when a positive joint coordinate pitches the segment up, -1 otherwise.
    pub sign: T,
    pub length: T,
}

/// World placement of one joint of an evaluated chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAxis<T: Real> {
    pub origin: Vector3<T>,
    /// Unit angular velocity produced by a unit rate of the joint coordinate.
    pub axis: Vector3<T>,
}

/// Evaluates the chain from `base`. Returns the joint axes and the tip frame.
pub fn evaluate<T: Real, const N: usize>(
    base: &HomogeneousTransform<T>,
    links: &[PitchLink<T>; N],
    q: &[T; N],
) -> ([JointAxis<T>; N], HomogeneousTransform<T>) {
    let mut frame = *base;
    let mut axes = [JointAxis { origin: Vector3::zeros(), axis: Vector3::zeros() }; N];
    for (i, (link, qi)) in links.iter().zip(q).enumerate() {
        // pitch(a) = rot_y(-a): a unit rate of `a` spins about the local -y axis.
        axes[i] = JointAxis {
            origin: frame.translation,
            axis: frame.rotation * (-Vector3::y() * link.sign),
        };
        frame = frame
            * HomogeneousTransform::pitch(link.offset + link.sign * *qi)
            * HomogeneousTransform::from_translation(Vector3::new(link.length, T::zero(), T::zero()));
    }
    (axes, frame)
}
