//! Swing-foot trajectories.

use nalgebra::Vector3;

use crate::scalar::{lit, Real};

/// Foot path from lift-off to touchdown. The horizontal motion follows a
/// quintic smoothstep; the vertical motion adds a raised-cosine bump, so
/// position, velocity and horizontal acceleration are continuous at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwingTrajectory<T: Real> {
    pub start: Vector3<T>,
    pub target: Vector3<T>,
    pub step_height: T,
    pub duration: T,
}

/// # Panics
/// If `duration` is not positive.
pub fn plan_swing_trajectory<T: Real>(
    start: Vector3<T>,
    target: Vector3<T>,
    step_height: T,
    duration: T,
) -> SwingTrajectory<T> {
    assert!(duration > T::zero(), "swing duration must be positive");
    SwingTrajectory { start, target, step_height, duration }
}

fn smoothstep<T: Real>(u: T) -> (T, T) {
    let (c6, c10, c15, c30, c60) = (lit::<T>(6.0), lit::<T>(10.0), lit::<T>(15.0), lit::<T>(30.0), lit::<T>(60.0));
    let u2 = u * u;
    let s = u2 * u * (c10 - c15 * u + c6 * u2);
    let ds = u2 * (c30 - c60 * u + c30 * u2);
    (s, ds)
}

impl<T: Real> SwingTrajectory<T> {
    /// Bump amplitude; the apex clears the higher endpoint by `step_height`.
    fn amplitude(&self) -> T {
        self.step_height + (self.target.z - self.start.z).abs() * lit(0.5)
    }

    fn phase(&self, tau: T) -> T {
        (tau / self.duration).max(T::zero()).min(T::one())
    }

    /// Position at time `tau` after lift-off, clamped to `[0, duration]`.
    pub fn position(&self, tau: T) -> Vector3<T> {
        let u = self.phase(tau);
        let (s, _) = smoothstep(u);
        let mut p = self.start + (self.target - self.start) * s;
        p.z += self.amplitude() * (T::one() - (T::two_pi() * u).cos()) * lit(0.5);
        p
    }

    pub fn velocity(&self, tau: T) -> Vector3<T> {
        if tau < T::zero() || tau > self.duration {
            return Vector3::zeros();
        }
        let u = self.phase(tau);
        let (_, ds) = smoothstep(u);
        let mut v = (self.target - self.start) * (ds / self.duration);
        v.z += self.amplitude() * T::pi() * (T::two_pi() * u).sin() / self.duration;
        v
    }

    /// Highest point of the path.
    pub fn apex_height(&self) -> T {
        self.position(self.duration * lit(0.5)).z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_clearance() {
        let s = plan_swing_trajectory(Vector3::<f64>::new(0.0, 0.0, 0.0), Vector3::new(0.3, 0.1, 0.05), 0.08, 0.8);
        assert!((s.position(0.0) - s.start).norm() < 1e-15);
        assert!((s.position(0.8) - s.target).norm() < 1e-15);
        assert!(s.velocity(0.0).norm() < 1e-15);
        assert!(s.velocity(0.8).norm() < 1e-12);
        assert!((s.apex_height() - 0.13).abs() < 1e-12);
    }

    #[test]
    fn velocity_matches_finite_difference() {
        let s = plan_swing_trajectory(Vector3::<f64>::new(1.0, 0.0, 0.0), Vector3::new(1.2, -0.3, 0.0), 0.1, 1.0);
        let h = 1e-6;
        for k in 1..10 {
            let t = k as f64 * 0.1;
            let fd = (s.position(t + h) - s.position(t - h)) / (2.0 * h);
            assert!((fd - s.velocity(t)).norm() < 1e-7);
        }
    }
}
