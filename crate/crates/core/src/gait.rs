//! Tripod gait and footstep planning on flat ground (`z = 0`).
//!
//! Tripod A (legs 0, 2, 4) lifts off at `kT`, tripod B (legs 1, 3, 5) at
//! `kT + T/2`; each swing lasts `(1 - beta) T`. A foot lands at the point
//! its nominal stance position will occupy at the middle of its next stance
//! phase, so the body moves symmetrically over the pinned foot.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::HomogeneousTransform;
use crate::leg::LegError;
use crate::robot::{yaw_body, RobotModel, NUM_LEGS};
use crate::scalar::{lit, to_f64, Real};
use crate::swing::{plan_swing_trajectory, SwingTrajectory};

/// Footholds closer than this to the current one are not stepped to.
pub const MIN_STEP: f64 = 1e-9;
const REACH_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("invalid gait parameters: {0}")]
    InvalidGait(&'static str),
    #[error("invalid body command: {0}")]
    InvalidCommand(String),
    #[error("leg {leg} step of {length:.4} m at t = {time:.3} s exceeds the {max:.4} m limit")]
    StepTooLong { leg: usize, time: f64, length: f64, max: f64 },
    #[error("leg {leg} cannot reach its planned foot position at t = {time:.3} s: {source}")]
    Unreachable { leg: usize, time: f64, source: LegError },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitParams<T> {
    pub cycle_period: T,
    /// Stance fraction of the cycle, in `[0.5, 1)` so three feet always touch.
    pub duty_factor: T,
    pub step_height: T,
    pub step_length_max: T,
    /// Horizontal distance from the body centre to each nominal foothold.
    pub stance_width: T,
}

impl<T: Real> GaitParams<T> {
    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.cycle_period > T::zero()) {
            return Err(PlanError::InvalidGait("cycle period must be positive"));
        }
        if !(self.duty_factor >= lit(0.5) && self.duty_factor < T::one()) {
            return Err(PlanError::InvalidGait("duty factor must lie in [0.5, 1)"));
        }
        if !(self.step_height >= T::zero()) {
            return Err(PlanError::InvalidGait("step height must be non-negative"));
        }
        if !(self.step_length_max > T::zero()) {
            return Err(PlanError::InvalidGait("maximum step length must be positive"));
        }
        if !(self.stance_width > T::zero()) {
            return Err(PlanError::InvalidGait("stance width must be positive"));
        }
        Ok(())
    }

    pub fn swing_duration(&self) -> T {
        (T::one() - self.duty_factor) * self.cycle_period
    }

    /// Time of the first lift-off of `leg`.
    pub fn phase_offset(&self, leg: usize) -> T {
        if leg.is_multiple_of(2) {
            T::zero()
        } else {
            self.cycle_period * lit(0.5)
        }
    }
}

/// Body velocity command, expressed in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyCommand<T> {
    pub velocity: [T; 2],
    pub yaw_rate: T,
    pub body_height: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPose<T> {
    pub x: T,
    pub y: T,
    pub yaw: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandSegment<T> {
    pub start: T,
    pub command: BodyCommand<T>,
}

/// Piecewise-constant command profile integrated from an initial planar pose.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyReference<T: Real> {
    origin: PlanarPose<T>,
    segments: Vec<CommandSegment<T>>,
    starts: Vec<PlanarPose<T>>,
}

fn advance<T: Real>(p: &PlanarPose<T>, cmd: &BodyCommand<T>, dt: T) -> PlanarPose<T> {
    let [vx, vy] = cmd.velocity;
    let w = cmd.yaw_rate;
    let yaw1 = p.yaw + w * dt;
    let (s, c) = if (w * dt).abs() < lit(1e-12) {
        (p.yaw.cos() * dt, p.yaw.sin() * dt)
    } else {
        ((yaw1.sin() - p.yaw.sin()) / w, (p.yaw.cos() - yaw1.cos()) / w)
    };
    PlanarPose { x: p.x + vx * s - vy * c, y: p.y + vx * c + vy * s, yaw: yaw1 }
}

impl<T: Real> BodyReference<T> {
    /// The first segment must start at `t = 0`; starts must increase.
    pub fn new(origin: PlanarPose<T>, segments: Vec<CommandSegment<T>>) -> Result<Self, PlanError> {
        if segments.is_empty() || segments[0].start != T::zero() {
            return Err(PlanError::InvalidCommand("the first segment must start at t = 0".into()));
        }
        if segments.windows(2).any(|w| !(w[1].start > w[0].start)) {
            return Err(PlanError::InvalidCommand("segment start times must increase".into()));
        }
        if segments.iter().any(|s| !(s.command.body_height > T::zero())) {
            return Err(PlanError::InvalidCommand("body height must be positive".into()));
        }
        let mut starts = vec![origin];
        for w in segments.windows(2) {
            let last = *starts.last().unwrap();
            starts.push(advance(&last, &w[0].command, w[1].start - w[0].start));
        }
        Ok(Self { origin, segments, starts })
    }

    pub fn constant(origin: PlanarPose<T>, command: BodyCommand<T>) -> Result<Self, PlanError> {
        Self::new(origin, vec![CommandSegment { start: T::zero(), command }])
    }

    pub fn origin(&self) -> PlanarPose<T> {
        self.origin
    }

    pub fn segments(&self) -> &[CommandSegment<T>] {
        &self.segments
    }

    fn segment_index(&self, t: T) -> usize {
        self.segments.iter().rposition(|s| s.start <= t).unwrap_or(0)
    }

    pub fn command_at(&self, t: T) -> BodyCommand<T> {
        self.segments[self.segment_index(t)].command
    }

    pub fn planar_at(&self, t: T) -> PlanarPose<T> {
        let i = self.segment_index(t);
        let seg = &self.segments[i];
        advance(&self.starts[i], &seg.command, (t - seg.start).max(T::zero()))
    }

    /// Level body pose at time `t`.
    pub fn pose_at(&self, t: T) -> HomogeneousTransform<T> {
        let p = self.planar_at(t);
        yaw_body(p.x, p.y, self.command_at(t).body_height, p.yaw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwingInterval<T: Real> {
    pub lift_off: T,
    pub touchdown: T,
    pub trajectory: SwingTrajectory<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegSchedule<T: Real> {
    pub initial_foothold: Vector3<T>,
    pub swings: Vec<SwingInterval<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FootstepPlan<T: Real> {
    pub gait: GaitParams<T>,
    pub horizon: T,
    pub reference: BodyReference<T>,
    pub legs: [LegSchedule<T>; NUM_LEGS],
}

impl<T: Real> FootstepPlan<T> {
    /// Swing in progress for `leg` at `t` (half-open `[lift_off, touchdown)`).
    pub fn swing_at(&self, leg: usize, t: T) -> Option<&SwingInterval<T>> {
        self.legs[leg].swings.iter().find(|s| s.lift_off <= t && t < s.touchdown)
    }

    pub fn in_stance(&self, leg: usize, t: T) -> bool {
        self.swing_at(leg, t).is_none()
    }

    pub fn stance_set(&self, t: T) -> [bool; NUM_LEGS] {
        std::array::from_fn(|k| self.in_stance(k, t))
    }

    /// Ground contact point of `leg` that is current, or was last, at `t`.
    pub fn foothold_at(&self, leg: usize, t: T) -> Vector3<T> {
        let s = &self.legs[leg];
        s.swings.iter().rev().find(|w| w.touchdown <= t).map_or(s.initial_foothold, |w| w.trajectory.target)
    }

    /// Planned foot position: the pinned foothold in stance, the swing path otherwise.
    pub fn foot_target(&self, leg: usize, t: T) -> Vector3<T> {
        match self.swing_at(leg, t) {
            Some(s) => s.trajectory.position(t - s.lift_off),
            None => self.foothold_at(leg, t),
        }
    }

    pub fn foot_velocity(&self, leg: usize, t: T) -> Vector3<T> {
        match self.swing_at(leg, t) {
            Some(s) => s.trajectory.velocity(t - s.lift_off),
            None => Vector3::zeros(),
        }
    }

    pub fn swing_count(&self) -> usize {
        self.legs.iter().map(|l| l.swings.len()).sum()
    }

    /// All footholds of every leg in order, including the initial one.
    pub fn footholds(&self, leg: usize) -> Vec<Vector3<T>> {
        let s = &self.legs[leg];
        std::iter::once(s.initial_foothold).chain(s.swings.iter().map(|w| w.trajectory.target)).collect()
    }
}

/// Plans footholds and swing timing for a body reference over `[0, horizon)`.
/// Every planned foot position is checked for reachability by leg inverse
/// kinematics along the reference body motion.
pub fn plan_footsteps<T: Real>(
    model: &RobotModel<T>,
    gait: &GaitParams<T>,
    reference: BodyReference<T>,
    horizon: T,
) -> Result<FootstepPlan<T>, PlanError> {
    gait.validate()?;
    if !(horizon >= T::zero()) {
        return Err(PlanError::InvalidCommand("horizon must be non-negative".into()));
    }
    let period = gait.cycle_period;
    let swing = gait.swing_duration();
    let start_body = reference.pose_at(T::zero());
    let legs: [LegSchedule<T>; NUM_LEGS] = std::array::from_fn(|leg| {
        let mut current = model.nominal_foothold(&start_body, leg, gait.stance_width);
        let initial_foothold = current;
        let mut swings = Vec::new();
        let mut k = 0usize;
        loop {
            let lift_off = gait.phase_offset(leg) + period * lit(k as f64);
            if lift_off >= horizon {
                break;
            }
            let touchdown = lift_off + swing;
            let mid_stance = touchdown + (period - swing) * lit(0.5);
            let target = model.nominal_foothold(&reference.pose_at(mid_stance), leg, gait.stance_width);
            if to_f64((target - current).norm()) > MIN_STEP {
                swings.push(SwingInterval {
                    lift_off,
                    touchdown,
                    trajectory: plan_swing_trajectory(current, target, gait.step_height, swing),
                });
                current = target;
            }
            k += 1;
        }
        LegSchedule { initial_foothold, swings }
    });
    let plan = FootstepPlan { gait: *gait, horizon, reference, legs };
    for leg in 0..NUM_LEGS {
        for s in &plan.legs[leg].swings {
            let length = (s.trajectory.target - s.trajectory.start).norm();
            if length > gait.step_length_max {
                return Err(PlanError::StepTooLong {
                    leg,
                    time: to_f64(s.lift_off),
                    length: to_f64(length),
                    max: to_f64(gait.step_length_max),
                });
            }
        }
    }
    check_reachability(model, &plan)?;
    Ok(plan)
}

fn check_reachability<T: Real>(model: &RobotModel<T>, plan: &FootstepPlan<T>) -> Result<(), PlanError> {
    let end = plan.horizon.max(plan.legs.iter().flat_map(|l| l.swings.last()).map(|s| s.touchdown).fold(T::zero(), |a, b| a.max(b)));
    let step = plan.gait.cycle_period / lit((2 * REACH_SAMPLES) as f64);
    let n = (to_f64(end / step)).ceil() as usize;
    for i in 0..=n {
        let t = (step * lit(i as f64)).min(end);
        let body = plan.reference.pose_at(t);
        for leg in 0..NUM_LEGS {
            let foot = plan.foot_target(leg, t);
            model
                .leg_ik_world(&body, leg, &foot)
                .map_err(|source| PlanError::Unreachable { leg, time: to_f64(t), source })?;
        }
    }
    Ok(())
}

/// Tripod gait under a constant body command.
pub fn plan_tripod_gait<T: Real>(
    model: &RobotModel<T>,
    gait: &GaitParams<T>,
    cmd: &BodyCommand<T>,
    start: PlanarPose<T>,
    horizon: T,
) -> Result<FootstepPlan<T>, PlanError> {
    plan_footsteps(model, gait, BodyReference::constant(start, *cmd)?, horizon)
}

/// Largest yaw change per cycle keeping the foothold chord within the
/// maximum step length.
pub fn max_yaw_per_cycle<T: Real>(gait: &GaitParams<T>) -> T {
    let ratio = (gait.step_length_max / (gait.stance_width * lit(2.0))).min(T::one());
    ratio.asin() * lit(2.0)
}

/// Turns the body by `total_yaw` about its centre at constant rate over the
/// fewest whole cycles allowed by the step length, then settles for one cycle
/// so every foot returns to its nominal position.
pub fn plan_turn_in_place<T: Real>(
    model: &RobotModel<T>,
    total_yaw: T,
    gait: &GaitParams<T>,
    start: PlanarPose<T>,
    body_height: T,
) -> Result<FootstepPlan<T>, PlanError> {
    gait.validate()?;
    // A foot's first swing spans the body motion from t = 0 to the middle of
    // its next stance, up to T/2 + (1 - beta) T + beta T / 2 for tripod B.
    let period = gait.cycle_period;
    let first_span = (period * lit(0.5) + gait.swing_duration() + gait.duty_factor * period * lit(0.5)) / period;
    let per_cycle = max_yaw_per_cycle(gait) / first_span.max(T::one());
    let cycles = to_f64(total_yaw.abs() / per_cycle).ceil();
    let idle = BodyCommand { velocity: [T::zero(); 2], yaw_rate: T::zero(), body_height };
    let segments = if cycles > 0.0 {
        let turn_time = period * lit(cycles);
        vec![
            CommandSegment { start: T::zero(), command: BodyCommand { yaw_rate: total_yaw / turn_time, ..idle } },
            CommandSegment { start: turn_time, command: idle },
        ]
    } else {
        vec![CommandSegment { start: T::zero(), command: idle }]
    };
    let reference = BodyReference::new(start, segments)?;
    plan_footsteps(model, gait, reference, period * lit(cycles + 1.0))
}

/// Ground projection helper.
pub fn xy<T: Real>(p: &Vector3<T>) -> Vector2<T> {
    Vector2::new(p.x, p.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gait() -> GaitParams<f64> {
        GaitParams { cycle_period: 1.6, duty_factor: 0.5, step_height: 0.08, step_length_max: 0.4, stance_width: 1.15 }
    }

    #[test]
    fn reference_integrates_arc() {
        let cmd = BodyCommand { velocity: [0.2, 0.0], yaw_rate: 0.1, body_height: 0.5 };
        let r = BodyReference::constant(PlanarPose::default(), cmd).unwrap();
        let h = 1e-3;
        let mut p = PlanarPose::<f64>::default();
        for _ in 0..5000 {
            let mid = p.yaw + 0.5 * h * 0.1;
            p = PlanarPose { x: p.x + 0.2 * mid.cos() * h, y: p.y + 0.2 * mid.sin() * h, yaw: p.yaw + 0.1 * h };
        }
        let q = r.planar_at(5.0);
        assert!((q.x - p.x).abs() < 1e-7 && (q.y - p.y).abs() < 1e-7);
    }

    #[test]
    fn standstill_has_no_swings() {
        let m = RobotModel::desk_scale();
        let cmd = BodyCommand { velocity: [0.0; 2], yaw_rate: 0.0, body_height: 0.5 };
        let p = plan_tripod_gait(&m, &gait(), &cmd, PlanarPose::default(), 10.0).unwrap();
        assert_eq!(p.swing_count(), 0);
    }

    #[test]
    fn tripods_alternate() {
        let m = RobotModel::desk_scale();
        let cmd = BodyCommand { velocity: [0.1, 0.0], yaw_rate: 0.0, body_height: 0.5 };
        let p = plan_tripod_gait(&m, &gait(), &cmd, PlanarPose::default(), 6.4).unwrap();
        for i in 0..640 {
            let t = i as f64 * 0.01;
            let s = p.stance_set(t);
            assert!(s.iter().filter(|&&b| b).count() >= 3);
        }
        assert!(!p.in_stance(0, 0.1) && p.in_stance(1, 0.1));
        assert!(p.in_stance(0, 0.9) && !p.in_stance(1, 0.9));
    }

    #[test]
    fn oversized_step_rejected() {
        let m = RobotModel::desk_scale();
        let cmd = BodyCommand { velocity: [0.4, 0.0], yaw_rate: 0.0, body_height: 0.5 };
        let e = plan_tripod_gait(&m, &gait(), &cmd, PlanarPose::default(), 4.0).unwrap_err();
        assert!(matches!(e, PlanError::StepTooLong { .. }));
    }
}
