//! Whole-body control: strict-priority differential inverse kinematics,
//! static gravity loads and their mapping onto cylinder forces.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::folding_arm::LinkageError;
use crate::geometry::{rotation_log, skew};
use crate::leg::leg_jacobian;
use crate::manipulator::ModuleError;
use crate::robot::{
    leg_dof, RobotModel, WholeBodyState, ARM_DOF, BASE_ANGULAR, BASE_LINEAR, GRAVITY, NUM_DOF, NUM_JOINTS,
};
use crate::scalar::{lit, to_f64, Real};
use crate::tasks::{TaskKind, TaskStack, TaskStackError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActuationError {
    #[error("cylinder {cylinder} lever arm {lever:.3e} m is singular")]
    LeverSingular { cylinder: usize, lever: f64 },
    #[error("cylinder {cylinder} force {force:.1} N exceeds the {max:.1} N limit")]
    ForceLimit { cylinder: usize, force: f64, max: f64 },
    #[error(transparent)]
    Linkage(#[from] LinkageError),
    #[error(transparent)]
    Module(#[from] ModuleError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WbcError {
    #[error("stance-foot pins are infeasible (residual {residual:.3e})")]
    InfeasiblePins { residual: f64 },
    #[error("invalid task stack: {0}")]
    InvalidStack(#[from] TaskStackError),
    #[error(transparent)]
    Actuation(#[from] ActuationError),
}

/// Lever arms below this are treated as singular, m.
pub const LEVER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings<T> {
    /// Damping of each level's pseudo-inverse.
    pub damping: T,
    /// Singular values below this (relative to `max(1, sigma_max)`) are dropped.
    pub rank_tolerance: T,
    /// Task-space error gain, 1/s.
    pub gain: T,
    /// Largest admissible priority-0 residual.
    pub pin_tolerance: T,
    /// Payload carried at the end effector, kg.
    pub payload: T,
}

impl<T: Real> SolverSettings<T> {
    pub fn with_gain(gain: T) -> Self {
        Self { damping: lit(1e-6), rank_tolerance: lit(1e-9), gain, pin_tolerance: lit(1e-6), payload: T::zero() }
    }
}

/// One priority level: stacked task Jacobian rows and desired task velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskLevel<T: Real> {
    pub jacobian: DMatrix<T>,
    pub target: DVector<T>,
    /// Per-row weights, all positive.
    pub weights: DVector<T>,
}

impl<T: Real> TaskLevel<T> {
    pub fn unweighted(jacobian: DMatrix<T>, target: DVector<T>) -> Self {
        let n = target.len();
        Self { jacobian, target, weights: DVector::from_element(n, T::one()) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchySolution<T: Real> {
    pub velocity: DVector<T>,
    /// `|J_k qdot - xdot_k|` of each level for the final solution.
    pub residuals: Vec<T>,
    /// Rank each level contributed.
    pub ranks: Vec<usize>,
}

/// Strict-priority least squares. Each level is solved in the null space of
/// all levels above it, so lower levels cannot disturb higher ones.
pub fn solve_hierarchy<T: Real>(levels: &[TaskLevel<T>], ndof: usize, damping: T, rank_tolerance: T) -> HierarchySolution<T> {
    let mut qdot = DVector::zeros(ndof);
    let mut null = DMatrix::<T>::identity(ndof, ndof);
    let mut ranks = Vec::with_capacity(levels.len());
    let damping2 = damping * damping;
    for level in levels {
        let w = level.weights.map(|x| x.sqrt());
        let a = DMatrix::from_diagonal(&w) * &level.jacobian * &null;
        let e = level.target.component_mul(&w) - DMatrix::from_diagonal(&w) * (&level.jacobian * &qdot);
        if a.nrows() == 0 {
            ranks.push(0);
            continue;
        }
        let (sigma, u, v) = thin_svd(&a);
        let smax = sigma.iter().cloned().fold(T::zero(), |m, s| m.max(s));
        let cut = rank_tolerance * smax.max(T::one());
        let mut step = DVector::zeros(ndof);
        let mut rank = 0;
        for (i, &s) in sigma.iter().enumerate() {
            if s <= cut {
                continue;
            }
            rank += 1;
            let coeff = u.column(i).dot(&e) * s / (s * s + damping2);
            let v = v.column(i).into_owned();
            step += &v * coeff;
            null -= &v * v.transpose();
        }
        qdot += step;
        ranks.push(rank);
    }
    let residuals = levels.iter().map(|l| (&l.jacobian * &qdot - &l.target).norm()).collect();
    HierarchySolution { velocity: qdot, residuals, ranks }
}

/// One-sided Jacobi SVD of an `m x n` matrix: returns `(sigma, U, V)` with
/// `A = U diag(sigma) V^T`, `U` of size `m x m` and `V` of size `n x m`.
/// Columns of `V` belonging to (numerically) zero singular values carry no information.
///
/// Used instead of the bidiagonal SVD, which loses accuracy on matrices with
/// exactly zero singular values (the common case for projected task rows).
fn thin_svd<T: Real>(a: &DMatrix<T>) -> (Vec<T>, DMatrix<T>, DMatrix<T>) {
    let m = a.nrows();
    let mut b = a.transpose();
    let mut u = DMatrix::<T>::identity(m, m);
    let eps = T::default_epsilon();
    for _ in 0..64 {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let alpha = b.column(p).norm_squared();
                let beta = b.column(q).norm_squared();
                let gamma = b.column(p).dot(&b.column(q));
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == T::zero() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (lit::<T>(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for mat in [&mut b, &mut u] {
                    for r in 0..mat.nrows() {
                        let (x, y) = (mat[(r, p)], mat[(r, q)]);
                        mat[(r, p)] = c * x - s * y;
                        mat[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<T> = (0..m).map(|i| b.column(i).norm()).collect();
    for (i, s) in sigma.iter().enumerate() {
        if *s > T::zero() {
            b.column_mut(i).unscale_mut(*s);
        }
    }
    (sigma, u, b)
}

/// Rows of the generalized Jacobian for the world position of a point
/// rigidly attached to the body.
fn body_point_columns<T: Real>(j: &mut DMatrix<T>, p: &Vector3<T>, body_origin: &Vector3<T>) {
    j.view_mut((0, BASE_LINEAR), (3, 3)).copy_from(&Matrix3::identity());
    j.view_mut((0, BASE_ANGULAR), (3, 3)).copy_from(&(-skew(&(p - body_origin))));
}

/// Task Jacobian `d(task)/d(generalized velocity)`, with orientation rows in
/// world-frame angular velocity.
pub fn task_jacobian<T: Real>(model: &RobotModel<T>, state: &WholeBodyState<T>, kind: &TaskKind<T>) -> DMatrix<T> {
    let mut j = DMatrix::zeros(kind.dimension(), NUM_DOF);
    let origin = state.body.translation;
    match kind {
        TaskKind::StancePin { leg, .. } | TaskKind::SwingFoot { leg, .. } => {
            let foot = model.foot_world(state, *leg);
            body_point_columns(&mut j, &foot, &origin);
            let r = state.body.rotation * model.leg_mount(*leg).rotation;
            let jl = r * leg_jacobian(&model.legs[*leg].geometry, &state.legs[*leg]);
            j.view_mut((0, leg_dof(*leg)), (3, 3)).copy_from(&jl);
        }
        TaskKind::TrunkPose { .. } => {
            j.view_mut((0, BASE_LINEAR), (3, 3)).copy_from(&Matrix3::identity());
            j.view_mut((3, BASE_ANGULAR), (3, 3)).copy_from(&Matrix3::identity());
        }
        TaskKind::EndEffectorPose { .. } => {
            let arm = model.arm_kinematics(state);
            let tip = arm.end_effector.translation;
            body_point_columns(&mut j, &tip, &origin);
            j.view_mut((3, BASE_ANGULAR), (3, 3)).copy_from(&Matrix3::identity());
            for (k, ax) in arm.axes.iter().enumerate() {
                let lin = ax.axis.cross(&(tip - ax.origin));
                for r in 0..3 {
                    j[(r, ARM_DOF + k)] = lin[r];
                    j[(3 + r, ARM_DOF + k)] = ax.axis[r];
                }
            }
        }
    }
    j
}

/// Task-space error (target minus current); orientation as a world rotation vector.
pub fn task_error<T: Real>(model: &RobotModel<T>, state: &WholeBodyState<T>, kind: &TaskKind<T>) -> DVector<T> {
    let pose_error = |current: &crate::geometry::HomogeneousTransform<T>, target: &crate::geometry::HomogeneousTransform<T>| {
        let dp = target.translation - current.translation;
        let dr = rotation_log(&(target.rotation * current.rotation.transpose()));
        DVector::from_iterator(6, dp.iter().chain(dr.iter()).cloned())
    };
    match kind {
        TaskKind::StancePin { leg, point } | TaskKind::SwingFoot { leg, point } => {
            DVector::from_column_slice((point - model.foot_world(state, *leg)).as_slice())
        }
        TaskKind::TrunkPose { target } => pose_error(&state.body, target),
        TaskKind::EndEffectorPose { target } => pose_error(&model.end_effector(state), target),
    }
}

/// Result of one control step.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T: Real> {
    /// Generalized velocity after saturation scaling.
    pub velocity: DVector<T>,
    /// Residual of each priority level before scaling.
    pub task_residuals: Vec<T>,
    pub ranks: Vec<usize>,
    /// Uniform factor applied to respect joint velocity caps (1 when unsaturated).
    pub velocity_scale: T,
    /// Static holding torques of the six arm joints.
    pub arm_torques: [T; 6],
    /// Forces of the 3 folding-arm cylinders then `KL, P, Q` of each module.
    pub arm_forces: [T; 12],
    /// First cylinder over its force cap, if any (reported, not clipped).
    pub force_violation: Option<ActuationError>,
}

impl<T: Real> SolveResult<T> {
    pub fn saturated(&self) -> bool {
        self.velocity_scale < T::one() || self.force_violation.is_some()
    }
}

/// Builds and solves the prioritized problem for one control step.
pub fn solve_priorities<T: Real>(
    model: &RobotModel<T>,
    stack: &TaskStack<T>,
    state: &WholeBodyState<T>,
    settings: &SolverSettings<T>,
) -> Result<SolveResult<T>, WbcError> {
    stack.validate()?;
    let levels: Vec<TaskLevel<T>> = stack
        .levels()
        .iter()
        .map(|tasks| {
            let rows: usize = tasks.iter().map(|t| t.kind.dimension()).sum();
            let mut jacobian = DMatrix::zeros(rows, NUM_DOF);
            let mut target = DVector::zeros(rows);
            let mut weights = DVector::zeros(rows);
            let mut r = 0;
            for t in tasks {
                let d = t.kind.dimension();
                jacobian.view_mut((r, 0), (d, NUM_DOF)).copy_from(&task_jacobian(model, state, &t.kind));
                target.rows_mut(r, d).copy_from(&(task_error(model, state, &t.kind) * settings.gain));
                weights.rows_mut(r, d).fill(t.weight);
                r += d;
            }
            TaskLevel { jacobian, target, weights }
        })
        .collect();
    let sol = solve_hierarchy(&levels, NUM_DOF, settings.damping, settings.rank_tolerance);
    let has_pins = stack.tasks.iter().any(|t| matches!(t.kind, TaskKind::StancePin { .. }));
    if has_pins && sol.residuals[0] > settings.pin_tolerance {
        return Err(WbcError::InfeasiblePins { residual: to_f64(sol.residuals[0]) });
    }
    let mut scale = T::one();
    for (i, cap) in model.limits.joint_velocity.iter().enumerate().take(NUM_JOINTS) {
        let v = sol.velocity[6 + i].abs();
        if v > *cap {
            scale = scale.min(*cap / v);
        }
    }
    let arm_torques = gravity_load_torques(model, state, settings.payload);
    let arm_forces = map_torques_to_cylinders(model, state, &arm_torques)?;
    let force_violation = check_force_limits(model, &arm_forces).err();
    Ok(SolveResult {
        velocity: sol.velocity * scale,
        task_residuals: sol.residuals,
        ranks: sol.ranks,
        velocity_scale: scale,
        arm_torques,
        arm_forces,
        force_violation,
    })
}

/// Point masses carried by the arm joints: segment midpoints and the payload
/// at the end effector, in world coordinates, with the index of the first
/// joint that does not carry them.
fn arm_masses<T: Real>(model: &RobotModel<T>, state: &WholeBodyState<T>, payload: T) -> Vec<(usize, T, Vector3<T>)> {
    let arm = model.arm_kinematics(state);
    let half = lit::<T>(0.5);
    let mut ends: Vec<Vector3<T>> = arm.axes.iter().map(|a| a.origin).collect();
    ends.push(arm.end_effector.translation);
    let seg_masses = model.masses.fold_segments.iter().chain(&model.masses.manipulator_segments);
    let mut out: Vec<_> = seg_masses.enumerate().map(|(i, m)| (i, *m, (ends[i] + ends[i + 1]) * half)).collect();
    out.push((5, payload, arm.end_effector.translation));
    out
}

/// Static holding torque of each arm joint (3 folding, 3 manipulator) against
/// gravity, for the segment masses and a payload at the end effector:
/// `tau_j = sum over outboard masses of m g (axis_j x (p_m - o_j))_z`.
pub fn gravity_load_torques<T: Real>(model: &RobotModel<T>, state: &WholeBodyState<T>, payload: T) -> [T; 6] {
    let arm = model.arm_kinematics(state);
    let g = lit::<T>(GRAVITY);
    let masses = arm_masses(model, state, payload);
    std::array::from_fn(|j| {
        let ax = &arm.axes[j];
        masses
            .iter()
            .filter(|(last, _, _)| *last >= j)
            .map(|(_, m, p)| *m * g * ax.axis.cross(&(p - ax.origin)).z)
            .fold(T::zero(), |a, b| a + b)
    })
}

/// Cylinder forces realizing the joint torques: `F = tau / lever` for each
/// folding-arm joint, and the minimum-norm `(F4, F5, F6)` for each module.
pub fn map_torques_to_cylinders<T: Real>(
    model: &RobotModel<T>,
    state: &WholeBodyState<T>,
    torques: &[T; 6],
) -> Result<[T; 12], ActuationError> {
    let tol = lit::<T>(LEVER_TOL);
    let mut out = [T::zero(); 12];
    for (j, link) in model.fold_arm.links.iter().enumerate() {
        let lever = link.lever_arm(state.arm[j])?;
        if lever.abs() < tol {
            return Err(ActuationError::LeverSingular { cylinder: 18 + j, lever: to_f64(lever) });
        }
        out[j] = torques[j] / lever;
    }
    for (k, m) in model.manipulator.modules.iter().enumerate() {
        let (a, b) = m.lever_arms(state.manipulator[k])?;
        let norm2 = a * a + lit::<T>(2.0) * b * b;
        if norm2.sqrt() < tol {
            return Err(ActuationError::LeverSingular { cylinder: 21 + 3 * k, lever: to_f64(norm2.sqrt()) });
        }
        let tau = torques[3 + k];
        out[3 + 3 * k] = tau * a / norm2;
        out[4 + 3 * k] = -tau * b / norm2;
        out[5 + 3 * k] = -tau * b / norm2;
    }
    Ok(out)
}

/// Checks arm cylinder forces against their caps.
pub fn check_force_limits<T: Real>(model: &RobotModel<T>, forces: &[T; 12]) -> Result<(), ActuationError> {
    for (i, f) in forces.iter().enumerate() {
        let cylinder = 18 + i;
        let max = model.limits.cylinders[cylinder].max_force;
        if f.abs() > max {
            return Err(ActuationError::ForceLimit { cylinder, force: to_f64(*f), max: to_f64(max) });
        }
    }
    Ok(())
}
