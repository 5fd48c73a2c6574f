//! Kinematic tick loop with pinned stance feet.
//!
//! Each tick: assemble the task stack for the next instant, solve for the
//! generalized velocity, integrate it with explicit Euler, then re-derive the
//! body pose by rigidly fitting the stance feet onto their footholds and
//! re-solve the stance legs so every pinned foot sits exactly on its foothold.

use hexwall_core::gait::{plan_footsteps, plan_turn_in_place, FootstepPlan};
use hexwall_core::geometry::rotation_angle_between;
use hexwall_core::robot::NUM_LEGS;
use hexwall_core::stability::{stability_margin, StabilityError};
use hexwall_core::tasks::{TaskCategory, TaskKind, TaskStack};
use hexwall_core::wbc::{check_force_limits, gravity_load_torques, map_torques_to_cylinders, ActuationError};
use hexwall_core::{
    assemble_task_stack, solve_priorities, HomogeneousTransform, LegError, ModelError, PlanError, SolverSettings,
    WbcError, WholeBodyState,
};
use nalgebra::{Vector2, Vector3};
use thiserror::Error;

use crate::config::{validate_config, ConfigError, RobotConfig};
use crate::fit::rigid_fit;
use crate::log::LogRow;
use crate::metrics::{emit_metrics, Metrics};
use crate::scenario::{Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("planning failed: {0}")]
    Plan(#[from] PlanError),
    #[error("tick {tick}: {source}")]
    Solve { tick: usize, source: WbcError },
    #[error("tick {tick}: {source}")]
    Model { tick: usize, source: ModelError },
    #[error("tick {tick}: leg {leg}: {source}")]
    Leg { tick: usize, leg: usize, source: LegError },
    #[error("tick {tick}: {source}")]
    Stability { tick: usize, source: StabilityError },
    #[error("tick {tick}: {source}")]
    Actuation { tick: usize, source: ActuationError },
}

impl SimError {
    /// True for rejected inputs, false for scenarios that are valid but
    /// cannot be executed.
    pub fn is_validation(&self) -> bool {
        matches!(self, SimError::Config(_) | SimError::Scenario(_))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<LogRow>,
    pub metrics: Metrics,
}

pub fn plan_scenario(config: &RobotConfig, scenario: &Scenario) -> Result<FootstepPlan<f64>, SimError> {
    Ok(match scenario.turn {
        Some(turn) => plan_turn_in_place(
            config,
            turn.total_yaw_deg.to_radians(),
            &scenario.gait,
            scenario.start_pose(),
            scenario.start.body_height,
        )?,
        None => plan_footsteps(config, &scenario.gait, scenario.body_reference()?, scenario.duration)?,
    })
}

fn weight_of(scenario: &Scenario, kind: &TaskKind<f64>) -> f64 {
    match kind.category() {
        Some(TaskCategory::EndEffector) => scenario.tasks.end_effector_weight,
        Some(TaskCategory::Trunk) => scenario.tasks.trunk_weight,
        Some(TaskCategory::Swing) => scenario.tasks.swing_weight,
        None => 1.0,
    }
}

struct Recorder<'a> {
    config: &'a RobotConfig,
    scenario: &'a Scenario,
    plan: &'a FootstepPlan<f64>,
    ee_initial: HomogeneousTransform<f64>,
}

impl Recorder<'_> {
    fn row(
        &self,
        tick: usize,
        t: f64,
        state: &WholeBodyState<f64>,
        residuals: [f64; 4],
        vel_scale: f64,
    ) -> Result<LogRow, SimError> {
        let config = self.config;
        let extensions = config.cylinder_extensions(state).map_err(|source| SimError::Model { tick, source })?;
        let torques = gravity_load_torques(config, state, self.scenario.payload);
        let forces =
            map_torques_to_cylinders(config, state, &torques).map_err(|source| SimError::Actuation { tick, source })?;
        let over_force = check_force_limits(config, &forces).is_err();
        let feet: [Vector3<f64>; NUM_LEGS] = std::array::from_fn(|k| config.foot_world(state, k));
        let support: Vec<Vector2<f64>> = state.stance_legs().map(|k| feet[k].xy()).collect();
        let com = config.com_world(state).xy();
        let margin = stability_margin(&support, &com).map_err(|source| SimError::Stability { tick, source })?;
        let ee = config.end_effector(state);
        let (ee_tracked, ee_pos_err, ee_ang_err) = match self.scenario.ee_target(&self.ee_initial, t) {
            Some(target) => (
                true,
                (target.translation - ee.translation).norm(),
                rotation_angle_between(&target.rotation, &ee.rotation),
            ),
            None => (false, 0.0, 0.0),
        };
        let (roll, pitch, yaw) = state.body.rpy();
        let (eroll, epitch, eyaw) = ee.rpy();
        let reference = self.plan.reference.planar_at(t);
        let mut joints = [0.0; 24];
        joints.copy_from_slice(&state.joint_angles());
        Ok(LogRow {
            time: t,
            body: [state.body.translation.x, state.body.translation.y, state.body.translation.z, roll, pitch, yaw],
            reference: [reference.x, reference.y, reference.yaw],
            joints,
            extensions,
            forces,
            feet: feet.map(|f| [f.x, f.y, f.z]),
            stance: state.stance,
            com: [com.x, com.y],
            margin,
            ee: [ee.translation.x, ee.translation.y, ee.translation.z, eroll, epitch, eyaw],
            ee_tracked,
            ee_pos_err,
            ee_ang_err,
            residuals,
            vel_scale,
            saturated: vel_scale < 1.0 || over_force,
        })
    }
}

/// Runs a scenario to completion. The log has `duration / tick + 1` rows; row
/// `k` holds the state at `k * tick` and the residuals of the solve that
/// produced it (zero for the first row).
pub fn run_scenario(config: &RobotConfig, scenario: &Scenario) -> Result<RunOutput, SimError> {
    validate_config(config)?;
    scenario.validate()?;
    if scenario.payload > config.masses.payload_capacity {
        return Err(ScenarioError::Invalid(format!(
            "payload {} kg exceeds the {} kg capacity",
            scenario.payload, config.masses.payload_capacity
        ))
        .into());
    }
    let plan = plan_scenario(config, scenario)?;
    let dt = scenario.tick;
    let arm = scenario.arm.unwrap_or(crate::scenario::ArmStart { fold_deg: [0.0; 3], manipulator_deg: [0.0; 3] });
    let mut state = config
        .standing_state(
            plan.reference.pose_at(0.0),
            scenario.gait.stance_width,
            arm.fold_deg.map(f64::to_radians),
            arm.manipulator_deg.map(f64::to_radians),
        )
        .map_err(|source| SimError::Model { tick: 0, source })?;
    state.stance = plan.stance_set(0.0);
    config.check_joint_limits(&state).map_err(|source| SimError::Model { tick: 0, source })?;
    let settings = SolverSettings {
        damping: scenario.solver.damping,
        rank_tolerance: scenario.solver.rank_tolerance,
        gain: 1.0 / dt,
        pin_tolerance: scenario.solver.pin_tolerance,
        payload: scenario.payload,
    };
    let rec = Recorder { config, scenario, plan: &plan, ee_initial: config.end_effector(&state) };
    let n = scenario.tick_count();
    let mut rows = Vec::with_capacity(n + 1);
    rows.push(rec.row(0, 0.0, &state, [0.0; 4], 1.0)?);
    for k in 0..n {
        let tick = k + 1;
        let t1 = tick as f64 * dt;
        let mut stack: TaskStack<f64> = assemble_task_stack(
            &plan,
            plan.reference.pose_at(t1),
            scenario.ee_target(&rec.ee_initial, t1),
            t1,
            &scenario.tasks.priority_order,
        );
        for task in &mut stack.tasks {
            task.weight = weight_of(scenario, &task.kind);
        }
        let sol = solve_priorities(config, &stack, &state, &settings).map_err(|source| SimError::Solve { tick, source })?;
        let mut next = state.apply_increment(&(&sol.velocity * dt));
        next.stance = plan.stance_set(t1);
        let stance: Vec<usize> = next.stance_legs().collect();
        let pins: Vec<Vector3<f64>> = stance.iter().map(|&leg| plan.foothold_at(leg, t1)).collect();
        let local: Vec<Vector3<f64>> = stance.iter().map(|&leg| config.foot_in_body(leg, &next.legs[leg])).collect();
        next.body = rigid_fit(&local, &pins);
        for (&leg, pin) in stance.iter().zip(&pins) {
            next.legs[leg] =
                config.leg_ik_world(&next.body, leg, pin).map_err(|source| SimError::Leg { tick, leg, source })?;
        }
        config.check_joint_limits(&next).map_err(|source| SimError::Model { tick, source })?;
        let mut residuals = [0.0; 4];
        for (r, v) in residuals.iter_mut().zip(&sol.task_residuals) {
            *r = *v;
        }
        state = next;
        rows.push(rec.row(tick, t1, &state, residuals, sol.velocity_scale)?);
    }
    let metrics = emit_metrics(&rows, &config.limits);
    Ok(RunOutput { rows, metrics })
}
