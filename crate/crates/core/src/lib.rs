//! Kinematics and control for a hexapod curtain-wall installation robot:
//! six 3-DOF legs, a hydraulic folding arm and a serial-parallel
//! manipulator, coordinated by a prioritized whole-body controller.
//!
//! Everything is generic over the scalar type; the crate root exports
//! `f64` and `f32` aliases for the common types.

// Checks are written as `!(a < b)` so that NaN inputs fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod folding_arm;
pub mod gait;
pub mod geometry;
pub mod leg;
pub mod manipulator;
pub mod robot;
pub mod scalar;
pub mod stability;
pub mod swing;
pub mod tasks;
pub mod wbc;

pub use folding_arm::{fold_angle_from_extension, fold_extension, fold_torque, FoldArm, FoldLinkGeometry, LinkageError, RotationSense};
pub use gait::{
    plan_footsteps, plan_tripod_gait, plan_turn_in_place, BodyCommand, BodyReference, CommandSegment, FootstepPlan,
    GaitParams, PlanError, PlanarPose,
};
pub use geometry::{compose, dh_link_transform, invert, DhRow, GeometryError, HomogeneousTransform};
pub use leg::{leg_fk, leg_ik, leg_jacobian, LegError, LegGeometry, LegJointAngles};
pub use manipulator::{
    module_aux_extension, module_primary_extension, module_state, module_torque, Manipulator, ModuleError,
    ModuleGeometry, ModuleState,
};
pub use robot::{ModelError, RobotModel, WholeBodyState};
pub use scalar::Real;
pub use stability::{stability_margin, StabilityError};
pub use swing::{plan_swing_trajectory, SwingTrajectory};
pub use tasks::{assemble_task_stack, Task, TaskCategory, TaskKind, TaskStack};
pub use wbc::{
    gravity_load_torques, map_torques_to_cylinders, solve_hierarchy, solve_priorities, ActuationError, SolveResult,
    SolverSettings, WbcError,
};

pub type Transform64 = HomogeneousTransform<f64>;
pub type Transform32 = HomogeneousTransform<f32>;
pub type LegGeometry64 = LegGeometry<f64>;
pub type LegGeometry32 = LegGeometry<f32>;
pub type FoldLink64 = FoldLinkGeometry<f64>;
pub type FoldLink32 = FoldLinkGeometry<f32>;
pub type Module64 = ModuleGeometry<f64>;
pub type Module32 = ModuleGeometry<f32>;
pub type RobotModel64 = RobotModel<f64>;
pub type RobotModel32 = RobotModel<f32>;
pub type WholeBodyState64 = WholeBodyState<f64>;
pub type FootstepPlan64 = FootstepPlan<f64>;
