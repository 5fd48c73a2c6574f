//! Prioritized task stack for the whole-body controller.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gait::FootstepPlan;
use crate::geometry::HomogeneousTransform;
use crate::robot::NUM_LEGS;
use crate::scalar::Real;

/// Task families whose relative priority is configurable. Stance-foot pins
/// are not listed: they always take priority 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskCategory {
    EndEffector,
    Trunk,
    Swing,
}

pub const DEFAULT_PRIORITY_ORDER: [TaskCategory; 3] = [TaskCategory::EndEffector, TaskCategory::Trunk, TaskCategory::Swing];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaskKind<T: Real> {
    /// Keep a stance foot at its world foothold.
    StancePin { leg: usize, point: Vector3<T> },
    /// Track a swing-foot position in world coordinates.
    SwingFoot { leg: usize, point: Vector3<T> },
    /// Body pose in world coordinates.
    TrunkPose { target: HomogeneousTransform<T> },
    /// End-effector pose in world coordinates.
    EndEffectorPose { target: HomogeneousTransform<T> },
}

impl<T: Real> TaskKind<T> {
    pub fn dimension(&self) -> usize {
        match self {
            TaskKind::StancePin { .. } | TaskKind::SwingFoot { .. } => 3,
            TaskKind::TrunkPose { .. } | TaskKind::EndEffectorPose { .. } => 6,
        }
    }

    pub fn category(&self) -> Option<TaskCategory> {
        match self {
            TaskKind::StancePin { .. } => None,
            TaskKind::SwingFoot { .. } => Some(TaskCategory::Swing),
            TaskKind::TrunkPose { .. } => Some(TaskCategory::Trunk),
            TaskKind::EndEffectorPose { .. } => Some(TaskCategory::EndEffector),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task<T: Real> {
    pub kind: TaskKind<T>,
    /// 0 is the highest priority.
    pub priority: usize,
    /// Row weight within its priority level.
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaskStackError {
    #[error("stance pin for leg {0} is not at priority 0")]
    PinNotTopPriority(usize),
    #[error("task at priority 0 is not a stance pin")]
    NonPinAtTop,
    #[error("priority levels are not contiguous from 0 (missing {0})")]
    PriorityGap(usize),
    #[error("task weight must be positive")]
    NonPositiveWeight,
    #[error("leg index {0} out of range")]
    BadLeg(usize),
    #[error("priority order must list each task category exactly once")]
    BadOrder,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskStack<T: Real> {
    pub tasks: Vec<Task<T>>,
}

impl<T: Real> TaskStack<T> {
    pub fn num_levels(&self) -> usize {
        self.tasks.iter().map(|t| t.priority + 1).max().unwrap_or(0)
    }

    /// Tasks grouped by priority, highest first.
    pub fn levels(&self) -> Vec<Vec<&Task<T>>> {
        let mut out = vec![Vec::new(); self.num_levels()];
        for t in &self.tasks {
            out[t.priority].push(t);
        }
        out
    }

    pub fn validate(&self) -> Result<(), TaskStackError> {
        let has_pins = self.tasks.iter().any(|t| matches!(t.kind, TaskKind::StancePin { .. }));
        for t in &self.tasks {
            if !(t.weight > T::zero()) {
                return Err(TaskStackError::NonPositiveWeight);
            }
            match t.kind {
                TaskKind::StancePin { leg, .. } | TaskKind::SwingFoot { leg, .. } if leg >= NUM_LEGS => {
                    return Err(TaskStackError::BadLeg(leg));
                }
                TaskKind::StancePin { leg, .. } if t.priority != 0 => return Err(TaskStackError::PinNotTopPriority(leg)),
                TaskKind::StancePin { .. } => {}
                _ if has_pins && t.priority == 0 => return Err(TaskStackError::NonPinAtTop),
                _ => {}
            }
        }
        for (p, level) in self.levels().iter().enumerate() {
            if level.is_empty() {
                return Err(TaskStackError::PriorityGap(p));
            }
        }
        Ok(())
    }
}

/// Checks that `order` is a permutation of the three task categories.
pub fn validate_priority_order(order: &[TaskCategory]) -> Result<(), TaskStackError> {
    let all = [TaskCategory::EndEffector, TaskCategory::Trunk, TaskCategory::Swing];
    if order.len() != 3 || all.iter().any(|c| !order.contains(c)) {
        return Err(TaskStackError::BadOrder);
    }
    Ok(())
}

/// Builds the stack for time `t`: stance pins at priority 0, then the
/// categories in `order`, skipping empty ones so levels stay contiguous.
pub fn assemble_task_stack<T: Real>(
    plan: &FootstepPlan<T>,
    trunk_target: HomogeneousTransform<T>,
    ee_target: Option<HomogeneousTransform<T>>,
    t: T,
    order: &[TaskCategory; 3],
) -> TaskStack<T> {
    let mut tasks = Vec::new();
    let stance = plan.stance_set(t);
    let mut priority = 0;
    for (leg, _) in stance.iter().enumerate().filter(|(_, s)| **s) {
        tasks.push(Task { kind: TaskKind::StancePin { leg, point: plan.foothold_at(leg, t) }, priority, weight: T::one() });
    }
    if !tasks.is_empty() {
        priority += 1;
    }
    for category in order {
        let before = tasks.len();
        match category {
            TaskCategory::EndEffector => {
                if let Some(target) = ee_target {
                    tasks.push(Task { kind: TaskKind::EndEffectorPose { target }, priority, weight: T::one() });
                }
            }
            TaskCategory::Trunk => {
                tasks.push(Task { kind: TaskKind::TrunkPose { target: trunk_target }, priority, weight: T::one() });
            }
            TaskCategory::Swing => {
                for (leg, _) in stance.iter().enumerate().filter(|(_, s)| !**s) {
                    let point = plan.foot_target(leg, t);
                    tasks.push(Task { kind: TaskKind::SwingFoot { leg, point }, priority, weight: T::one() });
                }
            }
        }
        if tasks.len() > before {
            priority += 1;
        }
    }
    TaskStack { tasks }
}
