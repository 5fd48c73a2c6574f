//! Scenario files: timing, gait, body command profile, end-effector target
//! profile and solver settings. Human-facing angles are in degrees.

use std::fs;
use std::path::Path;

use hexwall_core::gait::{BodyReference, CommandSegment, PlanarPose};
use hexwall_core::tasks::{validate_priority_order, TaskCategory, DEFAULT_PRIORITY_ORDER};
use hexwall_core::{BodyCommand, GaitParams, HomogeneousTransform, PlanError};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown bundled scenario `{0}`")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub yaw_deg: f64,
    pub body_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandLimits {
    pub max_speed: f64,
    pub max_yaw_rate_deg: f64,
}

impl Default for CommandLimits {
    fn default() -> Self {
        Self { max_speed: 0.3, max_yaw_rate_deg: 30.0 }
    }
}

/// Body command active from `start` until the next segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandKeyframe {
    pub start: f64,
    /// Body-frame velocity, m/s.
    #[serde(default)]
    pub velocity: [f64; 2],
    #[serde(default)]
    pub yaw_rate_deg: f64,
    pub body_height: f64,
}

/// Turn the body in place by a total angle instead of following commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnInPlace {
    pub total_yaw_deg: f64,
}

/// End-effector target relative to its initial pose: world-frame position
/// offset and world-frame roll/pitch/yaw rotation applied on top of the
/// initial orientation. Targets are linearly interpolated between keyframes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EeKeyframe {
    pub time: f64,
    #[serde(default)]
    pub offset: [f64; 3],
    #[serde(default)]
    pub rpy_deg: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmStart {
    #[serde(default)]
    pub fold_deg: [f64; 3],
    #[serde(default)]
    pub manipulator_deg: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSettings {
    pub priority_order: [TaskCategory; 3],
    pub end_effector_weight: f64,
    pub trunk_weight: f64,
    pub swing_weight: f64,
}

impl Default for TaskSettings {
    fn default() -> Self {
        Self { priority_order: DEFAULT_PRIORITY_ORDER, end_effector_weight: 1.0, trunk_weight: 1.0, swing_weight: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub damping: f64,
    pub rank_tolerance: f64,
    pub pin_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { damping: 1e-6, rank_tolerance: 1e-9, pin_tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub duration: f64,
    pub tick: f64,
    #[serde(default)]
    pub payload: f64,
    /// RMS end-effector position tracking tolerance, m.
    #[serde(default = "default_ee_tolerance")]
    pub ee_tolerance: f64,
    pub start: StartPose,
    pub gait: GaitParams<f64>,
    #[serde(default)]
    pub limits: CommandLimits,
    #[serde(default)]
    pub arm: Option<ArmStart>,
    #[serde(default)]
    pub tasks: TaskSettings,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub turn: Option<TurnInPlace>,
    #[serde(default)]
    pub body_command: Vec<CommandKeyframe>,
    #[serde(default)]
    pub ee_profile: Vec<EeKeyframe>,
}

fn default_ee_tolerance() -> f64 {
    0.005
}

pub const BUNDLED: [(&str, &str); 4] = [
    ("standstill", include_str!("../data/scenarios/standstill.toml")),
    ("turn_in_place_360", include_str!("../data/scenarios/turn_in_place_360.toml")),
    ("walk_and_install", include_str!("../data/scenarios/walk_and_install.toml")),
    ("walk_and_adjust", include_str!("../data/scenarios/walk_and_adjust.toml")),
];

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn bundled(name: &str) -> Result<Scenario, ScenarioError> {
    let (_, text) = BUNDLED.iter().find(|(n, _)| *n == name).ok_or_else(|| ScenarioError::Unknown(name.into()))?;
    parse_scenario(text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let s: Scenario = toml::from_str(text)?;
    s.validate()?;
    Ok(s)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    parse_scenario(&text)
}

/// Loads a bundled scenario by name, or a scenario file by path.
pub fn resolve_scenario(name_or_path: &str) -> Result<Scenario, ScenarioError> {
    if BUNDLED.iter().any(|(n, _)| *n == name_or_path) {
        bundled(name_or_path)
    } else {
        load_scenario(name_or_path)
    }
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(1e-3..=0.1).contains(&self.tick) {
            return Err(invalid(format!("tick {} s outside [0.001, 0.1] s", self.tick)));
        }
        self.gait.validate().map_err(|e| invalid(e.to_string()))?;
        let gaited = self.turn.is_some() || self.body_command.iter().any(|c| c.velocity != [0.0; 2] || c.yaw_rate_deg != 0.0);
        if !(self.duration > 0.0) || (gaited && self.duration < self.gait.cycle_period) {
            return Err(invalid("duration must cover at least one gait cycle"));
        }
        if (self.duration / self.tick - (self.duration / self.tick).round()).abs() > 1e-9 {
            return Err(invalid("duration must be a whole number of ticks"));
        }
        if !(self.payload >= 0.0) || !(self.ee_tolerance > 0.0) {
            return Err(invalid("payload must be non-negative and ee_tolerance positive"));
        }
        if !(self.start.body_height > 0.0) {
            return Err(invalid("start body height must be positive"));
        }
        validate_priority_order(&self.tasks.priority_order).map_err(|e| invalid(e.to_string()))?;
        let t = &self.tasks;
        if [t.end_effector_weight, t.trunk_weight, t.swing_weight].iter().any(|w| !(*w > 0.0)) {
            return Err(invalid("task weights must be positive"));
        }
        if !(self.solver.damping >= 0.0 && self.solver.rank_tolerance > 0.0 && self.solver.pin_tolerance > 0.0) {
            return Err(invalid("solver settings must be positive"));
        }
        if self.turn.is_some() && !self.body_command.is_empty() {
            return Err(invalid("a scenario either turns in place or follows body commands, not both"));
        }
        for c in &self.body_command {
            if c.velocity[0].hypot(c.velocity[1]) > self.limits.max_speed {
                return Err(invalid(format!("command at t = {} exceeds the speed limit", c.start)));
            }
            if c.yaw_rate_deg.abs() > self.limits.max_yaw_rate_deg {
                return Err(invalid(format!("command at t = {} exceeds the yaw-rate limit", c.start)));
            }
        }
        if self.ee_profile.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(invalid("end-effector keyframe times must increase"));
        }
        self.body_reference().map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }

    pub fn start_pose(&self) -> PlanarPose<f64> {
        PlanarPose { x: self.start.x, y: self.start.y, yaw: self.start.yaw_deg.to_radians() }
    }

    pub fn tick_count(&self) -> usize {
        (self.duration / self.tick).round() as usize
    }

    /// Body reference for command-driven scenarios; standing still when no
    /// command is given.
    pub fn body_reference(&self) -> Result<BodyReference<f64>, PlanError> {
        let segments = if self.body_command.is_empty() {
            vec![CommandSegment {
                start: 0.0,
                command: BodyCommand { velocity: [0.0; 2], yaw_rate: 0.0, body_height: self.start.body_height },
            }]
        } else {
            self.body_command
                .iter()
                .map(|c| CommandSegment {
                    start: c.start,
                    command: BodyCommand { velocity: c.velocity, yaw_rate: c.yaw_rate_deg.to_radians(), body_height: c.body_height },
                })
                .collect()
        };
        BodyReference::new(self.start_pose(), segments)
    }

    /// End-effector target at `t` given the initial end-effector pose, or
    /// `None` when the scenario has no end-effector task.
    pub fn ee_target(&self, initial: &HomogeneousTransform<f64>, t: f64) -> Option<HomogeneousTransform<f64>> {
        let keys = &self.ee_profile;
        let first = keys.first()?;
        let (offset, rpy) = if t <= first.time {
            (first.offset, first.rpy_deg)
        } else if let Some(w) = keys.windows(2).find(|w| t < w[1].time) {
            let s = (t - w[0].time) / (w[1].time - w[0].time);
            let lerp = |a: [f64; 3], b: [f64; 3]| std::array::from_fn(|i| a[i] + (b[i] - a[i]) * s);
            (lerp(w[0].offset, w[1].offset), lerp(w[0].rpy_deg, w[1].rpy_deg))
        } else {
            let last = keys.last().unwrap();
            (last.offset, last.rpy_deg)
        };
        let delta = HomogeneousTransform::from_rpy(
            rpy[0].to_radians(),
            rpy[1].to_radians(),
            rpy[2].to_radians(),
            Vector3::zeros(),
        );
        Some(HomogeneousTransform::new(
            delta.rotation * initial.rotation,
            initial.translation + Vector3::from(offset),
        ))
    }
}
