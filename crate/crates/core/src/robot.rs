//! Whole-robot geometry: six legs on the chassis, the folding arm and the
//! serial-parallel manipulator mounted on top of it.
//!
//! Generalized velocity layout (30 entries): base linear velocity (world),
//! base angular velocity (world), 18 leg joints (leg-major), 3 folding-arm
//! joints, 3 manipulator joints.

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::JointAxis;
use crate::folding_arm::{fold_extension, FoldArm, FoldLinkGeometry, LinkageError, RotationSense};
use crate::geometry::{rotation_exp, HomogeneousTransform};
use crate::leg::{leg_fk, leg_ik, LegError, LegGeometry, LegJointAngles};
use crate::manipulator::{module_angle_from_extension, Manipulator, ModuleError, ModuleGeometry};
use crate::scalar::{lit, to_f64, Real};

pub const NUM_LEGS: usize = 6;
pub const NUM_JOINTS: usize = 24;
pub const NUM_CYLINDERS: usize = 30;
pub const NUM_DOF: usize = 30;
pub const BASE_LINEAR: usize = 0;
pub const BASE_ANGULAR: usize = 3;
pub const ARM_DOF: usize = 24;
pub const MANIPULATOR_DOF: usize = 27;
/// Legs `{0, 2, 4}`; the other tripod is `{1, 3, 5}`.
pub const TRIPOD_A: [usize; 3] = [0, 2, 4];
pub const TRIPOD_B: [usize; 3] = [1, 3, 5];
pub const GRAVITY: f64 = 9.81;

pub const fn leg_dof(leg: usize) -> usize {
    6 + 3 * leg
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{context}: {source}")]
    Leg { context: String, source: LegError },
    #[error("{context}: {source}")]
    Linkage { context: String, source: LinkageError },
    #[error("{context}: {source}")]
    Module { context: String, source: ModuleError },
    #[error("invariant violated: {name} ({context})")]
    InvariantViolation { name: String, context: String },
}

impl ModelError {
    pub fn invariant(name: &str, context: impl Into<String>) -> Self {
        ModelError::InvariantViolation { name: name.to_string(), context: context.into() }
    }

    /// Name of the violated invariant, when the error is one.
    pub fn invariant_name(&self) -> Option<&str> {
        match self {
            ModelError::InvariantViolation { name, .. } => Some(name),
            ModelError::Linkage { source: LinkageError::InvariantViolation(n), .. } => Some(n),
            ModelError::Module { source: ModuleError::InvariantViolation(n), .. } => Some(n),
            ModelError::Leg { source: LegError::InvalidGeometry(n), .. } => Some(n),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegConfig<T> {
    pub geometry: LegGeometry<T>,
    /// Yaw of the leg base frame in the body frame.
    pub mount_yaw: T,
    /// Origin of the leg base frame (body-coxa joint) in the body frame.
    pub mount_position: [T; 3],
}

impl<T: Real> LegConfig<T> {
    pub fn mount(&self) -> HomogeneousTransform<T> {
        let [x, y, z] = self.mount_position;
        let mut m = HomogeneousTransform::rot_z(self.mount_yaw);
        m.translation = Vector3::new(x, y, z);
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderLimit<T> {
    /// Allowed extension range, meters.
    pub stroke: [T; 2],
    pub max_force: T,
}

/// Stroke and force limits for all 30 cylinders (legs leg-major, folding arm,
/// then `KL, P, Q` per manipulator module) and velocity caps for the 24 joints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorLimits<T> {
    pub cylinders: Vec<CylinderLimit<T>>,
    pub joint_velocity: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassProperties<T> {
    /// Point masses at the midpoint of each folding-arm segment, kg.
    pub fold_segments: [T; 3],
    /// Point masses at the midpoint of each manipulator segment, kg.
    pub manipulator_segments: [T; 3],
    pub payload_capacity: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel<T> {
    pub legs: [LegConfig<T>; NUM_LEGS],
    /// Cylinder linkages of the coxa, femur and tibia joints, shared by all legs.
    /// Each maps the D-H joint angle through its rotation sense.
    pub leg_cylinders: [FoldLinkGeometry<T>; 3],
    pub fold_arm: FoldArm<T>,
    /// Folding-arm base joint `A` in the body frame; the arm works in the body x-z plane.
    pub arm_mount: [T; 3],
    pub manipulator: Manipulator<T>,
    pub limits: ActuatorLimits<T>,
    /// Centre of mass in the body frame.
    pub com_offset: [T; 3],
    pub masses: MassProperties<T>,
}

/// Joint-space snapshot of the whole robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WholeBodyState<T: Real> {
    pub body: HomogeneousTransform<T>,
    pub legs: [LegJointAngles<T>; NUM_LEGS],
    pub arm: [T; 3],
    pub manipulator: [T; 3],
    pub stance: [bool; NUM_LEGS],
}

impl<T: Real> WholeBodyState<T> {
    /// The 24 revolute joint angles: legs, folding arm, manipulator.
    pub fn joint_angles(&self) -> [T; NUM_JOINTS] {
        let mut out = [T::zero(); NUM_JOINTS];
        for (i, leg) in self.legs.iter().enumerate() {
            out[3 * i..3 * i + 3].copy_from_slice(&leg.as_array());
        }
        out[18..21].copy_from_slice(&self.arm);
        out[21..24].copy_from_slice(&self.manipulator);
        out
    }

    pub fn set_joint_angles(&mut self, q: &[T; NUM_JOINTS]) {
        for (i, leg) in self.legs.iter_mut().enumerate() {
            *leg = LegJointAngles::new(q[3 * i], q[3 * i + 1], q[3 * i + 2]);
        }
        self.arm.copy_from_slice(&q[18..21]);
        self.manipulator.copy_from_slice(&q[21..24]);
    }

    /// Applies a generalized displacement: base translation, a world-frame
    /// rotation vector on the base orientation, then joint increments.
    pub fn apply_increment(&self, dq: &DVector<T>) -> Self {
        assert_eq!(dq.len(), NUM_DOF);
        let mut next = *self;
        next.body.translation += Vector3::new(dq[0], dq[1], dq[2]);
        let w = Vector3::new(dq[3], dq[4], dq[5]);
        next.body.rotation = rotation_exp(&w) * self.body.rotation;
        let mut q = self.joint_angles();
        for (qi, d) in q.iter_mut().zip(dq.iter().skip(6)) {
            *qi += *d;
        }
        next.set_joint_angles(&q);
        next
    }

    pub fn stance_legs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..NUM_LEGS).filter(|&i| self.stance[i])
    }
}

/// Joint axes of the six arm joints (folding arm, then manipulator) and the
/// end-effector frame, all in world coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ArmKinematics<T: Real> {
    pub axes: [JointAxis<T>; 6],
    /// Frame at the folding-arm tip `J` (manipulator base).
    pub fold_tip: HomogeneousTransform<T>,
    pub end_effector: HomogeneousTransform<T>,
}

impl<T: Real> RobotModel<T> {
    /// Synthetic desk-scale robot. No numeric geometry is published for the
    /// real machine; these constants give a reachable, well-conditioned model.
    pub fn desk_scale() -> Self {
        let l = |x: f64| lit::<T>(x);
        let deg = |x: f64| lit::<T>(x.to_radians());
        let leg_geometry = LegGeometry {
            a1: l(0.18),
            a2: l(0.5),
            a3: l(0.5),
            joint_limits: [[l(-0.8), l(0.8)], [l(-0.8), l(1.4)], [l(-3.0), l(0.0)]],
        };
        let mounts = crate::leg::hexagon_mounts(l(0.45), deg(30.0), T::zero());
        let legs = std::array::from_fn(|k| {
            let t = mounts[k].mount.translation;
            LegConfig {
                geometry: leg_geometry,
                mount_yaw: deg(30.0 + 60.0 * k as f64),
                mount_position: [t.x, t.y, t.z],
            }
        });
        let link = |a: f64, b: f64, rest_deg: f64, lo: f64, hi: f64, dir| {
            FoldLinkGeometry::from_triangle(l(a), l(b), deg(rest_deg), [l(lo), l(hi)], dir)
                .expect("built-in linkage constants are consistent")
        };
        use RotationSense::{Clockwise, Counterclockwise};
        let leg_cylinders = [
            link(0.12, 0.30, 90.0, -0.8, 0.8, Counterclockwise),
            link(0.12, 0.35, 90.0, -0.8, 1.4, Counterclockwise),
            // Knee-down angles are negative; the cylinder lengthens as the knee folds.
            link(0.10, 0.40, 5.7, 0.0, 3.0, Clockwise),
        ];
        let fold_arm = FoldArm {
            links: [
                link(0.15, 0.45, 60.0, -0.5, 1.2, Counterclockwise),
                link(0.12, 0.40, 70.0, -0.6, 1.2, Clockwise),
                link(0.10, 0.35, 80.0, -0.8, 1.2, Counterclockwise),
            ],
            segment_lengths: [l(0.55), l(0.45), l(0.25)],
            rest_pitch: [deg(60.0), deg(-90.0), deg(30.0)],
        };
        let module = ModuleGeometry::from_apex_angles(l(0.15), l(0.12), deg(90.0), deg(90.0), [deg(-50.0), deg(50.0)])
            .expect("built-in module constants are consistent");
        let manipulator = Manipulator {
            modules: [module; 3],
            segment_lengths: [l(0.35); 3],
            max_total_pitch: deg(150.0),
        };
        let mut model = Self {
            legs,
            leg_cylinders,
            fold_arm,
            arm_mount: [l(0.30), T::zero(), l(0.25)],
            manipulator,
            limits: ActuatorLimits { cylinders: Vec::new(), joint_velocity: vec![l(2.0); NUM_JOINTS] },
            com_offset: [l(0.10), T::zero(), T::zero()],
            masses: MassProperties {
                fold_segments: [l(25.0), l(20.0), l(10.0)],
                manipulator_segments: [l(8.0), l(8.0), l(6.0)],
                payload_capacity: l(100.0),
            },
        };
        let forces = {
            let mut f = vec![l(20_000.0); 18];
            f.extend([l(40_000.0); 3]);
            f.extend([l(15_000.0); 9]);
            f
        };
        let images = model.extension_images().expect("built-in joint ranges are valid");
        let margin = l(0.005);
        model.limits.cylinders = images
            .iter()
            .zip(forces)
            .map(|([lo, hi], max_force)| CylinderLimit { stroke: [*lo - margin, *hi + margin], max_force })
            .collect();
        model
    }

    pub fn leg_mount(&self, leg: usize) -> HomogeneousTransform<T> {
        self.legs[leg].mount()
    }

    pub fn arm_base(&self) -> HomogeneousTransform<T> {
        let [x, y, z] = self.arm_mount;
        HomogeneousTransform::from_translation(Vector3::new(x, y, z))
    }

    /// Checks every geometric and actuator invariant, naming the first failure.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, leg) in self.legs.iter().enumerate() {
            leg.geometry.validate().map_err(|source| ModelError::Leg { context: format!("legs[{i}]"), source })?;
        }
        for (j, cyl) in self.leg_cylinders.iter().enumerate() {
            cyl.validate()
                .map_err(|source| ModelError::Linkage { context: format!("leg_cylinders[{j}]"), source })?;
            for (i, leg) in self.legs.iter().enumerate() {
                let [lo, hi] = leg.geometry.joint_limits[j];
                let (a, b) = (cyl.coordinate_from_physical(lo), cyl.coordinate_from_physical(hi));
                let [clo, chi] = cyl.joint_limits;
                if a.min(b) < clo || a.max(b) > chi {
                    return Err(ModelError::invariant(
                        "leg cylinder range covers joint limits",
                        format!("legs[{i}] joint {j}"),
                    ));
                }
            }
        }
        self.fold_arm
            .validate()
            .map_err(|source| ModelError::Linkage { context: "fold_arm".into(), source })?;
        self.manipulator
            .validate()
            .map_err(|source| ModelError::Module { context: "manipulator".into(), source })?;
        let lim = &self.limits;
        if lim.cylinders.len() != NUM_CYLINDERS {
            return Err(ModelError::invariant("30 cylinder limits", format!("found {}", lim.cylinders.len())));
        }
        if lim.joint_velocity.len() != NUM_JOINTS {
            return Err(ModelError::invariant("24 joint velocity caps", format!("found {}", lim.joint_velocity.len())));
        }
        if lim.joint_velocity.iter().any(|v| !(*v > T::zero())) {
            return Err(ModelError::invariant("positive joint velocity caps", "limits.joint_velocity"));
        }
        let images = self.extension_images()?;
        for (c, (limit, [lo, hi])) in lim.cylinders.iter().zip(images).enumerate() {
            if !(limit.stroke[0] < limit.stroke[1]) {
                return Err(ModelError::invariant("stroke min below max", format!("cylinder {c}")));
            }
            if !(limit.max_force > T::zero()) {
                return Err(ModelError::invariant("positive force cap", format!("cylinder {c}")));
            }
            if lo < limit.stroke[0] || hi > limit.stroke[1] {
                return Err(ModelError::invariant("stroke covers joint range", format!("cylinder {c}")));
            }
        }
        if self.masses.fold_segments.iter().chain(&self.masses.manipulator_segments).any(|m| *m < T::zero())
            || !(self.masses.payload_capacity > T::zero())
        {
            return Err(ModelError::invariant("non-negative masses", "masses"));
        }
        Ok(())
    }

    /// Overall folding-arm envelope at rest against the nominal 950 x 1010 mm
    /// side profile; a soft check, returned as a message.
    pub fn fold_arm_envelope_warning(&self) -> Option<String> {
        let (axes, tip) = self.fold_arm.chain(&HomogeneousTransform::identity(), &[T::zero(); 3]);
        let pts: Vec<Vector3<T>> = axes.iter().map(|a| a.origin).chain([tip.translation]).collect();
        let span = |f: fn(&Vector3<T>) -> T| {
            let v: Vec<f64> = pts.iter().map(|p| to_f64(f(p))).collect();
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        };
        let (dx, dz) = (span(|p| p.x), span(|p| p.z));
        (dx > 0.95 || dz > 1.01).then(|| format!("folding arm rest envelope {dx:.3} m x {dz:.3} m exceeds 0.950 m x 1.010 m"))
    }

    /// Extension range `[min, max]` of every cylinder over its joint limits.
    pub fn extension_images(&self) -> Result<Vec<[T; 2]>, ModelError> {
        let mut out = Vec::with_capacity(NUM_CYLINDERS);
        for (i, leg) in self.legs.iter().enumerate() {
            for (j, cyl) in self.leg_cylinders.iter().enumerate() {
                let [lo, hi] = leg.geometry.joint_limits[j];
                let ends = [cyl.coordinate_from_physical(lo), cyl.coordinate_from_physical(hi)];
                let ctx = || format!("legs[{i}] cylinder {j}");
                let a = fold_extension(cyl, ends[0]).map_err(|source| ModelError::Linkage { context: ctx(), source })?;
                let b = fold_extension(cyl, ends[1]).map_err(|source| ModelError::Linkage { context: ctx(), source })?;
                out.push([a.min(b), a.max(b)]);
            }
        }
        for (j, link) in self.fold_arm.links.iter().enumerate() {
            let ctx = || format!("fold_arm.links[{j}]");
            let [lo, hi] = link.joint_limits;
            let a = fold_extension(link, lo).map_err(|source| ModelError::Linkage { context: ctx(), source })?;
            let b = fold_extension(link, hi).map_err(|source| ModelError::Linkage { context: ctx(), source })?;
            out.push([a, b]);
        }
        for (k, m) in self.manipulator.modules.iter().enumerate() {
            let ctx = || format!("manipulator.modules[{k}]");
            let [lo, hi] = m.joint_limits;
            let wrap = |source| ModelError::Module { context: ctx(), source };
            let p = [
                crate::manipulator::module_primary_extension(m, lo).map_err(wrap)?,
                crate::manipulator::module_primary_extension(m, hi).map_err(wrap)?,
            ];
            let a = [
                crate::manipulator::module_aux_extension(m, lo).map_err(wrap)?,
                crate::manipulator::module_aux_extension(m, hi).map_err(wrap)?,
            ];
            let span = |v: [T; 2]| [v[0].min(v[1]), v[0].max(v[1])];
            out.extend([span(p), span(a), span(a)]);
        }
        Ok(out)
    }

    pub fn foot_in_body(&self, leg: usize, q: &LegJointAngles<T>) -> Vector3<T> {
        self.leg_mount(leg).transform_point(&leg_fk(&self.legs[leg].geometry, q))
    }

    pub fn foot_world(&self, state: &WholeBodyState<T>, leg: usize) -> Vector3<T> {
        state.body.transform_point(&self.foot_in_body(leg, &state.legs[leg]))
    }

    /// Leg angles placing the foot at a world point for the given body pose.
    pub fn leg_ik_world(
        &self,
        body: &HomogeneousTransform<T>,
        leg: usize,
        world: &Vector3<T>,
    ) -> Result<LegJointAngles<T>, LegError> {
        let local = self.leg_mount(leg).inverse().transform_point(&body.inverse().transform_point(world));
        leg_ik(&self.legs[leg].geometry, &local)
    }

    pub fn com_world(&self, state: &WholeBodyState<T>) -> Vector3<T> {
        let [x, y, z] = self.com_offset;
        state.body.transform_point(&Vector3::new(x, y, z))
    }

    pub fn arm_kinematics(&self, state: &WholeBodyState<T>) -> ArmKinematics<T> {
        let base = state.body * self.arm_base();
        let (fold_axes, fold_tip) = self.fold_arm.chain(&base, &state.arm);
        let (manip_axes, end_effector) = self.manipulator.chain(&fold_tip, &state.manipulator);
        ArmKinematics {
            axes: [fold_axes[0], fold_axes[1], fold_axes[2], manip_axes[0], manip_axes[1], manip_axes[2]],
            fold_tip,
            end_effector,
        }
    }

    pub fn end_effector(&self, state: &WholeBodyState<T>) -> HomogeneousTransform<T> {
        self.arm_kinematics(state).end_effector
    }

    /// All 30 cylinder extensions in the canonical order of [`ActuatorLimits`].
    pub fn cylinder_extensions(&self, state: &WholeBodyState<T>) -> Result<[T; NUM_CYLINDERS], ModelError> {
        let mut out = [T::zero(); NUM_CYLINDERS];
        for (i, q) in state.legs.iter().enumerate() {
            for (j, (cyl, theta)) in self.leg_cylinders.iter().zip(q.as_array()).enumerate() {
                out[3 * i + j] = fold_extension(cyl, cyl.coordinate_from_physical(theta))
                    .map_err(|source| ModelError::Linkage { context: format!("legs[{i}] cylinder {j}"), source })?;
            }
        }
        let arm = self
            .fold_arm
            .extensions(&state.arm)
            .map_err(|source| ModelError::Linkage { context: "fold_arm".into(), source })?;
        out[18..21].copy_from_slice(&arm);
        let modules = self
            .manipulator
            .extensions(&state.manipulator)
            .map_err(|source| ModelError::Module { context: "manipulator".into(), source })?;
        for (k, m) in modules.iter().enumerate() {
            out[21 + 3 * k..24 + 3 * k].copy_from_slice(m);
        }
        Ok(out)
    }

    /// Recovers the six arm joint angles from their cylinder extensions
    /// (folding-arm cylinders and manipulator primary cylinders).
    pub fn arm_angles_from_extensions(&self, ext: &[T; NUM_CYLINDERS]) -> Result<[T; 6], ModelError> {
        let mut out = [T::zero(); 6];
        for (j, link) in self.fold_arm.links.iter().enumerate() {
            out[j] = crate::folding_arm::fold_angle_from_extension(link, ext[18 + j])
                .map_err(|source| ModelError::Linkage { context: format!("fold_arm.links[{j}]"), source })?;
        }
        for (k, m) in self.manipulator.modules.iter().enumerate() {
            out[3 + k] = module_angle_from_extension(m, ext[21 + 3 * k])
                .map_err(|source| ModelError::Module { context: format!("manipulator.modules[{k}]"), source })?;
        }
        Ok(out)
    }

    /// Verifies all joint angles are within their limits.
    pub fn check_joint_limits(&self, state: &WholeBodyState<T>) -> Result<(), ModelError> {
        for (i, (leg, q)) in self.legs.iter().zip(&state.legs).enumerate() {
            for (j, (v, [lo, hi])) in q.as_array().iter().zip(&leg.geometry.joint_limits).enumerate() {
                if v < lo || v > hi {
                    return Err(ModelError::Leg {
                        context: format!("legs[{i}]"),
                        source: LegError::JointLimitViolation {
                            joint: j,
                            value: to_f64(*v),
                            min: to_f64(*lo),
                            max: to_f64(*hi),
                        },
                    });
                }
            }
        }
        self.fold_arm
            .check_limits(&state.arm)
            .map_err(|source| ModelError::Linkage { context: "fold_arm".into(), source })?;
        self.manipulator
            .check_limits(&state.manipulator)
            .map_err(|source| ModelError::Module { context: "manipulator".into(), source })?;
        Ok(())
    }

    /// Nominal standing state: body at `body` with every foot placed at
    /// `stance_width` from the body centre along its leg's radial direction,
    /// on the ground plane `z = 0`.
    pub fn standing_state(
        &self,
        body: HomogeneousTransform<T>,
        stance_width: T,
        arm: [T; 3],
        manipulator: [T; 3],
    ) -> Result<WholeBodyState<T>, ModelError> {
        let mut legs = [LegJointAngles::new(T::zero(), T::zero(), T::zero()); NUM_LEGS];
        for (k, q) in legs.iter_mut().enumerate() {
            let foot = self.nominal_foothold(&body, k, stance_width);
            *q = self
                .leg_ik_world(&body, k, &foot)
                .map_err(|source| ModelError::Leg { context: format!("legs[{k}] standing pose"), source })?;
        }
        Ok(WholeBodyState { body, legs, arm, manipulator, stance: [true; NUM_LEGS] })
    }

    /// Ground point at `stance_width` along leg `k`'s radial direction.
    pub fn nominal_foothold(&self, body: &HomogeneousTransform<T>, leg: usize, stance_width: T) -> Vector3<T> {
        let yaw = self.legs[leg].mount_yaw;
        let local = Vector3::new(stance_width * yaw.cos(), stance_width * yaw.sin(), T::zero());
        let mut p = body.transform_point(&local);
        p.z = T::zero();
        p
    }
}

/// Level body frame at `(x, y, z)` with heading `yaw`.
pub fn yaw_body<T: Real>(x: T, y: T, z: T, yaw: T) -> HomogeneousTransform<T> {
    let mut b = HomogeneousTransform::rot_z(yaw);
    b.translation = Vector3::new(x, y, z);
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_is_valid() {
        let m = RobotModel::<f64>::desk_scale();
        m.validate().unwrap();
        assert!(m.fold_arm_envelope_warning().is_none());
    }

    #[test]
    fn zero_angles_give_zero_extensions() {
        let m = RobotModel::<f64>::desk_scale();
        let s = WholeBodyState {
            body: HomogeneousTransform::identity(),
            legs: [LegJointAngles::default(); 6],
            arm: [0.0; 3],
            manipulator: [0.0; 3],
            stance: [true; 6],
        };
        for e in m.cylinder_extensions(&s).unwrap() {
            assert!(e.abs() < 1e-12, "{e}");
        }
    }

    #[test]
    fn standing_state_places_feet_on_ground() {
        let m = RobotModel::<f64>::desk_scale();
        let body = yaw_body(0.2, -0.1, 0.5, 0.3);
        let s = m.standing_state(body, 1.15, [0.0; 3], [0.0; 3]).unwrap();
        for k in 0..6 {
            let f = m.foot_world(&s, k);
            assert!(f.z.abs() < 1e-12);
            assert!((f - m.nominal_foothold(&body, k, 1.15)).norm() < 1e-12);
        }
        m.check_joint_limits(&s).unwrap();
    }

    #[test]
    fn increment_round_trip_on_joints() {
        let m = RobotModel::<f64>::desk_scale();
        let s = m.standing_state(HomogeneousTransform::from_translation(Vector3::new(0.0, 0.0, 0.5)), 1.15, [0.1; 3], [0.0; 3]).unwrap();
        let mut dq = DVector::zeros(NUM_DOF);
        dq[leg_dof(2) + 1] = 0.01;
        dq[ARM_DOF] = -0.02;
        let n = s.apply_increment(&dq);
        assert!((n.legs[2].theta2 - s.legs[2].theta2 - 0.01).abs() < 1e-15);
        assert!((n.arm[0] - 0.08).abs() < 1e-15);
    }

    #[test]
    fn arm_angles_recovered_from_extensions() {
        let m = RobotModel::<f64>::desk_scale();
        let mut s = m.standing_state(HomogeneousTransform::identity(), 1.15, [0.3, 0.2, -0.1], [0.2, -0.3, 0.4]).unwrap();
        s.body.translation.z = 0.5;
        let ext = m.cylinder_extensions(&s).unwrap();
        let back = m.arm_angles_from_extensions(&ext).unwrap();
        let truth = [0.3, 0.2, -0.1, 0.2, -0.3, 0.4];
        for (a, b) in back.iter().zip(truth) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
