//! Serial-parallel manipulator: three pitch modules, each driven by a primary
//! cylinder `KL` and a pair of auxiliary cylinders `P`, `Q` that act as one
//! virtual cylinder `MR`.
//!
//! Module geometry: rotation centre `O`; `L` and `R` are the fixed cylinder
//! anchors; `K` and `M` ride on the moving plate. Both triangles are
//! isosceles about `O` (`|KO| = |LO|`, `|MO| = |RO|`), which makes the
//! half-angle law-of-sines forms below exact. Extensions are measured as
//! `rest length - current length`.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{self, JointAxis, PitchLink};
use crate::folding_arm::CLOSURE_TOL;
use crate::geometry::HomogeneousTransform;
use crate::scalar::{lit, to_f64, Real};

const SINGULAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModuleError {
    #[error("module angle {value:.9} rad outside [{min:.9}, {max:.9}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("extension {value:.9} m outside the attainable range [{min:.9}, {max:.9}]")]
    ExtensionOutOfRange { value: f64, min: f64, max: f64 },
    #[error("law-of-sines denominator vanishes at {0:.9} rad")]
    Singular(f64),
    #[error("total manipulator pitch {total:.6} rad exceeds {max:.6} rad")]
    TotalPitch { total: f64, max: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuleGeometry<T> {
    pub l_lo: T,
    pub l_ro: T,
    pub l_kl_rest: T,
    pub l_mr_rest: T,
    pub ang_klo: T,
    pub ang_kol: T,
    pub ang_mor: T,
    pub ang_mro: T,
    pub joint_limits: [T; 2],
}

impl<T: Real> ModuleGeometry<T> {
    /// Completes the isosceles triangles from the two apex angles at `O`.
    pub fn from_apex_angles(l_lo: T, l_ro: T, ang_kol: T, ang_mor: T, joint_limits: [T; 2]) -> Result<Self, ModuleError> {
        let half = lit::<T>(0.5);
        let ang_klo = (T::pi() - ang_kol) * half;
        let ang_mro = (T::pi() - ang_mor) * half;
        let g = Self {
            l_lo,
            l_ro,
            l_kl_rest: ang_kol.sin() * l_lo / ang_klo.sin(),
            l_mr_rest: ang_mor.sin() * l_ro / ang_mro.sin(),
            ang_klo,
            ang_kol,
            ang_mor,
            ang_mro,
            joint_limits,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), ModuleError> {
        let tol = lit::<T>(1e-9);
        let half = lit::<T>(0.5);
        if !(self.l_lo > T::zero() && self.l_ro > T::zero()) {
            return Err(ModuleError::InvariantViolation("positive anchor distances"));
        }
        let angles = [self.ang_klo, self.ang_kol, self.ang_mor, self.ang_mro];
        if angles.iter().any(|a| !(*a > T::zero() && *a < T::pi())) {
            return Err(ModuleError::InvariantViolation("rest angles within (0, pi)"));
        }
        if (self.ang_klo - (T::pi() - self.ang_kol) * half).abs() > tol {
            return Err(ModuleError::InvariantViolation("isosceles consistency of KOL"));
        }
        if (self.ang_mro - (T::pi() - self.ang_mor) * half).abs() > tol {
            return Err(ModuleError::InvariantViolation("isosceles consistency of MOR"));
        }
        let closure = lit::<T>(CLOSURE_TOL);
        if (self.l_kl_rest - self.ang_kol.sin() * self.l_lo / self.ang_klo.sin()).abs() > closure {
            return Err(ModuleError::InvariantViolation("law-of-sines closure of KL"));
        }
        if (self.l_mr_rest - self.ang_mor.sin() * self.l_ro / self.ang_mro.sin()).abs() > closure {
            return Err(ModuleError::InvariantViolation("law-of-sines closure of MR"));
        }
        let [lo, hi] = self.joint_limits;
        if !(lo < hi) {
            return Err(ModuleError::InvariantViolation("joint limit order"));
        }
        if !(lo <= T::zero() && T::zero() <= hi) {
            return Err(ModuleError::InvariantViolation("rest pose within joint limits"));
        }
        // Keeps both cylinders on their monotone, non-singular branch.
        if !(self.ang_kol - hi > T::zero() && self.ang_kol - lo < T::pi()) {
            return Err(ModuleError::InvariantViolation("KOL stays within (0, pi) over joint limits"));
        }
        if !(self.ang_mor + lo > T::zero() && self.ang_mor + hi < T::pi()) {
            return Err(ModuleError::InvariantViolation("MOR stays within (0, pi) over joint limits"));
        }
        Ok(())
    }

    fn check(&self, theta: T) -> Result<(), ModuleError> {
        let [lo, hi] = self.joint_limits;
        if theta < lo || theta > hi {
            return Err(ModuleError::OutOfRange { value: to_f64(theta), min: to_f64(lo), max: to_f64(hi) });
        }
        Ok(())
    }

    /// Anchor and moving-point positions at `theta`, in the module plane with
    /// `O` at the origin: `(L, K', R, M')`.
    pub fn rotated_points(&self, theta: T) -> (Vector2<T>, Vector2<T>, Vector2<T>, Vector2<T>) {
        let l = Vector2::new(self.l_lo, T::zero());
        let k_ang = theta - self.ang_kol;
        let k = Vector2::new(k_ang.cos(), k_ang.sin()) * self.l_lo;
        let r = Vector2::new(-self.l_ro, T::zero());
        let m_ang = T::pi() + self.ang_mor + theta;
        let m = Vector2::new(m_ang.cos(), m_ang.sin()) * self.l_ro;
        (l, k, r, m)
    }

    /// `(angle K'LO, angle M'RO)` from the rotated-point geometry.
    pub fn anchor_angles(&self, theta: T) -> Result<(T, T), ModuleError> {
        self.check(theta)?;
        let (l, k, r, m) = self.rotated_points(theta);
        Ok((vertex_angle(&l, &k, &Vector2::zeros()), vertex_angle(&r, &m, &Vector2::zeros())))
    }

    /// Lever arms multiplying `F4` and `F5 + F6` in the module torque.
    pub fn lever_arms(&self, theta: T) -> Result<(T, T), ModuleError> {
        let (klo, mro) = self.anchor_angles(theta)?;
        Ok((klo.sin() * self.l_lo, mro.sin() * self.l_lo))
    }
}

/// Interior angle at `at` of the triangle `(at, a, b)`.
fn vertex_angle<T: Real>(at: &Vector2<T>, a: &Vector2<T>, b: &Vector2<T>) -> T {
    let (u, v) = (a - at, b - at);
    (u.x * v.y - u.y * v.x).abs().atan2(u.dot(&v))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModuleState<T> {
    pub theta4: T,
    pub dl_primary: T,
    pub dl_aux: T,
}

/// `dl_KL = l_KL - sin(KOL - theta) l_LO / sin(theta/2 + KLO)`.
pub fn module_primary_extension<T: Real>(geom: &ModuleGeometry<T>, theta4: T) -> Result<T, ModuleError> {
    geom.check(theta4)?;
    let den = (theta4 * lit(0.5) + geom.ang_klo).sin();
    if den.abs() < lit(SINGULAR_TOL) {
        return Err(ModuleError::Singular(to_f64(theta4)));
    }
    Ok(geom.l_kl_rest - (geom.ang_kol - theta4).sin() * geom.l_lo / den)
}

/// `dl_P = dl_Q = dl_MR = l_MR - sin(MOR + theta) l_RO / sin(MRO - theta/2)`.
pub fn module_aux_extension<T: Real>(geom: &ModuleGeometry<T>, theta4: T) -> Result<T, ModuleError> {
    geom.check(theta4)?;
    let den = (geom.ang_mro - theta4 * lit(0.5)).sin();
    if den.abs() < lit(SINGULAR_TOL) {
        return Err(ModuleError::Singular(to_f64(theta4)));
    }
    Ok(geom.l_mr_rest - (geom.ang_mor + theta4).sin() * geom.l_ro / den)
}

pub fn module_state<T: Real>(geom: &ModuleGeometry<T>, theta4: T) -> Result<ModuleState<T>, ModuleError> {
    Ok(ModuleState {
        theta4,
        dl_primary: module_primary_extension(geom, theta4)?,
        dl_aux: module_aux_extension(geom, theta4)?,
    })
}

/// `T4 = sin(K'LO) F4 l_LO - sin(M'RO) (F5 + F6) l_LO`.
pub fn module_torque<T: Real>(geom: &ModuleGeometry<T>, theta4: T, f4: T, f5: T, f6: T) -> Result<T, ModuleError> {
    let (klo, mro) = geom.anchor_angles(theta4)?;
    Ok(klo.sin() * f4 * geom.l_lo - mro.sin() * (f5 + f6) * geom.l_lo)
}

/// Bisection inverse of [`module_primary_extension`] over the joint limits.
pub fn module_angle_from_extension<T: Real>(geom: &ModuleGeometry<T>, dl_primary: T) -> Result<T, ModuleError> {
    let [mut lo, mut hi] = geom.joint_limits;
    let (f_lo, f_hi) = (module_primary_extension(geom, lo)?, module_primary_extension(geom, hi)?);
    if dl_primary < f_lo || dl_primary > f_hi {
        return Err(ModuleError::ExtensionOutOfRange {
            value: to_f64(dl_primary),
            min: to_f64(f_lo),
            max: to_f64(f_hi),
        });
    }
    let half = lit::<T>(0.5);
    for _ in 0..200 {
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        let f = module_primary_extension(geom, mid)?;
        if f == dl_primary {
            return Ok(mid);
        }
        if f < dl_primary {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (e_lo, e_hi) = (
        (module_primary_extension(geom, lo)? - dl_primary).abs(),
        (module_primary_extension(geom, hi)? - dl_primary).abs(),
    );
    Ok(if e_lo <= e_hi { lo } else { hi })
}

/// Three serially chained modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Manipulator<T> {
    pub modules: [ModuleGeometry<T>; 3],
    /// Rigid segment following each module joint.
    pub segment_lengths: [T; 3],
    /// Bound on `|q4 + q5 + q6|`.
    pub max_total_pitch: T,
}

impl<T: Real> Manipulator<T> {
    pub fn validate(&self) -> Result<(), ModuleError> {
        for m in &self.modules {
            m.validate()?;
        }
        if self.segment_lengths.iter().any(|l| !(*l > T::zero())) {
            return Err(ModuleError::InvariantViolation("positive manipulator segment lengths"));
        }
        if !(self.max_total_pitch > T::zero()) {
            return Err(ModuleError::InvariantViolation("positive total pitch bound"));
        }
        Ok(())
    }

    pub fn pitch_links(&self) -> [PitchLink<T>; 3] {
        std::array::from_fn(|i| PitchLink { offset: T::zero(), sign: T::one(), length: self.segment_lengths[i] })
    }

    pub fn check_limits(&self, q: &[T; 3]) -> Result<(), ModuleError> {
        for (m, qi) in self.modules.iter().zip(q) {
            m.check(*qi)?;
        }
        let total = q[0] + q[1] + q[2];
        if total.abs() > self.max_total_pitch {
            return Err(ModuleError::TotalPitch { total: to_f64(total), max: to_f64(self.max_total_pitch) });
        }
        Ok(())
    }

    pub fn chain(&self, base: &HomogeneousTransform<T>, q: &[T; 3]) -> ([JointAxis<T>; 3], HomogeneousTransform<T>) {
        chain::evaluate(base, &self.pitch_links(), q)
    }

    /// `[dl_KL, dl_P, dl_Q]` for each module.
    pub fn extensions(&self, q: &[T; 3]) -> Result<[[T; 3]; 3], ModuleError> {
        let mut out = [[T::zero(); 3]; 3];
        for ((o, m), qi) in out.iter_mut().zip(&self.modules).zip(q) {
            let s = module_state(m, *qi)?;
            *o = [s.dl_primary, s.dl_aux, s.dl_aux];
        }
        Ok(out)
    }
}

/// Tip frame relative to the manipulator base.
pub fn manipulator_fk<T: Real>(manip: &Manipulator<T>, q: &[T; 3]) -> Result<HomogeneousTransform<T>, ModuleError> {
    manip.check_limits(q)?;
    Ok(manip.chain(&HomogeneousTransform::identity(), q).1)
}

/// Tip position, convenience wrapper.
pub fn manipulator_tip<T: Real>(manip: &Manipulator<T>, q: &[T; 3]) -> Result<Vector3<T>, ModuleError> {
    Ok(manipulator_fk(manip, q)?.translation)
}
