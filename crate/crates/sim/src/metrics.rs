//! Summary metrics computed from a trajectory log.

use hexwall_core::robot::ActuatorLimits;
use serde::{Deserialize, Serialize};

use crate::log::LogRow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rows: usize,
    pub duration: f64,
    pub min_margin: f64,
    pub mean_margin: f64,
    /// Largest residual seen at each priority level.
    pub max_residual: [f64; 4],
    /// Largest `|force| / cap` over the arm and manipulator cylinders.
    pub max_force_utilization: f64,
    /// Net horizontal body displacement, m.
    pub body_displacement: f64,
    /// Net body yaw, unwrapped, degrees.
    pub body_yaw_deg: f64,
    pub commanded_displacement: f64,
    pub commanded_yaw_deg: f64,
    /// Final body yaw minus final reference yaw, degrees.
    pub final_yaw_error_deg: f64,
    /// Final horizontal distance between body and reference, m.
    pub horizontal_drift: f64,
    /// Spread of body height over the run, m.
    pub body_height_range: f64,
    /// RMS end-effector errors over rows with an end-effector target.
    pub ee_rms_pos_err: f64,
    pub ee_rms_ang_err_deg: f64,
    /// Largest movement of any foot during one of its stance intervals, m.
    pub max_pin_slip: f64,
    pub saturated_ticks: usize,
}

fn unwrap_yaw(rows: &[LogRow]) -> f64 {
    let mut total = 0.0;
    for w in rows.windows(2) {
        let d = w[1].body[5] - w[0].body[5];
        total += (d + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    }
    total
}

fn max_pin_slip(rows: &[LogRow]) -> f64 {
    let mut worst: f64 = 0.0;
    for leg in 0..6 {
        let mut anchor: Option<[f64; 3]> = None;
        for r in rows {
            if !r.stance[leg] {
                anchor = None;
                continue;
            }
            let p = r.feet[leg];
            let a = *anchor.get_or_insert(p);
            let d = ((p[0] - a[0]).powi(2) + (p[1] - a[1]).powi(2) + (p[2] - a[2]).powi(2)).sqrt();
            worst = worst.max(d);
        }
    }
    worst
}

/// # Panics
/// If `rows` is empty.
pub fn emit_metrics(rows: &[LogRow], limits: &ActuatorLimits<f64>) -> Metrics {
    let (first, last) = (rows.first().expect("empty log"), rows.last().unwrap());
    let n = rows.len() as f64;
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let mean_margin = rows.iter().map(|r| r.margin).sum::<f64>() / n;
    let mut max_residual = [0.0f64; 4];
    for r in rows {
        for (m, v) in max_residual.iter_mut().zip(r.residuals) {
            *m = m.max(v);
        }
    }
    let max_force_utilization = rows
        .iter()
        .flat_map(|r| r.forces.iter().enumerate().map(|(i, f)| f.abs() / limits.cylinders[18 + i].max_force))
        .fold(0.0, f64::max);
    let planar = |a: f64, b: f64| a.hypot(b);
    let tracked: Vec<&LogRow> = rows.iter().filter(|r| r.ee_tracked).collect();
    let rms = |f: &dyn Fn(&LogRow) -> f64| {
        if tracked.is_empty() {
            0.0
        } else {
            (tracked.iter().map(|r| f(r).powi(2)).sum::<f64>() / tracked.len() as f64).sqrt()
        }
    };
    let body_yaw = unwrap_yaw(rows);
    let commanded_yaw = last.reference[2] - first.reference[2];
    let heights = rows.iter().map(|r| r.body[2]);
    let body_height_range = heights.clone().fold(f64::MIN, f64::max) - heights.fold(f64::MAX, f64::min);
    Metrics {
        rows: rows.len(),
        duration: last.time - first.time,
        min_margin,
        mean_margin,
        max_residual,
        max_force_utilization,
        body_displacement: planar(last.body[0] - first.body[0], last.body[1] - first.body[1]),
        body_yaw_deg: body_yaw.to_degrees(),
        commanded_displacement: planar(last.reference[0] - first.reference[0], last.reference[1] - first.reference[1]),
        commanded_yaw_deg: commanded_yaw.to_degrees(),
        final_yaw_error_deg: (body_yaw - commanded_yaw).to_degrees(),
        horizontal_drift: planar(last.body[0] - last.reference[0], last.body[1] - last.reference[1]),
        body_height_range,
        ee_rms_pos_err: rms(&|r| r.ee_pos_err),
        ee_rms_ang_err_deg: rms(&|r| r.ee_ang_err).to_degrees(),
        max_pin_slip: max_pin_slip(rows),
        saturated_ticks: rows.iter().filter(|r| r.saturated).count(),
    }
}
