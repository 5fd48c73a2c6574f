//! Per-tick trajectory log and its CSV form.
//!
//! Column order (fixed):
//! `time`, body pose (`body_x body_y body_z body_roll body_pitch body_yaw`),
//! reference body pose (`ref_x ref_y ref_yaw`), 24 joint angles
//! (`leg{i}_q{1..3}`, `arm_q{1..3}`, `manip_q{4..6}`), 30 cylinder extensions
//! (`leg{i}_c{1..3}`, `arm_c{1..3}`, `mod{k}_kl mod{k}_p mod{k}_q`), 12 arm
//! cylinder forces (`f_` prefix), foot positions `foot{i}_{x,y,z}`, stance
//! flags `stance{i}`, `com_x com_y margin`, end-effector pose
//! `ee_x ee_y ee_z ee_roll ee_pitch ee_yaw`, `ee_tracked ee_pos_err ee_ang_err`,
//! priority residuals `res_p0..res_p3`, `vel_scale`, `saturated`.
//! Angles are radians, lengths meters, forces newtons.

use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub time: f64,
    /// Position then roll, pitch, yaw.
    pub body: [f64; 6],
    /// Reference `x, y, yaw` (yaw unwrapped).
    pub reference: [f64; 3],
    pub joints: [f64; 24],
    pub extensions: [f64; 30],
    pub forces: [f64; 12],
    pub feet: [[f64; 3]; 6],
    pub stance: [bool; 6],
    pub com: [f64; 2],
    pub margin: f64,
    pub ee: [f64; 6],
    pub ee_tracked: bool,
    pub ee_pos_err: f64,
    pub ee_ang_err: f64,
    pub residuals: [f64; 4],
    pub vel_scale: f64,
    pub saturated: bool,
}

pub fn header() -> Vec<String> {
    let mut h: Vec<String> = ["time", "body_x", "body_y", "body_z", "body_roll", "body_pitch", "body_yaw", "ref_x", "ref_y", "ref_yaw"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for i in 0..6 {
        h.extend((1..=3).map(|j| format!("leg{i}_q{j}")));
    }
    h.extend((1..=3).map(|j| format!("arm_q{j}")));
    h.extend((4..=6).map(|j| format!("manip_q{j}")));
    let mut cyl = Vec::new();
    for i in 0..6 {
        cyl.extend((1..=3).map(|j| format!("leg{i}_c{j}")));
    }
    let arm_cyl: Vec<String> = (1..=3)
        .map(|j| format!("arm_c{j}"))
        .chain((1..=3).flat_map(|k| ["kl", "p", "q"].map(|c| format!("mod{k}_{c}"))))
        .collect();
    cyl.extend(arm_cyl.iter().cloned());
    h.extend(cyl);
    h.extend(arm_cyl.iter().map(|c| format!("f_{c}")));
    for i in 0..6 {
        h.extend(["x", "y", "z"].map(|a| format!("foot{i}_{a}")));
    }
    h.extend((0..6).map(|i| format!("stance{i}")));
    for s in ["com_x", "com_y", "margin", "ee_x", "ee_y", "ee_z", "ee_roll", "ee_pitch", "ee_yaw", "ee_tracked", "ee_pos_err", "ee_ang_err"] {
        h.push(s.into());
    }
    h.extend((0..4).map(|p| format!("res_p{p}")));
    h.push("vel_scale".into());
    h.push("saturated".into());
    h
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

impl LogRow {
    pub fn record(&self) -> Vec<String> {
        let f = |x: &f64| x.to_string();
        let mut r = vec![f(&self.time)];
        r.extend(self.body.iter().chain(&self.reference).chain(&self.joints).chain(&self.extensions).chain(&self.forces).map(f));
        r.extend(self.feet.iter().flatten().map(f));
        r.extend(self.stance.iter().map(|b| flag(*b)));
        r.extend(self.com.iter().chain([&self.margin]).chain(&self.ee).map(f));
        r.push(flag(self.ee_tracked));
        r.extend([self.ee_pos_err, self.ee_ang_err].iter().chain(&self.residuals).chain([&self.vel_scale]).map(f));
        r.push(flag(self.saturated));
        r
    }
}

pub fn write_csv<W: Write>(rows: &[LogRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header())?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_bytes(rows: &[LogRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory cannot fail");
    buf
}
