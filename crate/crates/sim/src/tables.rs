//! Extension-versus-angle mapping tables for every joint type.
//!
//! Leg tables use the D-H joint angle; folding-arm and manipulator tables use
//! the joint coordinate. Rows are at whole degrees within the joint limits.

use std::fs;
use std::path::{Path, PathBuf};

use hexwall_core::manipulator::{module_aux_extension, module_primary_extension};
use hexwall_core::{fold_extension, FoldLinkGeometry, LinkageError, ModuleError};

use crate::config::RobotConfig;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Linkage(#[from] LinkageError),
    #[error(transparent)]
    Module(#[from] ModuleError),
}

/// One exported table: file stem, column names and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingTable {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// Whole degrees covering `[lo, hi]` radians.
pub fn degree_grid(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = ((lo.to_degrees() - 1e-9).ceil() as i64, (hi.to_degrees() + 1e-9).floor() as i64);
    (a..=b).map(|d| d as f64).collect()
}

fn fold_table(name: String, link: &FoldLinkGeometry<f64>, limits: [f64; 2], physical: bool) -> Result<MappingTable, TableError> {
    let mut rows = Vec::new();
    for deg in degree_grid(limits[0], limits[1]) {
        let angle = deg.to_radians();
        let theta = if physical { link.coordinate_from_physical(angle) } else { angle };
        rows.push(vec![deg, angle, fold_extension(link, theta)?, link.lever_arm(theta)?]);
    }
    Ok(MappingTable { name, columns: vec!["angle_deg", "angle_rad", "extension_m", "lever_arm_m"], rows })
}

pub fn mapping_tables(config: &RobotConfig) -> Result<Vec<MappingTable>, TableError> {
    let mut out = Vec::new();
    for (j, name) in ["coxa", "femur", "tibia"].iter().enumerate() {
        let limits = config.legs[0].geometry.joint_limits[j];
        out.push(fold_table(format!("leg_{name}"), &config.leg_cylinders[j], limits, true)?);
    }
    for (j, link) in config.fold_arm.links.iter().enumerate() {
        out.push(fold_table(format!("fold_joint{}", j + 1), link, link.joint_limits, false)?);
    }
    for (k, m) in config.manipulator.modules.iter().enumerate() {
        let mut rows = Vec::new();
        for deg in degree_grid(m.joint_limits[0], m.joint_limits[1]) {
            let theta = deg.to_radians();
            let (a, b) = m.lever_arms(theta)?;
            rows.push(vec![deg, theta, module_primary_extension(m, theta)?, module_aux_extension(m, theta)?, a, b]);
        }
        out.push(MappingTable {
            name: format!("module{}", k + 1),
            columns: vec!["angle_deg", "angle_rad", "extension_m", "aux_extension_m", "lever_arm_m", "aux_lever_arm_m"],
            rows,
        });
    }
    Ok(out)
}

pub fn table_csv(table: &MappingTable) -> Result<Vec<u8>, TableError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.into_inner().map_err(|e| TableError::Io { path: "<memory>".into(), source: e.into_error() })
}

/// Writes one CSV per table into `out_dir`, returning the paths.
pub fn export_mapping_tables(config: &RobotConfig, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, TableError> {
    let dir = out_dir.as_ref();
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| TableError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut paths = Vec::new();
    for table in mapping_tables(config)? {
        let path = dir.join(format!("{}.csv", table.name));
        fs::write(&path, table_csv(&table)?).map_err(io(&path))?;
        paths.push(path);
    }
    Ok(paths)
}
