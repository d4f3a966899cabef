//! On-disk artifacts: snapshot binaries, run metadata, CSV reports.
//!
//! Snapshot layout: raw little-endian float64, row-major over the grid,
//! then state components within each point — the same layout as
//! [`Field::values`]. Metadata names every emitted file, so identical
//! configs and seeds produce byte-identical artifact sets.

use crate::config::RunConfig;
use crate::grid::{Field, GridSpec};
use crate::kernel::KernelSpec;
use crate::regions::AuditReport;
use crate::splitting::{ConvergenceTable, Trajectory};
use crate::{Error, Result};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// 17-significant-digit decimal float, round-trip safe for f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_field(path: &Path, field: &Field) -> Result<()> {
    let mut bytes = Vec::with_capacity(field.values().len() * 8);
    for v in field.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn read_field(path: &Path, grid: GridSpec, state_dim: usize, complex: bool) -> Result<Field> {
    let bytes = std::fs::read(path)?;
    let expected = grid.len() * state_dim * 8;
    if bytes.len() != expected {
        return Err(Error::Data(format!(
            "snapshot {} holds {} bytes, expected {expected}",
            path.display(),
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunked by 8")))
        .collect();
    Field::from_values(grid, state_dim, complex, values)
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotEntry {
    pub index: usize,
    pub time: f64,
    pub file: String,
}

/// Run metadata document; field order is fixed for byte-stable output.
#[derive(Debug, Serialize)]
pub struct RunMetadata<'a> {
    pub format_version: u32,
    pub grid: &'a GridSpec,
    pub kernel: &'a [KernelSpec],
    pub model: String,
    pub state_dim: usize,
    pub complex: bool,
    pub schedule_h: f64,
    pub schedule_steps: usize,
    pub total_time: f64,
    pub seed: u64,
    pub snapshots: Vec<SnapshotEntry>,
    pub half_snapshots: Vec<SnapshotEntry>,
    pub sup_norm: &'a [f64],
    /// (left band, right band) state means per snapshot, when the
    /// asymptote probe is active.
    pub boundary_band_means: Option<&'a [(Vec<f64>, Vec<f64>)]>,
    pub files: Vec<String>,
    pub config: &'a RunConfig,
}

pub const METADATA_FILE: &str = "metadata.json";
pub const SUPNORM_FILE: &str = "supnorm.csv";
pub const AUDIT_FILE: &str = "audit.json";
pub const ASYMPTOTE_FILE: &str = "asymptote.csv";
pub const CONVERGENCE_FILE: &str = "converge.csv";
pub const KERNEL_TABLE_FILE: &str = "kernel_table.csv";

pub fn snapshot_file_name(index: usize) -> String {
    format!("snapshot_{index:06}.bin")
}

pub fn half_snapshot_file_name(index: usize) -> String {
    format!("half_snapshot_{index:06}.bin")
}

/// Write all snapshot binaries of a trajectory into `dir`.
pub fn write_snapshots(dir: &Path, traj: &Trajectory) -> Result<(Vec<SnapshotEntry>, Vec<SnapshotEntry>)> {
    let mut entries = Vec::with_capacity(traj.snapshots.len());
    for (k, field) in traj.snapshots.iter().enumerate() {
        let name = snapshot_file_name(k);
        write_field(&dir.join(&name), field)?;
        entries.push(SnapshotEntry { index: k, time: traj.times[k], file: name });
    }
    let mut half_entries = Vec::new();
    if let Some(halves) = &traj.half_snapshots {
        for (k, field) in halves.iter().enumerate() {
            let name = half_snapshot_file_name(k + 1);
            write_field(&dir.join(&name), field)?;
            half_entries.push(SnapshotEntry {
                index: k + 1,
                time: traj.times[k + 1] - 0.5 * (traj.times[k + 1] - traj.times[k]),
                file: name,
            });
        }
    }
    Ok((entries, half_entries))
}

pub fn write_metadata(dir: &Path, meta: &RunMetadata) -> Result<PathBuf> {
    let path = dir.join(METADATA_FILE);
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn write_supnorm_csv(dir: &Path, times: &[f64], sup: &[f64]) -> Result<PathBuf> {
    let path = dir.join(SUPNORM_FILE);
    let mut out = String::from("time,sup_norm\n");
    for (t, s) in times.iter().zip(sup) {
        out.push_str(&format!("{},{}\n", format_float(*t), format_float(*s)));
    }
    std::fs::write(&path, out)?;
    Ok(path)
}

/// Audit report as JSON: per snapshot {time, worst_margin,
/// worst_point_index, pass}.
pub fn write_audit(dir: &Path, report: &AuditReport) -> Result<PathBuf> {
    let path = dir.join(AUDIT_FILE);
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Deviation series CSV: time, ode_value per component, band deviations,
/// tail-mass bound.
pub fn write_deviation_csv(
    dir: &Path,
    series: &crate::asymptotics::DeviationSeries,
) -> Result<PathBuf> {
    let path = dir.join(ASYMPTOTE_FILE);
    let m = series.ode_values.first().map_or(0, |z| z.len());
    let mut out = String::from("time");
    for c in 0..m {
        out.push_str(&format!(",ode_value_{c}"));
    }
    out.push_str(",band_mean_dev,band_max_dev,tail_mass_bound\n");
    for i in 0..series.times.len() {
        out.push_str(&format_float(series.times[i]));
        for c in 0..m {
            out.push(',');
            out.push_str(&format_float(series.ode_values[i][c]));
        }
        out.push_str(&format!(
            ",{},{},{}\n",
            format_float(series.band_mean_dev[i]),
            format_float(series.band_max_dev[i]),
            format_float(series.tail_mass_bound[i]),
        ));
    }
    std::fs::write(&path, out)?;
    Ok(path)
}

/// Convergence study CSV: h, sup_error, order_estimate (blank on the
/// first row).
pub fn write_convergence_csv(dir: &Path, table: &ConvergenceTable) -> Result<PathBuf> {
    let path = dir.join(CONVERGENCE_FILE);
    let mut out = String::from("h,sup_error,order_estimate\n");
    for row in &table.rows {
        let order = row.order.map(format_float).unwrap_or_default();
        out.push_str(&format!("{},{},{order}\n", format_float(row.h), format_float(row.error)));
    }
    std::fs::write(&path, out)?;
    Ok(path)
}

/// One kernel-table row: x, g_β(x), G_{σ,β}(t, x).
pub struct KernelTableRow {
    pub x: f64,
    pub density: f64,
    pub heat: f64,
}

/// Kernel table CSV with a trailing `mass,<trapezoid estimate>` footer row.
pub fn write_kernel_table(dir: &Path, rows: &[KernelTableRow], mass: f64) -> Result<PathBuf> {
    let path = dir.join(KERNEL_TABLE_FILE);
    let mut file = std::fs::File::create(&path)?;
    writeln!(file, "x,g_beta,G")?;
    for row in rows {
        writeln!(
            file,
            "{},{},{}",
            format_float(row.x),
            format_float(row.density),
            format_float(row.heat)
        )?;
    }
    writeln!(file, "mass,{}", format_float(mass))?;
    Ok(path)
}
