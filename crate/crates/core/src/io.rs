//! On-disk trajectory layout:
//!
//! ```text
//! <dir>/diagnostics.csv          EnergySnapshot per step
//! <dir>/steps.csv                StepStats per step
//! <dir>/snapshots/u_NNNNNN.csv   field at each stored step
//! <dir>/snapshots/eta_NNNNNN.csv step multiplier (implicit scheme)
//! <dir>/manifest.json            grid, parameters, solver, wall time, inner iterations
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{field_from_csv, field_to_csv, Grid};
use crate::model::{EnergySnapshot, ModelParams};
use crate::steppers::{Snapshot, SolverConfig, StepStats, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub step: usize,
    pub t: f64,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Verbatim copy of the job configuration, when the caller has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub grid: Grid,
    pub params: ModelParams,
    pub solver: SolverConfig,
    pub wall_time_s: f64,
    pub completed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub inner_iterations: Vec<usize>,
    pub snapshots: Vec<SnapshotEntry>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

pub fn diagnostics_csv(traj: &Trajectory) -> String {
    let mut out = String::from(EnergySnapshot::CSV_HEADER);
    out.push('\n');
    for d in &traj.diagnostics {
        out.push_str(&d.csv_row());
        out.push('\n');
    }
    out
}

pub fn steps_csv(traj: &Trajectory) -> String {
    let mut out = String::from(StepStats::CSV_HEADER);
    out.push('\n');
    for s in &traj.steps {
        out.push_str(&s.csv_row());
        out.push('\n');
    }
    out
}

/// Write every artefact of `traj` under `dir` and return the manifest.
pub fn write_trajectory(
    dir: &Path,
    traj: &Trajectory,
    config: Option<serde_json::Value>,
    error: Option<&Error>,
) -> Result<Manifest> {
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(|e| io_err(&snap_dir, e))?;
    write(&dir.join("diagnostics.csv"), &diagnostics_csv(traj))?;
    write(&dir.join("steps.csv"), &steps_csv(traj))?;
    let mut entries = Vec::with_capacity(traj.snapshots.len());
    for s in &traj.snapshots {
        let file = format!("snapshots/u_{:06}.csv", s.step);
        write(&dir.join(&file), &field_to_csv(&traj.grid, &s.u)?)?;
        let multiplier_file = match &s.multiplier {
            Some(m) => {
                let f = format!("snapshots/eta_{:06}.csv", s.step);
                write(&dir.join(&f), &field_to_csv(&traj.grid, m)?)?;
                Some(f)
            }
            None => None,
        };
        entries.push(SnapshotEntry { step: s.step, t: s.t, file, multiplier_file });
    }
    let manifest = Manifest {
        config,
        grid: traj.grid.clone(),
        params: traj.params,
        solver: traj.config.clone(),
        wall_time_s: traj.wall_time_s,
        completed: error.is_none(),
        error: error.map(|e| e.to_string()),
        inner_iterations: traj.inner_iterations(),
        snapshots: entries,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    write(&dir.join("manifest.json"), &json)?;
    Ok(manifest)
}

fn parse_table<T>(text: &str, header: &str, row: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
    }
    lines.filter(|l| !l.trim().is_empty()).map(row).collect()
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    serde_json::from_str(&read(&dir.join("manifest.json"))?).map_err(|e| Error::Parse(format!("manifest: {e}")))
}

/// Reload a trajectory written by [`write_trajectory`].
pub fn load_trajectory(dir: &Path) -> Result<(Trajectory, Manifest)> {
    let manifest = read_manifest(dir)?;
    let diagnostics = parse_table(&read(&dir.join("diagnostics.csv"))?, EnergySnapshot::CSV_HEADER, EnergySnapshot::parse_csv_row)?;
    let steps = parse_table(&read(&dir.join("steps.csv"))?, StepStats::CSV_HEADER, StepStats::parse_csv_row)?;
    if diagnostics.len() != steps.len() || diagnostics.is_empty() {
        return Err(Error::Parse(format!(
            "diagnostics.csv has {} rows but steps.csv has {}",
            diagnostics.len(),
            steps.len()
        )));
    }
    let g = &manifest.grid;
    let load_field = |file: &str| -> Result<_> {
        let (fg, u) = field_from_csv(&read(&dir.join(file))?)?;
        if fg.len() != g.len() || fg.dim() != g.dim() {
            return Err(Error::Parse(format!("{file} does not match the manifest grid")));
        }
        g.validate(&u)?;
        Ok(u)
    };
    let mut snapshots = Vec::with_capacity(manifest.snapshots.len());
    for e in &manifest.snapshots {
        let multiplier = e.multiplier_file.as_deref().map(load_field).transpose()?;
        snapshots.push(Snapshot { step: e.step, t: e.t, u: load_field(&e.file)?, multiplier });
    }
    let u0 = match snapshots.first() {
        Some(s) if s.step == 0 => s.u.clone(),
        _ => return Err(Error::Parse("the first snapshot must be the initial field".into())),
    };
    let traj = Trajectory {
        grid: manifest.grid.clone(),
        params: manifest.params,
        config: manifest.solver.clone(),
        u0,
        diagnostics,
        steps,
        snapshots,
        wall_time_s: manifest.wall_time_s,
    };
    Ok((traj, manifest))
}
