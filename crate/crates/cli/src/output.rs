//! CSV snapshots, energy logs and verification reports.
//!
//! Every real is written with 17 significant digits so that reading a file
//! back reproduces the stored `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use vicinal_core::energy::energy_total;
use vicinal_core::spectral::derivative;
use vicinal_core::stepper::Trajectory;
use vicinal_core::verification::{surface_height, AdmissibilityReport, ResidualReport};
use vicinal_core::{BarrierParams, SpectralField};

use crate::error::CliError;

pub const SNAPSHOT_HEADER: &str = "x,u,u_x,u_xx,h";
pub const ENERGY_HEADER: &str = "t,E_total,E_hilbert,F_a,min_slope,lipschitz_ratio,newton_iters";
pub const ENERGY_LOG: &str = "energy.csv";
pub const RESIDUAL_REPORT: &str = "residual_report.csv";
pub const ADMISSIBILITY_REPORT: &str = "admissibility_report.txt";
pub const VERIFY_SUMMARY: &str = "verify_summary.txt";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn snapshot_name(step: usize) -> String {
    format!("snapshot_{step:06}.csv")
}

pub fn snapshot_text(t: f64, u: &SpectralField, p: &BarrierParams) -> String {
    let ux = derivative(u, 1).expect("order 1");
    let uxx = derivative(u, 2).expect("order 2");
    let h = surface_height(u, p);
    let mut out = format!("# t={}\n{SNAPSHOT_HEADER}\n", real(t));
    for (j, (x, height)) in h.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            real(*x),
            real(u.samples()[j]),
            real(ux.samples()[j]),
            real(uxx.samples()[j]),
            real(*height)
        );
    }
    out
}

/// Rows of the energy log, one per stored state. `lipschitz_ratio` is the
/// running maximum of `||u^{n+1} - u^n||_2 / tau`.
pub fn energy_log_text(traj: &Trajectory, p: &BarrierParams) -> String {
    let mut out = format!("{ENERGY_HEADER}\n");
    let mut ratio: f64 = 0.0;
    for (n, u) in traj.states.iter().enumerate() {
        let e = energy_total(u, p);
        let iters = if n == 0 { 0 } else { traj.diagnostics[n - 1].newton_iters };
        if n > 0 {
            ratio = ratio.max(traj.diagnostics[n - 1].increment_norm / traj.tau);
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{iters}",
            real(traj.times[n]),
            real(e.total),
            real(e.hilbert_part),
            real(e.potential_part),
            real(e.min_slope),
            real(ratio)
        );
    }
    out
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One parsed snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub u_x: Vec<f64>,
    pub u_xx: Vec<f64>,
    pub h: Vec<f64>,
}

fn malformed(path: &Path, what: impl Into<String>) -> CliError {
    CliError::Snapshot {
        path: path.to_path_buf(),
        reason: what.into(),
    }
}

pub fn parse_snapshot(path: &Path, step: usize, text: &str) -> Result<Snapshot, CliError> {
    let mut lines = text.lines();
    let t = lines
        .next()
        .and_then(|l| l.strip_prefix("# t="))
        .ok_or_else(|| malformed(path, "first line is not `# t=<time>`"))?
        .trim()
        .parse::<f64>()
        .map_err(|e| malformed(path, format!("time: {e}")))?;
    if lines.next() != Some(SNAPSHOT_HEADER) {
        return Err(malformed(path, format!("second line is not `{SNAPSHOT_HEADER}`")));
    }
    let mut snap = Snapshot {
        step,
        t,
        x: Vec::new(),
        u: Vec::new(),
        u_x: Vec::new(),
        u_xx: Vec::new(),
        h: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        let vals = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| malformed(path, format!("row {}: {e}", i + 1)))?;
        if vals.len() != 5 {
            return Err(malformed(path, format!("row {} has {} columns", i + 1, vals.len())));
        }
        snap.x.push(vals[0]);
        snap.u.push(vals[1]);
        snap.u_x.push(vals[2]);
        snap.u_xx.push(vals[3]);
        snap.h.push(vals[4]);
    }
    Ok(snap)
}

/// Snapshot files in `dir`, ordered by step index.
pub fn list_snapshots(dir: &Path) -> Result<Vec<(usize, PathBuf)>, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut found = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(step) = name
            .strip_prefix("snapshot_")
            .and_then(|s| s.strip_suffix(".csv"))
            .and_then(|s| s.parse::<usize>().ok())
        {
            found.push((step, entry.path()));
        }
    }
    found.sort();
    Ok(found)
}

pub fn residual_report_text(report: &ResidualReport) -> String {
    let mut out = format!(
        "# tau={} n={} max={}\nid,lhs,rhs,residual\n",
        real(report.tau),
        report.n,
        real(report.max)
    );
    for e in &report.entries {
        let _ = writeln!(out, "{},{},{},{}", e.id, real(e.lhs), real(e.rhs), real(e.residual));
    }
    out
}

pub fn admissibility_text(r: &AdmissibilityReport) -> String {
    format!(
        "r_value = {}\nz0_norm = {}\nmin_slope = {}\nverdict = {:?}\n",
        real(r.r_value),
        real(r.z0_norm),
        real(r.min_slope),
        r.verdict
    )
}
