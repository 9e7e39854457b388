//! `diagnostics.csv`, `snapshots.csv` and `report.json`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernel::weighted_integrals;

use super::experiment::RunReport;

pub const DIAGNOSTICS_HEADER: [&str; 10] = [
    "t", "dt", "f_max", "f_min", "H_max", "A2_max", "area", "phi_max", "f_mass", "drive",
];
pub const SNAPSHOTS_HEADER: [&str; 4] = ["t", "node", "angle", "r"];

/// Formats with 12 significant digits like C's `%.12g`; non-finite values become empty.
pub fn format_sig12(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    Error::io(path, source)
}

fn write_diagnostics(report: &RunReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(DIAGNOSTICS_HEADER).map_err(|e| csv_error(path, e))?;
    if let Some(art) = &report.artifacts {
        let snaps = &art.series.snapshots;
        let mut next = 0;
        for d in &art.series.diagnostics {
            let mut kernel = (f64::NAN, f64::NAN);
            while next < snaps.len() && snaps[next].t < d.t {
                next += 1;
            }
            if next < snaps.len() && snaps[next].t == d.t && d.t < art.kernel_point.s {
                let w = weighted_integrals(&snaps[next].shape, d.t, &art.kernel_point)?;
                kernel = (w.f_mass, w.drive);
            }
            let phi = art.phi_b.map_or(f64::NAN, |b| d.log_a2f2_max - b * d.t);
            let row = [
                d.t, d.dt, d.f_max, d.f_min, d.h_max, d.a2_max, d.area, phi, kernel.0, kernel.1,
            ];
            w.write_record(row.iter().map(|x| format_sig12(*x)))
                .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_snapshots(report: &RunReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(SNAPSHOTS_HEADER).map_err(|e| csv_error(path, e))?;
    if let Some(art) = &report.artifacts {
        for snap in &art.series.snapshots {
            let grid = snap.shape.grid();
            for (i, r) in snap.shape.radius().into_iter().enumerate() {
                w.write_record([
                    format_sig12(snap.t),
                    i.to_string(),
                    format_sig12(grid.angle(i)),
                    format_sig12(r),
                ])
                .map_err(|e| csv_error(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn report_json(report: &RunReport) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    Ok(text)
}

/// Writes the three output files into `dir` (created if missing) and returns their paths.
pub fn emit_outputs(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let diagnostics = dir.join("diagnostics.csv");
    let snapshots = dir.join("snapshots.csv");
    let json = dir.join("report.json");
    write_diagnostics(report, &diagnostics)?;
    write_snapshots(report, &snapshots)?;
    fs::write(&json, report_json(report)?).map_err(|e| Error::io(&json, e))?;
    Ok(vec![diagnostics, json, snapshots])
}
