//! Subcommand bodies, kept free of argument parsing so tests can drive them.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use rigpde::integrate::{run_with_clock, RunConfig, RunReport};
use rigpde::largek::{appendix_sum_check, AppendixReport};
use rigpde::smallk::{finish_report, mesh_cells, mesh_certify_cell, MeshReport};

use crate::files::{self, Error, StepGrid};

/// Default sampling of `grid.csv` written by `prove`.
pub const DEFAULT_RESOLUTION: (usize, usize) = (9, 33);

/// Worker count from `RIG_THREADS`, else rayon's default.
pub fn thread_count() -> Option<usize> {
    std::env::var("RIG_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs the proof and writes `steps.csv`, `cert_<n>.txt`, `coeffs_<n>.txt`
/// and `grid.csv` into `out`. Files are written even when the run stops early.
pub fn prove(cfg: &RunConfig, out: &Path, verbose: bool) -> Result<RunReport, Error> {
    std::fs::create_dir_all(out)?;
    let t0 = Instant::now();
    let mut clock = || t0.elapsed().as_secs_f64();
    let mut log = |r: &rigpde::integrate::StepRecord| {
        if verbose {
            eprintln!(
                "step {:3}  t={:.6e}  h={:.4e}  N={:2}  delta={:.4}  r0={:.4e}  Z1={:.3}",
                r.index, r.t_start, r.h, r.n_cheb, r.delta, r.r0, r.z1
            );
        }
    };
    let report = run_with_clock(cfg, &mut clock, &mut log)?;
    write_run(&report, out)?;
    Ok(report)
}

pub fn write_run(report: &RunReport, out: &Path) -> Result<(), Error> {
    let records = report.records();
    std::fs::write(out.join("steps.csv"), files::steps_csv(&records))?;
    let mut grids = Vec::new();
    for s in &report.steps {
        let n = s.record.index;
        std::fs::write(files::cert_path(out, n), files::certificate_text(n, &s.certificate))?;
        let g = StepGrid {
            step: n,
            t_start: s.record.t_start,
            h: s.record.h,
            r0: s.record.r0,
            abar: s.abar.clone(),
        };
        std::fs::write(files::coeffs_path(out, n), files::coeffs_text(&g))?;
        grids.push(g);
    }
    let (nt, nx) = DEFAULT_RESOLUTION;
    std::fs::write(out.join("grid.csv"), files::grid_csv(&grids, nt, nx))?;
    Ok(())
}

/// Mesh certification of `[lo, hi]`, one unit cell per task.
pub fn certify_linear(lo: f64, hi: f64, target: f64, threads: Option<usize>) -> Result<MeshReport, Error> {
    if !(0.0 <= lo && lo < hi && hi.is_finite()) {
        return Err(format!("invalid range {lo}..{hi}").into());
    }
    let cells = mesh_cells(lo, hi);
    let work = || -> Vec<MeshReport> {
        cells
            .par_iter()
            .map(|&(a, b)| mesh_certify_cell(a, b, target))
            .collect()
    };
    let parts = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(work),
        None => work(),
    };
    let mut rows = Vec::new();
    for p in parts {
        rows.extend(p.rows);
        if let Some(f) = p.failed {
            return Ok(finish_report(rows, Some(f)));
        }
    }
    Ok(finish_report(rows, None))
}

pub fn check_appendix(mus: &[f64]) -> Result<Vec<AppendixReport>, Error> {
    mus.iter()
        .map(|&m| appendix_sum_check(m).map_err(|e| e.into()))
        .collect()
}

/// Re-samples the `coeffs_<n>.txt` files of a run directory.
pub fn export_grid(dir: &Path, nt: usize, nx: usize) -> Result<String, Error> {
    let found = files::numbered_files(dir, "coeffs_")?;
    if found.is_empty() {
        return Err(format!("no coeffs_<n>.txt files in {}", dir.display()).into());
    }
    let mut grids = Vec::new();
    for (_, p) in found {
        let text = std::fs::read_to_string(&p)?;
        grids.push(files::parse_coeffs(&text).map_err(|e| format!("{}: {e}", p.display()))?);
    }
    Ok(files::grid_csv(&grids, nt, nx))
}

/// Parses every `cert_<n>.txt` in `dir` and replays it.
pub fn replay_dir(dir: &Path) -> Result<Vec<(usize, bool)>, Error> {
    let mut out = Vec::new();
    for (n, p) in files::numbered_files(dir, "cert_")? {
        let (_, c) = files::parse_certificate(&std::fs::read_to_string(&p)?)?;
        out.push((n, c.replay()));
    }
    Ok(out)
}
