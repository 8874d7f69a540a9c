use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rigpde::largek::{MESH_LIMIT, MESH_TARGET};
use rigpde_cli::{commands, config, files};

#[derive(Parser)]
#[command(name = "rigpde", version, about = "Rigorous Fourier-Chebyshev integration of parabolic PDEs")]
struct Cli {
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Prove a multi-step run described by a key=value config file.
    Prove {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Certify the block-inverse bound on a mesh of mu values.
    CertifyLinear {
        /// Range as `lo..hi`.
        range: Option<String>,
        /// Range as `lo,hi`.
        #[arg(long = "range", id = "range_flag", conflicts_with = "range")]
        range_flag: Option<String>,
        #[arg(long, default_value_t = MESH_TARGET)]
        target: f64,
        /// Directory for mesh.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the sums behind the large-mu constants.
    CheckAppendix {
        #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 100.0, 1000.0])]
        mu: Vec<f64>,
    },
    /// Sample the solution stored in a run directory.
    ExportGrid {
        dir: PathBuf,
        #[arg(long, default_value = "9,33")]
        resolution: String,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check every certificate in a run directory.
    Replay { dir: PathBuf },
}

fn parse_pair(s: &str, sep: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(sep)
        .ok_or_else(|| format!("expected two values separated by {sep:?}, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn run(cli: Cli) -> Result<bool, files::Error> {
    match cli.cmd {
        Cmd::Prove { config, out } => {
            let cfg = config::load_config(&config).map_err(|e| e.to_string())?;
            let rep = commands::prove(&cfg, &out, cli.verbose)?;
            println!(
                "{} steps proved, total time {:e}, last r0 {:e}",
                rep.steps.len(),
                rep.total_time,
                rep.steps.last().map_or(0.0, |s| s.record.r0)
            );
            if let Some(why) = &rep.stopped {
                println!("stopped early: {why}");
            }
            Ok(rep.stopped.is_none())
        }
        Cmd::CertifyLinear { range, range_flag, target, out } => {
            let (lo, hi) = match (range, range_flag) {
                (Some(r), _) => parse_pair(&r, "..")?,
                (None, Some(r)) => parse_pair(&r, ",")?,
                (None, None) => (0.0, MESH_LIMIT),
            };
            let t = std::time::Instant::now();
            let rep = commands::certify_linear(lo, hi, target, commands::thread_count())?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("mesh.csv"), files::mesh_csv(&rep))?;
            }
            match rep.failed {
                None if rep.success => println!(
                    "certified mu in [{lo}, {hi}]: bound {:.6} <= {target} over {} cells ({:.1?})",
                    rep.worst_bound,
                    rep.rows.len(),
                    t.elapsed()
                ),
                _ => {
                    let (a, b) = rep.failed.unwrap_or((lo, hi));
                    println!("FAILED on mu in [{a}, {b}] against target {target}");
                }
            }
            Ok(rep.success)
        }
        Cmd::CheckAppendix { mu } => {
            let reps = commands::check_appendix(&mu)?;
            for r in &reps {
                println!("{r}");
            }
            Ok(reps.iter().all(|r| r.ok))
        }
        Cmd::ExportGrid { dir, resolution, out } => {
            let (nt, nx) = parse_pair(&resolution, ",")?;
            let csv = commands::export_grid(&dir, nt as usize, nx as usize)?;
            match out {
                Some(p) => std::fs::write(p, csv)?,
                None => print!("{csv}"),
            }
            Ok(true)
        }
        Cmd::Replay { dir } => {
            let res = commands::replay_dir(&dir)?;
            for (n, ok) in &res {
                println!("cert_{n}: {}", if *ok { "ok" } else { "FAILED" });
            }
            Ok(!res.is_empty() && res.iter().all(|(_, ok)| *ok))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
