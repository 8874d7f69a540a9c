//! On-disk formats: `steps.csv`, `cert_<n>.txt`, `coeffs_<n>.txt`, `grid.csv`, `mesh.csv`.
//!
//! Floats are written twice, as a decimal for reading and as the IEEE bit
//! pattern in hex for exact round trips. Parsers only read the hex form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rigpde::certify::ProofCertificate;
use rigpde::integrate::StepRecord;
use rigpde::seqspace::eval_solution;
use rigpde::smallk::MeshReport;
use rigpde::{CoeffGrid, RigorousScalar};

pub type Error = Box<dyn std::error::Error + Send + Sync>;

pub fn hex(x: f64) -> String {
    format!("0x{:016x}", x.to_bits())
}

pub fn parse_hex(s: &str) -> Result<f64, Error> {
    let t = s.trim();
    let digits = t
        .strip_prefix("0x")
        .ok_or_else(|| format!("expected 0x-prefixed bits, got {t:?}"))?;
    Ok(f64::from_bits(u64::from_str_radix(digits, 16)?))
}

const STEPS_HEADER: &str = "step,t_start,h,n_cheb,delta,r0,z1,y0,cpu_time,\
t_start_hex,h_hex,delta_hex,r0_hex,z1_hex,y0_hex,cpu_time_hex";

pub fn steps_csv(records: &[StepRecord]) -> String {
    let mut s = String::from(STEPS_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{:e},{:e},{},{:e},{:e},{:e},{:e},{:e},{},{},{},{},{},{},{}",
            r.index,
            r.t_start,
            r.h,
            r.n_cheb,
            r.delta,
            r.r0,
            r.z1,
            r.y0,
            r.cpu_time,
            hex(r.t_start),
            hex(r.h),
            hex(r.delta),
            hex(r.r0),
            hex(r.z1),
            hex(r.y0),
            hex(r.cpu_time)
        );
    }
    s
}

pub fn parse_steps_csv(text: &str) -> Result<Vec<StepRecord>, Error> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == STEPS_HEADER => {}
        _ => return Err("steps.csv: unexpected header".into()),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 16 {
            return Err(format!("steps.csv row {}: expected 16 fields", i + 1).into());
        }
        out.push(StepRecord {
            index: f[0].parse()?,
            n_cheb: f[3].parse()?,
            t_start: parse_hex(f[9])?,
            h: parse_hex(f[10])?,
            delta: parse_hex(f[11])?,
            r0: parse_hex(f[12])?,
            z1: parse_hex(f[13])?,
            y0: parse_hex(f[14])?,
            cpu_time: parse_hex(f[15])?,
        });
    }
    Ok(out)
}

fn iv_line(s: &mut String, key: &str, v: RigorousScalar) {
    let _ = writeln!(s, "{key} = {} {} # [{:e}, {:e}]", hex(v.lo()), hex(v.hi()), v.lo(), v.hi());
}

pub fn certificate_text(step: usize, c: &ProofCertificate) -> String {
    let mut s = String::from("# step certificate: p(r0) < 0 and Z(r0) < 1\n");
    let _ = writeln!(s, "step = {step}");
    let _ = writeln!(s, "h = {} # {:e}", hex(c.h), c.h);
    iv_line(&mut s, "delta", c.delta);
    iv_line(&mut s, "y0", c.y0);
    iv_line(&mut s, "y", c.y);
    let _ = writeln!(s, "r_prev = {} # {:e}", hex(c.r_prev), c.r_prev);
    iv_line(&mut s, "abar_norm", c.abar_norm);
    iv_line(&mut s, "r0", c.r0);
    for (i, z) in c.z_coeffs.iter().enumerate() {
        iv_line(&mut s, &format!("z.{i}"), *z);
    }
    let _ = writeln!(s, "valid = {}", c.valid);
    let _ = writeln!(s, "unique = {}", c.unique);
    for b in &c.block_bounds {
        let _ = writeln!(
            s,
            "# block k={} mu=[{:e}, {:e}] N={} rho={:e} bound={:e}",
            b.k.map_or(String::from("-"), |k| k.to_string()),
            b.mu.lo(),
            b.mu.hi(),
            b.n,
            b.rho.hi(),
            b.norm_bound.hi()
        );
    }
    s
}

fn key_values(text: &str) -> Result<BTreeMap<String, String>, Error> {
    let mut m = BTreeMap::new();
    for line in text.lines() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| format!("expected key = value, got {body:?}"))?;
        if m.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(format!("duplicate key {:?}", k.trim()).into());
        }
    }
    Ok(m)
}

fn field<'a>(m: &'a BTreeMap<String, String>, k: &str) -> Result<&'a str, Error> {
    m.get(k).map(|s| s.as_str()).ok_or_else(|| format!("missing field {k:?}").into())
}

fn parse_iv(v: &str) -> Result<RigorousScalar, Error> {
    let mut it = v.split_whitespace();
    let (lo, hi) = match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => (parse_hex(a)?, parse_hex(b)?),
        _ => return Err(format!("expected two hex bounds, got {v:?}").into()),
    };
    Ok(RigorousScalar::try_new(lo, hi)?)
}

fn parse_bool(v: &str) -> Result<bool, Error> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true/false, got {v:?}").into()),
    }
}

/// Certificate and its step number. Block data is not read back.
pub fn parse_certificate(text: &str) -> Result<(usize, ProofCertificate), Error> {
    let m = key_values(text)?;
    let mut z = Vec::new();
    while let Some(v) = m.get(&format!("z.{}", z.len())) {
        z.push(parse_iv(v)?);
    }
    if z.is_empty() {
        return Err("certificate has no Z coefficients".into());
    }
    let cert = ProofCertificate {
        h: parse_hex(field(&m, "h")?)?,
        delta: parse_iv(field(&m, "delta")?)?,
        y0: parse_iv(field(&m, "y0")?)?,
        y: parse_iv(field(&m, "y")?)?,
        r_prev: parse_hex(field(&m, "r_prev")?)?,
        abar_norm: parse_iv(field(&m, "abar_norm")?)?,
        z_coeffs: z,
        r0: parse_iv(field(&m, "r0")?)?,
        valid: parse_bool(field(&m, "valid")?)?,
        unique: parse_bool(field(&m, "unique")?)?,
        block_bounds: Vec::new(),
    };
    Ok((field(&m, "step")?.parse()?, cert))
}

/// Numerical coefficients of one step with the data needed to place it in time.
#[derive(Clone, Debug, PartialEq)]
pub struct StepGrid {
    pub step: usize,
    pub t_start: f64,
    pub h: f64,
    pub r0: f64,
    pub abar: CoeffGrid<f64>,
}

pub fn coeffs_text(g: &StepGrid) -> String {
    let a = &g.abar;
    let mut s = String::from("# Fourier-Chebyshev coefficients, one mode per line\n");
    let _ = writeln!(s, "step = {}", g.step);
    let _ = writeln!(s, "t_start = {} # {:e}", hex(g.t_start), g.t_start);
    let _ = writeln!(s, "h = {} # {:e}", hex(g.h), g.h);
    let _ = writeln!(s, "r0 = {} # {:e}", hex(g.r0), g.r0);
    let _ = writeln!(s, "nu = {} # {}", hex(a.nu()), a.nu());
    let _ = writeln!(s, "k_modes = {}", a.k_modes());
    let _ = writeln!(s, "n = {}", a.n());
    for k in 0..a.k_modes() {
        let row: Vec<String> = a.row(k).iter().map(|&v| hex(v)).collect();
        let _ = writeln!(s, "a.{k} = {}", row.join(" "));
    }
    s
}

pub fn parse_coeffs(text: &str) -> Result<StepGrid, Error> {
    let m = key_values(text)?;
    let k_modes: usize = field(&m, "k_modes")?.parse()?;
    let n: usize = field(&m, "n")?.parse()?;
    let nu = parse_hex(field(&m, "nu")?)?;
    let mut abar = CoeffGrid::zeros(k_modes, n, nu);
    for k in 0..k_modes {
        let row: Vec<f64> = field(&m, &format!("a.{k}"))?
            .split_whitespace()
            .map(parse_hex)
            .collect::<Result<_, _>>()?;
        if row.len() != n + 1 {
            return Err(format!("mode {k}: expected {} coefficients", n + 1).into());
        }
        abar.row_mut(k).copy_from_slice(&row);
    }
    Ok(StepGrid {
        step: field(&m, "step")?.parse()?,
        t_start: parse_hex(field(&m, "t_start")?)?,
        h: parse_hex(field(&m, "h")?)?,
        r0: parse_hex(field(&m, "r0")?)?,
        abar,
    })
}

/// Uniform `(t, x)` samples over `[0, π]`, `nt` times per step (both ends).
pub fn grid_csv(steps: &[StepGrid], nt: usize, nx: usize) -> String {
    let mut s = String::from("step,t,x,u,err,u_hex\n");
    let nt = nt.max(2);
    let nx = nx.max(2);
    for g in steps {
        for i in 0..nt {
            let tau = -1.0 + 2.0 * i as f64 / (nt - 1) as f64;
            let t = g.t_start + 0.5 * g.h * (tau + 1.0);
            for j in 0..nx {
                let x = core::f64::consts::PI * j as f64 / (nx - 1) as f64;
                let u = eval_solution(&g.abar, tau, x);
                let _ = writeln!(s, "{},{:e},{:e},{:e},{:e},{}", g.step, t, x, u, g.r0, hex(u));
            }
        }
    }
    s
}

pub fn mesh_csv(r: &MeshReport) -> String {
    let mut s = String::from("mu_lo,mu_hi,n,rho,bound,ok,mu_lo_hex,mu_hi_hex,bound_hex\n");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{},{},{},{:e},{:e},{},{},{},{}",
            row.lo,
            row.hi,
            row.n,
            row.rho,
            row.bound,
            row.ok,
            hex(row.lo),
            hex(row.hi),
            hex(row.bound)
        );
    }
    s
}

pub fn cert_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("cert_{step}.txt"))
}

pub fn coeffs_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("coeffs_{step}.txt"))
}

/// Files named `<prefix><n>.txt` in `dir`, sorted by `n`.
pub fn numbered_files(dir: &Path, prefix: &str) -> Result<Vec<(usize, PathBuf)>, Error> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir)? {
        let p = e?.path();
        let name = p.file_name().and_then(|s| s.to_str()).unwrap_or("");
        if let Some(n) = name
            .strip_prefix(prefix)
            .and_then(|r| r.strip_suffix(".txt"))
            .and_then(|n| n.parse::<usize>().ok())
        {
            out.push((n, p));
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        for x in [0.0, -0.0, 1.0 / 3.0, f64::MIN_POSITIVE, 1e300, -2.5e-310] {
            assert_eq!(parse_hex(&hex(x)).unwrap().to_bits(), x.to_bits());
        }
        assert!(parse_hex("1.0").is_err());
    }

    #[test]
    fn coeffs_round_trip() {
        let abar = CoeffGrid::from_fn(3, 4, 1.0, |k, j| (k as f64 + 1.0) / (j as f64 + 7.0));
        let g = StepGrid {
            step: 2,
            t_start: 0.1,
            h: 1.0 / 3.0,
            r0: 1e-13,
            abar,
        };
        assert_eq!(parse_coeffs(&coeffs_text(&g)).unwrap(), g);
    }

    #[test]
    fn zero_grid_samples() {
        let g = StepGrid {
            step: 1,
            t_start: 0.0,
            h: 0.5,
            r0: 0.0,
            abar: CoeffGrid::zeros(2, 3, 1.0),
        };
        let csv = grid_csv(&[g], 3, 4);
        assert_eq!(csv.lines().count(), 1 + 12);
        assert!(csv.lines().skip(1).all(|l| l.split(',').nth(3) == Some("0e0")));
    }
}
