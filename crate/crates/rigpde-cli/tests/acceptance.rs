//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process fails when a criterion outside `KNOWN_FAILING` fails, or when a
//! known failure starts passing and the list needs updating.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rigpde::integrate::{RunConfig, RunReport};
use rigpde::largek::{
    appendix_sum_check, tinv_explicit, tinv_norm_bound, uniform_Lk_bound, TridiagSpec, MESH_LIMIT,
    MESH_TARGET,
};
use rigpde::model::{eigenvalue, ModelSpec};
use rigpde::seqspace::{convolve, x_norm};
use rigpde::{CoeffGrid, RigorousScalar};
use rigpde_cli::commands;

/// The appendix constants 0.404 and 0.395 are below the sums they are meant
/// to bound; see `check-appendix`.
const KNOWN_FAILING: &[usize] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn dense_inverse(a: &[f64], n: usize) -> Vec<f64> {
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a[i * n..(i + 1) * n].to_vec();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
            .unwrap();
        m.swap(c, p);
        let piv = m[c][c];
        for v in m[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[i * n..(i + 1) * n].copy_from_slice(&m[i][n..]);
    }
    out
}

/// Dense `𝓛^{(N)}` including the boundary row.
fn boundary_block(mu: f64, n: usize) -> Vec<f64> {
    let m = n + 1;
    let mut l = vec![0.0; m * m];
    l[0] = 1.0;
    for j in 1..m {
        l[j] = if j % 2 == 1 { -2.0 } else { 2.0 };
        l[j * m + j] = 2.0 * j as f64;
        l[j * m + j - 1] = mu;
        if j + 1 < m {
            l[j * m + j + 1] = -mu;
        }
    }
    l
}

fn one_norm(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    match commands::certify_linear(0.0, MESH_LIMIT, MESH_TARGET, commands::thread_count()) {
        Ok(r) => {
            let el = t.elapsed();
            outcome(
                r.success && el <= Duration::from_secs(600),
                format!(
                    "mesh 0..1000 target 1.45: success={} worst={:.5} cells={} time={:.1?}",
                    r.success,
                    r.worst_bound,
                    r.rows.len(),
                    el
                ),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn criterion_2() -> Outcome {
    let cases = [(20.0, 1.712), (200.0, 1.482), (2000.0, 1.455)];
    let mut ok = true;
    let mut got = Vec::new();
    for (mu, want) in cases {
        let v = uniform_Lk_bound(RigorousScalar::point(mu), false);
        let hit = matches!(v, Ok(x) if x == RigorousScalar::point(want));
        ok &= hit;
        got.push(format!("mu={mu}: {:?}", v.map(|x| x.hi())));
    }
    outcome(ok, got.join(", "))
}

fn criterion_3() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut worst_col0 = 0.0f64;
    for _ in 0..50 {
        let mu: f64 = rng.gen_range(0.5..100.0);
        let lo = ((2.0 * mu).ceil() as usize + 2).max(4);
        let n = 2 * rng.gen_range(lo.div_ceil(2)..=100);
        let spec = TridiagSpec::new(mu, n);
        let e = tinv_explicit(&spec);
        let d = dense_inverse(&spec.dense(), n);
        let scale = d.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for (x, y) in e.iter().zip(&d) {
            worst = worst.max((x - y).abs() / y.abs().max(scale * 1e-12));
        }
        let m = n + 1;
        let inv = dense_inverse(&boundary_block(mu, n), m);
        let col0 = inv[0].abs() + 2.0 * (1..m).map(|i| inv[i * m].abs()).sum::<f64>();
        worst_col0 = worst_col0.max((col0 - 1.0).abs());
    }
    outcome(
        worst <= 1e-8 && worst_col0 <= 1e-12,
        format!("50 cases: max rel dev {worst:.2e}, max |col0 - 1| {worst_col0:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for mu in [11.0, 25.0, 50.0, 100.0, 500.0, 2000.0] {
        let n = 2 * (mu as f64).ceil() as usize + 10;
        let norm = one_norm(&tinv_explicit(&TridiagSpec::new(mu, n)), n);
        let bound = tinv_norm_bound(mu).unwrap().lo();
        ok &= norm <= bound;
        parts.push(format!("{mu}:{norm:.4}<={bound:.4}"));
    }
    for mu in [1.0, 2.0, 5.0] {
        let n = 2 * (mu as f64).ceil() as usize + 10;
        let norm = one_norm(&tinv_explicit(&TridiagSpec::new(mu, n)), n);
        let bound = 2.0 * 2f64.sqrt() + 1.0 / (2.0 * mu);
        ok &= norm <= bound;
        parts.push(format!("{mu}:{norm:.4}<={bound:.4}"));
    }
    outcome(ok, parts.join(" "))
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for mu in [10.0, 100.0, 1000.0] {
        match appendix_sum_check(mu) {
            Ok(r) => {
                ok &= r.ok;
                parts.push(format!(
                    "mu={mu}: sum_a={:.4} vs {} sum_ahat={:.4} vs {}",
                    r.sum_a, r.const_a, r.sum_ahat, r.const_ahat
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("mu={mu}: {e}"));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(6);
    let mut violations = 0;
    for _ in 0..1000 {
        let nu: f64 = rng.gen_range(1.0..1.5);
        let mut g = || {
            let (k, n) = (rng.gen_range(1..6), rng.gen_range(0..6));
            let v: Vec<f64> = (0..k * (n + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            CoeffGrid::from_fn(k, n, nu, |i, j| RigorousScalar::point(v[i * (n + 1) + j]))
        };
        let (a, b) = (g(), g());
        if x_norm(&convolve(&a, &b)).lo() > (x_norm(&a) * x_norm(&b)).hi() {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("1000 pairs, {violations} violations"))
}

fn out_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("rigpde-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn prove(cfg: &RunConfig, name: &str) -> Result<(RunReport, Duration, PathBuf), String> {
    let dir = out_dir(name);
    let t = Instant::now();
    let r = commands::prove(cfg, &dir, false).map_err(|e| e.to_string())?;
    Ok((r, t.elapsed(), dir))
}

fn run_summary(r: &RunReport, el: Duration) -> String {
    let rec = r.records();
    format!(
        "steps={} total_time={:.6} r0[1]={:.3e} r0[last]={:.3e} time={:.1?}",
        rec.len(),
        r.total_time,
        rec.first().map_or(f64::NAN, |s| s.r0),
        rec.last().map_or(f64::NAN, |s| s.r0),
        el
    )
}

fn criterion_7(run: &Result<(RunReport, Duration, PathBuf), String>) -> Outcome {
    let (r, el, _) = match run {
        Ok(x) => x,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let rec = r.records();
    let stable = rec.iter().position(|s| s.delta == 1.455).unwrap_or(rec.len());
    let ratios = r.r0_ratios();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for q in ratios.iter().skip(stable) {
        lo = lo.min(*q);
        hi = hi.max(*q);
    }
    let pass = rec.len() >= 30
        && rec[0].r0 <= 5e-13
        && lo >= 1.0
        && hi <= 10.0
        && r.total_time >= 0.015
        && *el <= Duration::from_secs(900);
    outcome(
        pass,
        format!("{} ratios in [{lo:.2}, {hi:.2}] h[1]={:.4e}", run_summary(r, *el), rec[0].h),
    )
}

fn criterion_8(run: &Result<(RunReport, Duration, PathBuf), String>) -> Outcome {
    let (r, el, _) = match run {
        Ok(x) => x,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let rec = r.records();
    let pass = rec.len() >= 30
        && rec[0].r0 <= 5e-15
        && r.total_time >= 0.5
        && *el <= Duration::from_secs(900);
    outcome(pass, run_summary(r, *el))
}

fn criterion_9(runs: &[&Result<(RunReport, Duration, PathBuf), String>]) -> Outcome {
    let mut total = 0;
    let mut bad = Vec::new();
    for run in runs {
        let dir = match run {
            Ok((_, _, d)) => d,
            Err(e) => return outcome(false, format!("run failed: {e}")),
        };
        match commands::replay_dir(dir) {
            Ok(res) => {
                total += res.len();
                bad.extend(res.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n));
            }
            Err(e) => return outcome(false, format!("{}: {e}", dir.display())),
        }
    }
    outcome(
        total > 0 && bad.is_empty(),
        format!("{total} certificates re-read from disk, failing: {bad:?}"),
    )
}

/// Fixed-point reals `v · 2^-P` for the series oracle.
const P: u32 = 320;

fn fx(x: f64) -> BigInt {
    let r = num_rational::BigRational::from_float(x).unwrap() * BigInt::from(2).pow(P);
    r.floor().to_integer()
}

fn fx_mul(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> P
}

fn fx_to_f64(a: &BigInt) -> f64 {
    num_rational::BigRational::new(a.clone(), BigInt::from(2).pow(P))
        .to_f64()
        .unwrap()
}

fn fx_exp(x: &BigInt) -> BigInt {
    let one = BigInt::one() << P;
    let mut term = one.clone();
    let mut sum = one;
    for m in 1..400u32 {
        term = fx_mul(&term, x) / m;
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    sum
}

/// `I_j(z)` by its power series.
fn fx_bessel_i(j: u32, z: &BigInt) -> BigInt {
    let half = z >> 1u32;
    let mut term = BigInt::one() << P;
    for i in 1..=j {
        term = fx_mul(&term, &half) / i;
    }
    let h2 = fx_mul(&half, &half);
    let mut sum = term.clone();
    for m in 1..400u32 {
        term = fx_mul(&term, &h2) / (m * (m + j));
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    sum
}

/// Linear problem `u_t = u_xx + u/2`: every mode is `b_k e^{λ_k t}`, and over
/// a step `e^{z(τ+1)}` with `z = λh/2` has Chebyshev coefficients `e^z I_j(z)`.
fn criterion_10() -> Outcome {
    let model = ModelSpec::new("linear", vec![0.5, 1.0], vec![]).unwrap();
    let mut cfg = RunConfig::new(model.clone(), vec![1.0, 0.5, -0.25, 0.125], 6, 0.3);
    cfg.max_steps = 6;
    cfg.max_opt_iter = 3;
    let r = match rigpde::integrate::run(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let b0 = cfg.initial_data();
    let jmax = 80u32;
    let mut t = BigInt::zero();
    let mut worst = 0.0f64;
    let mut ok = r.steps.len() == cfg.max_steps;
    for s in &r.steps {
        let h = s.record.h;
        let mut err = BigInt::zero();
        for k in 0..cfg.k_modes {
            let lam = fx(eigenvalue(&model, k));
            let z = fx_mul(&lam, &fx(h)) >> 1u32;
            let amp = fx_mul(&fx(b0.get(k)), &fx_mul(&fx_exp(&fx_mul(&lam, &t)), &fx_exp(&z)));
            let wk: u32 = if k == 0 { 1 } else { 2 };
            for j in 0..=jmax {
                let exact = fx_mul(&amp, &fx_bessel_i(j, &z));
                let num = if (j as usize) <= s.abar.n() {
                    fx(s.abar.get(k, j as usize))
                } else {
                    BigInt::zero()
                };
                let wj: u32 = if j == 0 { 1 } else { 2 };
                err += (exact - num).abs() * (wk * wj);
            }
        }
        let r0 = s.record.r0;
        let e = fx_to_f64(&err);
        ok &= err <= fx(r0);
        worst = worst.max(e / r0);
        t += fx(h);
    }
    outcome(
        ok,
        format!("{} steps, max ‖exact - ā‖/r0 = {worst:.3}", r.steps.len()),
    )
}

fn main() {
    let started = Instant::now();
    let fisher = prove(&RunConfig::fisher_reference(), "fisher");
    let sh = prove(&RunConfig::swift_hohenberg_reference(), "sh");
    let results = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(&fisher),
        criterion_8(&sh),
        criterion_9(&[&fisher, &sh]),
        criterion_10(),
    ];
    let mut unexpected = Vec::new();
    for (i, o) in results.iter().enumerate() {
        let n = i + 1;
        let known = KNOWN_FAILING.contains(&n);
        println!(
            "criterion {n:2}: {}{}  {}",
            if o.pass { "PASS" } else { "FAIL" },
            if known && !o.pass { " (known)" } else { "" },
            o.detail
        );
        if o.pass == known {
            unexpected.push(n);
        }
    }
    let passed = results.iter().filter(|o| o.pass).count();
    println!(
        "acceptance: {passed}/{} criteria pass in {:.1?}",
        results.len(),
        started.elapsed()
    );
    for run in [&fisher, &sh] {
        if let Ok((_, _, d)) = run {
            let _ = std::fs::remove_dir_all(d);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
