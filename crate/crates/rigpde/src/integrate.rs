//! Approximate solver, step-size heuristic and the multi-step proving driver.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::certify::{certify_step, z_poly, CertifyError, ProofCertificate};
use crate::largek::DELTA_TILDE;
use crate::model::{apply_F_projected, mu, ModelSpec, StepContext};
use crate::rigor::{add_up, RigorousScalar};
use crate::seqspace::{endpoint_trace, x_norm, CoeffGrid, FourierVector};
use crate::smallk::{schedule_start, BlockSolver};

#[derive(Clone, Debug, PartialEq)]
pub enum IntegrateError {
    /// Pseudo-Newton did not settle.
    NoConvergence { residual: f64 },
    /// Last Chebyshev coefficients above the tail tolerance.
    TailTooLarge { n: usize, last: f64 },
    /// Chebyshev cut would exceed the configured cap.
    ChebCap { n: usize },
    /// The proof failed after all retries.
    Proof(CertifyError),
    InvalidConfig(String),
}

impl fmt::Display for IntegrateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrateError::NoConvergence { residual } => {
                write!(f, "pseudo-Newton did not converge (residual {residual:e})")
            }
            IntegrateError::TailTooLarge { n, last } => {
                write!(f, "Chebyshev tail {last:e} too large at N={n}")
            }
            IntegrateError::ChebCap { n } => write!(f, "Chebyshev cut cap {n} reached"),
            IntegrateError::Proof(e) => write!(f, "proof failed: {e}"),
            IntegrateError::InvalidConfig(s) => write!(f, "invalid configuration: {s}"),
        }
    }
}

impl core::error::Error for IntegrateError {}

impl From<CertifyError> for IntegrateError {
    fn from(e: CertifyError) -> Self {
        IntegrateError::Proof(e)
    }
}

/// `Z₁` target of the reference runs. The published step tables follow
/// `r₀` growth `≈ δ/(1 - Z₁) ≈ 2.1`, which pins `Z₁` near 0.3.
pub const REFERENCE_Z1: f64 = 0.3;

/// Run parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    /// `u₀(x) = Σ_k c_k cos(kx)`.
    pub u0: Vec<f64>,
    pub k_modes: usize,
    pub h0: f64,
    pub z1_target: f64,
    pub tol: f64,
    pub shrink: f64,
    pub grow: f64,
    pub max_steps: usize,
    pub nu: f64,
    pub khat: Option<usize>,
    /// Chebyshev cut of the first step.
    pub n_init: usize,
    pub n_min: usize,
    pub n_max: usize,
    /// Heuristic iterations per step.
    pub max_opt_iter: usize,
    /// Threshold for the last two Chebyshev coefficients of every mode.
    pub tail_tol: f64,
    /// `h` factor and count for retries after a failed proof.
    pub retry_factor: f64,
    pub retries: usize,
}

impl RunConfig {
    pub fn new(model: ModelSpec, u0: Vec<f64>, k_modes: usize, h0: f64) -> Self {
        Self {
            model,
            u0,
            k_modes,
            h0,
            z1_target: 0.7,
            tol: 0.01,
            shrink: 0.9,
            grow: 1.01,
            max_steps: 60,
            nu: 1.0,
            khat: None,
            n_init: 17,
            n_min: 8,
            n_max: 64,
            max_opt_iter: 200,
            tail_tol: 1e-13,
            retry_factor: 0.5,
            retries: 3,
        }
    }

    /// Fisher `α = 100`, `u₀ = -0.1 + 0.02cos x - 0.002cos 2x`, `K = 20`.
    pub fn fisher_reference() -> Self {
        let mut c = Self::new(ModelSpec::fisher(100.0), vec![-0.1, 0.02, -0.002], 20, 0.01);
        c.z1_target = REFERENCE_Z1;
        c.max_steps = 35;
        c
    }

    /// Swift–Hohenberg `α = 8.1`, `u₀ = 0.02cos x`, `K = 15`, `k̂ = 5`.
    pub fn swift_hohenberg_reference() -> Self {
        let mut c = Self::new(ModelSpec::swift_hohenberg(8.1), vec![0.0, 0.02], 15, 0.02);
        c.khat = Some(5);
        c.z1_target = REFERENCE_Z1;
        c.max_steps = 35;
        c
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |s: &str| Err(IntegrateError::InvalidConfig(String::from(s)));
        if !(0.0 < self.z1_target && self.z1_target < 1.0) {
            return bad("z1_target must lie in (0, 1)");
        }
        if !(self.shrink < 1.0 && 1.0 < self.grow) {
            return bad("need shrink < 1 < grow");
        }
        if !(self.h0 > 0.0) {
            return bad("h0 must be positive");
        }
        if self.k_modes == 0 {
            return bad("K must be positive");
        }
        if self.nu < 1.0 {
            return bad("nu must be at least 1");
        }
        if self.n_min < 2 || self.n_min > self.n_init || self.n_init > self.n_max {
            return bad("need 2 <= n_min <= n_init <= n_max");
        }
        Ok(())
    }

    /// Initial data `b̄` in the `b_0 + 2Σ b_k cos(kx)` convention.
    pub fn initial_data(&self) -> FourierVector<f64> {
        let coeffs = (0..self.k_modes)
            .map(|k| {
                let c = self.u0.get(k).copied().unwrap_or(0.0);
                if k == 0 {
                    c
                } else {
                    c * 0.5
                }
            })
            .collect();
        FourierVector::new(coeffs, self.nu)
    }

    pub fn context(&self, h: f64, n: usize) -> StepContext {
        let mut ctx = StepContext::new(self.model.clone(), h, self.k_modes, n, self.nu);
        ctx.khat_override = self.khat;
        ctx
    }
}

/// One proved step, in the layout of the result tables.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub index: usize,
    pub t_start: f64,
    pub h: f64,
    pub n_cheb: usize,
    pub delta: f64,
    pub r0: f64,
    pub z1: f64,
    pub y0: f64,
    pub cpu_time: f64,
}

impl StepRecord {
    /// Stored Chebyshev coefficients per mode.
    pub fn cheb_coeffs(&self) -> usize {
        self.n_cheb + 1
    }
}

/// `sup |û - ū|` over the step's slab.
pub fn c0_error(record: &StepRecord) -> f64 {
    record.r0
}

fn max_abs(a: &CoeffGrid<f64>) -> f64 {
    a.entries().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Iterates `a ↦ a - 𝓛⁻¹F(a, b)` on the finite section, then checks the tail.
pub fn pseudo_newton(
    ctx: &StepContext,
    b: &FourierVector<f64>,
    max_iter: usize,
    tail_tol: f64,
) -> Result<CoeffGrid<f64>, IntegrateError> {
    let n = ctx.n;
    let solvers: Vec<BlockSolver> = (0..ctx.k_modes)
        .map(|k| BlockSolver::new(mu(ctx, k).mid(), n))
        .collect();
    let mut a = CoeffGrid::<f64>::zeros(ctx.k_modes, n, ctx.nu);
    let mut last = f64::INFINITY;
    let mut stall = 0usize;
    let mut converged = false;
    for _ in 0..max_iter {
        let f = apply_F_projected(ctx, &a, b);
        let mut step = 0.0f64;
        for (k, s) in solvers.iter().enumerate() {
            let d = s.solve(f.row(k));
            let row = a.row_mut(k);
            for (x, dx) in row.iter_mut().zip(&d) {
                *x -= dx;
                step = step.max(dx.abs());
            }
        }
        if !step.is_finite() || max_abs(&a) > 1e8 {
            return Err(IntegrateError::NoConvergence { residual: step });
        }
        let scale = max_abs(&a).max(1e-300);
        if step <= 4.0 * f64::EPSILON * scale || step == 0.0 {
            converged = true;
            break;
        }
        if step >= last {
            stall += 1;
            if stall > 8 {
                converged = step <= 1e-13 * scale.max(1.0);
                break;
            }
        } else {
            stall = 0;
        }
        last = step;
    }
    if !converged {
        return Err(IntegrateError::NoConvergence { residual: last });
    }
    let mut tail = 0.0f64;
    for k in 0..a.k_modes() {
        for j in n.saturating_sub(1)..=n {
            tail = tail.max(a.get(k, j).abs());
        }
    }
    if tail > tail_tol {
        return Err(IntegrateError::TailTooLarge { n, last: tail });
    }
    Ok(a)
}

/// Solves at `h`, growing `N` by 4 on tail failure up to `cfg.n_max`.
fn solve_adaptive(
    cfg: &RunConfig,
    h: f64,
    b: &FourierVector<f64>,
    n_start: usize,
) -> Result<(CoeffGrid<f64>, usize), IntegrateError> {
    let mut n = n_start;
    loop {
        let ctx = cfg.context(h, n);
        match pseudo_newton(&ctx, b, 2000, cfg.tail_tol) {
            Ok(a) => return Ok((a, n)),
            Err(IntegrateError::TailTooLarge { .. }) if n + 4 <= cfg.n_max => n += 4,
            Err(IntegrateError::TailTooLarge { .. }) => return Err(IntegrateError::ChebCap { n }),
            Err(e) => return Err(e),
        }
    }
}

/// Outcome of [`optimize_h`].
#[derive(Clone, Debug, PartialEq)]
pub struct Tuned {
    pub h: f64,
    pub n: usize,
    pub abar: CoeffGrid<f64>,
    pub z1: f64,
    pub delta: f64,
    pub iterations: usize,
    /// Whether `Z₁` ended inside the target band.
    pub in_band: bool,
}

/// Floating estimate of `δ`: finite-section norms of the blocks `k ≤ k̂`,
/// floored at the large-`k` constant. Steers the heuristic only.
pub fn delta_estimate(ctx: &StepContext) -> f64 {
    let mut d = DELTA_TILDE;
    if let Some(kh) = ctx.khat() {
        for k in 0..=kh {
            let m = mu(ctx, k).mid();
            let s = BlockSolver::new(m, schedule_start(m.abs()).max(ctx.n));
            let norm = |c: Vec<f64>| c[0].abs() + 2.0 * c[1..].iter().map(|v| v.abs()).sum::<f64>();
            let mut op = norm(s.column(0));
            for j in 1..=s.n() {
                op = op.max(0.5 * norm(s.column(j)));
            }
            d = d.max(op);
        }
    }
    d
}

/// `Z₁ = Z(0)` with the estimated `δ` at `h`, and that `δ`.
pub fn z1_at(cfg: &RunConfig, h: f64, n: usize, abar: &CoeffGrid<f64>) -> (f64, f64) {
    let ctx = cfg.context(h, n);
    let d = delta_estimate(&ctx);
    let z = z_poly(&ctx, x_norm(abar), RigorousScalar::point(d));
    (z[0].mid(), d)
}

/// Shrinks by `shrink` while `Z₁` is above the band, grows by `grow` while
/// below, at most `max_opt_iter` rounds.
pub fn optimize_h(
    cfg: &RunConfig,
    b: &FourierVector<f64>,
    h0: f64,
    n_start: usize,
) -> Result<Tuned, IntegrateError> {
    let mut h = h0;
    let mut n = n_start;
    let mut best: Option<Tuned> = None;
    let mut last_err = IntegrateError::NoConvergence { residual: f64::NAN };
    for it in 0..cfg.max_opt_iter {
        let solved = solve_adaptive(cfg, h, b, n).map(|(a, n2)| {
            let (z1, d) = z1_at(cfg, h, n2, &a);
            (a, n2, z1, d)
        });
        match solved {
            Ok((a, n2, z1, d)) => {
                n = n2;
                let in_band = (z1 - cfg.z1_target).abs() <= cfg.tol;
                let t = Tuned {
                    h,
                    n,
                    abar: a,
                    z1,
                    delta: d,
                    iterations: it + 1,
                    in_band,
                };
                if in_band {
                    return Ok(t);
                }
                let below = z1 < cfg.z1_target;
                if below {
                    best = Some(t);
                    h *= cfg.grow;
                } else {
                    h *= cfg.shrink;
                    // an h that overshoots the band is never kept over one below it
                    if best.is_none() {
                        best = Some(t);
                    }
                }
            }
            Err(e) => {
                last_err = e;
                h *= cfg.shrink;
            }
        }
    }
    best.ok_or(last_err)
}

/// Result of one proved step.
#[derive(Clone, Debug)]
pub struct ProvedStep {
    pub record: StepRecord,
    pub certificate: ProofCertificate,
    pub abar: CoeffGrid<f64>,
    /// Data for the next step, radius included.
    pub next: FourierVector<f64>,
}

/// Trace at `τ = 1` with the rounding of the trace added to the radius.
pub fn next_initial_data(abar: &CoeffGrid<f64>, r0: f64) -> FourierVector<f64> {
    let tr = endpoint_trace(&abar.to_rigorous());
    let mids: Vec<f64> = tr.coeffs.iter().map(|v| v.mid()).collect();
    let mut spread = RigorousScalar::ZERO;
    for (k, (v, &m)) in tr.coeffs.iter().zip(&mids).enumerate() {
        let d = (*v - RigorousScalar::point(m)).abs();
        let w = if k == 0 {
            RigorousScalar::ONE
        } else {
            crate::seqspace::nu_pow(abar.nu(), k) * 2.0
        };
        spread += d * w;
    }
    FourierVector::new(mids, abar.nu()).with_radius(add_up(r0, spread.hi()))
}

/// Proves one step at a fixed `h` (no heuristic).
pub fn prove_step_at(
    cfg: &RunConfig,
    b: &FourierVector<f64>,
    h: f64,
    n_start: usize,
) -> Result<ProvedStep, IntegrateError> {
    let (abar, n) = solve_adaptive(cfg, h, b, n_start)?;
    finish_step(cfg, b, h, n, abar)
}

fn finish_step(
    cfg: &RunConfig,
    b: &FourierVector<f64>,
    h: f64,
    n: usize,
    abar: CoeffGrid<f64>,
) -> Result<ProvedStep, IntegrateError> {
    let ctx = cfg.context(h, n);
    let cert = certify_step(&ctx, &abar, b)?;
    let r0 = cert.r0.hi();
    let record = StepRecord {
        index: 0,
        t_start: 0.0,
        h,
        n_cheb: n,
        delta: cert.delta.mid(),
        r0,
        z1: cert.z1().hi(),
        y0: cert.y0.hi(),
        cpu_time: 0.0,
    };
    let next = next_initial_data(&abar, r0);
    Ok(ProvedStep {
        record,
        certificate: cert,
        abar,
        next,
    })
}

/// Heuristic `h`, then the proof; on proof failure `h` is scaled by
/// `retry_factor` up to `retries` times.
pub fn prove_step(
    cfg: &RunConfig,
    b: &FourierVector<f64>,
    h0: f64,
    n_start: usize,
) -> Result<ProvedStep, IntegrateError> {
    let tuned = optimize_h(cfg, b, h0, n_start)?;
    let mut err = match finish_step(cfg, b, tuned.h, tuned.n, tuned.abar) {
        Ok(s) => return Ok(s),
        Err(e) => e,
    };
    let mut h = tuned.h;
    for _ in 0..cfg.retries {
        h *= cfg.retry_factor;
        match prove_step_at(cfg, b, h, tuned.n) {
            Ok(s) => return Ok(s),
            Err(e) => err = e,
        }
    }
    Err(err)
}

/// A full run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub steps: Vec<ProvedStep>,
    pub total_time: f64,
    /// Why the run stopped before `max_steps`, if it did.
    pub stopped: Option<String>,
}

impl RunReport {
    pub fn records(&self) -> Vec<StepRecord> {
        self.steps.iter().map(|s| s.record.clone()).collect()
    }

    /// `r₀(n+1) / r₀(n)`.
    pub fn r0_ratios(&self) -> Vec<f64> {
        self.steps
            .windows(2)
            .map(|w| w[1].record.r0 / w[0].record.r0)
            .collect()
    }
}

/// [`run_with_clock`] without timing.
pub fn run(cfg: &RunConfig) -> Result<RunReport, IntegrateError> {
    run_with_clock(cfg, &mut || 0.0, &mut |_| {})
}

/// Threads the endpoint enclosure forward until failure or `max_steps`.
/// `clock` returns seconds; `on_step` sees each record as it is produced.
pub fn run_with_clock(
    cfg: &RunConfig,
    clock: &mut dyn FnMut() -> f64,
    on_step: &mut dyn FnMut(&StepRecord),
) -> Result<RunReport, IntegrateError> {
    cfg.validate()?;
    let mut b = cfg.initial_data();
    let mut h = cfg.h0;
    let mut n = cfg.n_init;
    let mut t = 0.0;
    let mut steps: Vec<ProvedStep> = Vec::new();
    let mut stopped = None;
    for index in 1..=cfg.max_steps {
        let c0 = clock();
        match prove_step(cfg, &b, h, n) {
            Ok(mut s) => {
                s.record.index = index;
                s.record.t_start = t;
                s.record.cpu_time = clock() - c0;
                on_step(&s.record);
                t += s.record.h;
                h = s.record.h;
                n = s.record.n_cheb;
                let last = (0..s.abar.k_modes())
                    .map(|k| s.abar.get(k, n).abs())
                    .fold(0.0f64, f64::max);
                if last < 1e-15 && n > cfg.n_min {
                    n -= 1;
                }
                b = s.next.clone();
                steps.push(s);
            }
            Err(e) => {
                if steps.is_empty() {
                    return Err(e);
                }
                stopped = Some(format!("step {index}: {e}"));
                break;
            }
        }
    }
    Ok(RunReport {
        steps,
        total_time: t,
        stopped,
    })
}
