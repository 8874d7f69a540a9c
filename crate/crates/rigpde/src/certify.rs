//! Newton–Kantorovich certificate for one step: `δ`, `Y`, `Z(r)`, the radii
//! polynomial `p(r) = r(Z(r) - 1) + Y` and the verified radius `r₀`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::largek::DELTA_TILDE;
use crate::model::{apply_F, mu, StepContext};
use crate::rigor::{add_up, RigorousScalar};
use crate::seqspace::{ell1_norm, nu_pow, x_norm, CoeffGrid, FourierVector};
use crate::smallk::{bound_from_inverse, schedule_start, BlockBound, BlockInverse, SmallkError, N_MAX};

/// `ρ_k` a block must reach before its bound is used.
pub const RHO_TARGET: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub enum CertifyError {
    /// Block `k` could not be certified.
    Block { k: usize, err: SmallkError },
    /// No radius in the scan satisfies `p(r) < 0` and `Z(r) < 1`.
    NoRadius { y: f64, z1: f64 },
}

impl fmt::Display for CertifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyError::Block { k, err } => write!(f, "block k={k}: {err}"),
            CertifyError::NoRadius { y, z1 } => {
                write!(f, "radii polynomial has no verified negative point (Y={y:e}, Z1={z1})")
            }
        }
    }
}

impl core::error::Error for CertifyError {}

/// A certified block together with the verified inverse used for `Y`.
#[derive(Clone, Debug)]
pub struct CertifiedBlock {
    pub bound: BlockBound,
    pub inverse: BlockInverse,
}

/// `δ` and the blocks it was assembled from.
#[derive(Clone, Debug)]
pub struct DeltaBound {
    pub delta: RigorousScalar,
    pub blocks: Vec<CertifiedBlock>,
}

impl DeltaBound {
    pub fn block_bounds(&self) -> Vec<BlockBound> {
        self.blocks.iter().map(|b| b.bound.clone()).collect()
    }
}

/// Certifies one block, doubling `N` from `n_min` until `ρ_k ≤ RHO_TARGET`.
pub fn certify_mode(mu: RigorousScalar, n_min: usize) -> Result<CertifiedBlock, SmallkError> {
    let mut n = n_min.max(schedule_start(mu.mag())).max(4);
    n += n % 2;
    let mut best: Option<CertifiedBlock> = None;
    let mut last_err = SmallkError::CapReached { mu_hi: mu.hi() };
    while n <= N_MAX {
        match BlockInverse::new(mu, n) {
            Ok(inv) => {
                let bound = bound_from_inverse(&inv);
                if bound.valid {
                    let done = bound.rho.hi() <= RHO_TARGET;
                    let better = best
                        .as_ref()
                        .map(|b| bound.norm_bound.hi() < b.bound.norm_bound.hi())
                        .unwrap_or(true);
                    if better {
                        best = Some(CertifiedBlock { bound, inverse: inv });
                    }
                    if done {
                        break;
                    }
                }
            }
            Err(e) => last_err = e,
        }
        n *= 2;
    }
    best.ok_or(last_err)
}

/// `δ = max(max_{k≤k̂} β_k/(1-ρ_k), δ̃)`. `n_min` is a lower bound on the
/// block cut (the Chebyshev support of the residual).
pub fn delta_bound_with(ctx: &StepContext, n_min: usize) -> Result<DeltaBound, CertifyError> {
    let mut blocks = Vec::new();
    let mut d = DELTA_TILDE;
    if let Some(kh) = ctx.khat() {
        for k in 0..=kh {
            let m = mu(ctx, k);
            let mut cb = certify_mode(m, n_min).map_err(|err| CertifyError::Block { k, err })?;
            cb.bound.k = Some(k);
            d = d.max(cb.bound.norm_bound.hi());
            blocks.push(cb);
        }
    }
    Ok(DeltaBound {
        delta: RigorousScalar::point(d),
        blocks,
    })
}

pub fn delta_bound(ctx: &StepContext) -> Result<DeltaBound, CertifyError> {
    delta_bound_with(ctx, 0)
}

/// `Y₀` and `Y = Y₀ + δ r_prev`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YBound {
    pub y0: RigorousScalar,
    pub y: RigorousScalar,
}

/// `Y₀ = Σ_{k≤k̂} w_k ‖A_k F_k‖/(1-ρ_k) + 2δ̃ Σ_{k̂<k≤M} ‖F_k‖ ν^k`, then
/// `Y = Y₀ + δ r_prev`. The blocks of `delta` must cover `k ≤ k̂`.
pub fn y_bound(
    ctx: &StepContext,
    abar: &CoeffGrid<f64>,
    bbar: &FourierVector<f64>,
    r_prev: f64,
    delta: &DeltaBound,
) -> YBound {
    let a = abar.to_rigorous();
    let b = FourierVector::new(
        bbar.coeffs.iter().map(|&v| RigorousScalar::point(v)).collect(),
        bbar.nu,
    );
    let f = apply_F(ctx, &a, &b);
    let mut y0 = 0.0f64;
    let mut tail = RigorousScalar::ZERO;
    for k in 0..f.k_modes() {
        let w = if k == 0 {
            RigorousScalar::ONE
        } else {
            nu_pow(ctx.nu, k) * 2.0
        };
        let row = f.row(k);
        match delta.blocks.get(k) {
            Some(cb) => {
                let yk = block_term(row, cb);
                y0 = add_up(y0, (w * RigorousScalar::point(yk)).hi());
            }
            None => tail += ell1_norm(row) * w,
        }
    }
    let y0 = RigorousScalar::point(y0) + tail * DELTA_TILDE;
    let y0 = RigorousScalar::new(0.0, y0.hi());
    let y = y0 + delta.delta * RigorousScalar::point(r_prev);
    YBound {
        y0,
        y: RigorousScalar::new(0.0, y.hi()),
    }
}

/// `‖A_k F_k‖ / (1 - ρ_k)` with
/// `A_k = [[𝓛^{-1}, -𝓛^{-1} e_0 vΩ^{-1}], [0, Ω^{-1}]]`.
fn block_term(row: &[RigorousScalar], cb: &CertifiedBlock) -> f64 {
    let n = cb.inverse.n;
    let mut head: Vec<RigorousScalar> = vec![RigorousScalar::ZERO; n + 1];
    let mut s = RigorousScalar::ZERO;
    let mut bottom = RigorousScalar::ZERO;
    for (j, &v) in row.iter().enumerate() {
        if j <= n {
            head[j] = v;
        } else {
            // v_j = 2(-1)^j, Ω_j = 2j
            let t = v / RigorousScalar::point(j as f64);
            s += if j % 2 == 0 { t } else { -t };
            bottom += t.abs();
        }
    }
    head[0] -= s;
    let top = cb.inverse.apply_norm_up(&head);
    let one = RigorousScalar::ONE;
    let total = (RigorousScalar::point(top) + bottom) / (one - cb.bound.rho);
    total.hi()
}

/// Norm of `𝚲` on `X_{ν,1}`.
pub fn lambda_op_norm() -> f64 {
    2.0
}

/// Coefficients of `Z(r) = hδγ(r)` with
/// `γ(r) = Σ_j j|q_j| (‖ā‖ + r)^{j-1}`, lowest degree first.
pub fn z_poly(ctx: &StepContext, abar_norm: RigorousScalar, delta: RigorousScalar) -> Vec<RigorousScalar> {
    let q = ctx.model.q();
    let p = ctx.model.degree();
    let mut gamma = vec![RigorousScalar::ZERO; p.max(1)];
    for (j, &qj) in q.iter().enumerate().skip(1) {
        if qj == 0.0 {
            continue;
        }
        let c = RigorousScalar::point(j as f64) * RigorousScalar::point(qj).abs();
        // (s + r)^{j-1} = Σ_i C(j-1, i) s^{j-1-i} r^i
        let mut binom = RigorousScalar::ONE;
        for i in 0..j {
            let term = c * binom * abar_norm.powi((j - 1 - i) as u32);
            gamma[i] += term;
            binom = binom * RigorousScalar::point((j - 1 - i) as f64)
                / RigorousScalar::point((i + 1) as f64);
        }
    }
    // h/2 · ‖𝚲‖ · δ = hδ
    let scale = RigorousScalar::point(ctx.h) * 0.5 * RigorousScalar::point(lambda_op_norm()) * delta;
    gamma.into_iter().map(|g| g * scale).collect()
}

pub fn eval_poly(c: &[RigorousScalar], r: RigorousScalar) -> RigorousScalar {
    let mut acc = RigorousScalar::ZERO;
    for &x in c.iter().rev() {
        acc = acc * r + x;
    }
    acc
}

/// `p(r) = r(Z(r) - 1) + Y`.
pub fn radii_poly(y: RigorousScalar, z: &[RigorousScalar], r: RigorousScalar) -> RigorousScalar {
    r * (eval_poly(z, r) - RigorousScalar::ONE) + y
}

fn eval_mid(c: &[RigorousScalar], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, x| acc * r + x.mid())
}

/// Number of scan points `root·(1 + 2⁻⁶ i)`.
pub const SCAN_POINTS: usize = 512;

/// Smallest scan point `r` with `p(r) < 0` and `Z(r) < 1` verified.
pub fn radii_find(y: RigorousScalar, z: &[RigorousScalar]) -> Result<RigorousScalar, CertifyError> {
    let z1 = z.first().map(|v| v.hi()).unwrap_or(0.0);
    let fail = CertifyError::NoRadius { y: y.hi(), z1 };
    if !(z1 < 1.0) || !y.hi().is_finite() {
        return Err(fail);
    }
    // floating smallest positive root of p, by Newton from below
    let pm = |r: f64| r * (eval_mid(z, r) - 1.0) + y.hi();
    let mut r = y.hi() / (1.0 - z1);
    for _ in 0..50 {
        let h = (r.abs() * 1e-7).max(1e-300);
        let d = (pm(r + h) - pm(r)) / h;
        if !(d < 0.0) {
            break;
        }
        let next = r - pm(r) / d;
        if !(next.is_finite()) || (next - r).abs() <= 1e-15 * r {
            r = if next.is_finite() { next } else { r };
            break;
        }
        r = next;
    }
    let root = r.max(1e-300);
    for i in 0..SCAN_POINTS {
        let cand = root * (1.0 + i as f64 / 64.0);
        let rc = RigorousScalar::point(cand);
        if radii_poly(y, z, rc).hi() < 0.0 && eval_poly(z, rc).hi() < 1.0 {
            return Ok(rc);
        }
    }
    Err(fail)
}

/// Everything needed to re-check one step.
#[derive(Clone, Debug, PartialEq)]
pub struct ProofCertificate {
    pub h: f64,
    pub delta: RigorousScalar,
    pub y0: RigorousScalar,
    pub y: RigorousScalar,
    pub r_prev: f64,
    pub abar_norm: RigorousScalar,
    pub z_coeffs: Vec<RigorousScalar>,
    pub r0: RigorousScalar,
    pub valid: bool,
    /// Existence and uniqueness of the zero in the closed `r₀` ball.
    pub unique: bool,
    pub block_bounds: Vec<BlockBound>,
}

impl ProofCertificate {
    pub fn z1(&self) -> RigorousScalar {
        self.z_coeffs.first().copied().unwrap_or(RigorousScalar::ZERO)
    }

    /// Re-evaluates `p(r₀) < 0` and `Z(r₀) < 1` from the stored fields.
    pub fn replay(&self) -> bool {
        self.r0.lo() > 0.0
            && radii_poly(self.y, &self.z_coeffs, self.r0).hi() < 0.0
            && eval_poly(&self.z_coeffs, self.r0).hi() < 1.0
    }
}

/// Chebyshev support of `F(ā, ·)` for a grid with cut `n`.
pub fn residual_cheb_support(ctx: &StepContext, n: usize) -> usize {
    (n + 1).max(ctx.model.degree() * n + 1)
}

/// Full certificate for `ā` against data `b̄` with radius `bbar.radius`.
pub fn certify_step(
    ctx: &StepContext,
    abar: &CoeffGrid<f64>,
    bbar: &FourierVector<f64>,
) -> Result<ProofCertificate, CertifyError> {
    let delta = delta_bound_with(ctx, residual_cheb_support(ctx, abar.n()))?;
    let yb = y_bound(ctx, abar, bbar, bbar.radius, &delta);
    let anorm = x_norm(abar);
    let z = z_poly(ctx, anorm, delta.delta);
    let r0 = radii_find(yb.y, &z)?;
    let cert = ProofCertificate {
        h: ctx.h,
        delta: delta.delta,
        y0: yb.y0,
        y: yb.y,
        r_prev: bbar.radius,
        abar_norm: anorm,
        z_coeffs: z,
        r0,
        valid: true,
        unique: true,
        block_bounds: delta.block_bounds(),
    };
    debug_assert!(cert.replay());
    Ok(cert)
}
