//! Computer-assisted bounds on `‖𝓛_k⁻¹‖_{B(ℓ¹)}` for modes with small or
//! negative `μ_k`.
//!
//! The finite block `𝓛_k^{(N)}` is inverted in a verified way and the tail of
//! the operator is handled by the approximate inverse
//! `A_k = [[𝓛^{-1}, -𝓛^{-1}e_0 vΩ^{-1}], [0, Ω^{-1}]]` together with a Neumann
//! series, which gives `‖𝓛_k⁻¹‖ ≤ β_k / (1 - ρ_k)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::rigor::{add_up, dn, iv_gauss_solve, up, RigorError, RigorousMatrix, RigorousScalar};

/// Largest Chebyshev cut tried by the automatic schedules.
pub const N_MAX: usize = 4096;

const U: f64 = f64::EPSILON * 0.5;
// absolute slack covering underflow in a handful of operations
const ETA: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub enum SmallkError {
    OddN(usize),
    TooSmallN(usize),
    /// The verified inverse could not be established.
    Inverse(RigorError),
    /// The schedule reached `N_MAX` without success.
    CapReached { mu_hi: f64 },
}

impl fmt::Display for SmallkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmallkError::OddN(n) => write!(f, "Chebyshev cut N={n} must be even"),
            SmallkError::TooSmallN(n) => write!(f, "Chebyshev cut N={n} must be at least 4"),
            SmallkError::Inverse(e) => write!(f, "block inverse: {e}"),
            SmallkError::CapReached { mu_hi } => write!(
                f,
                "no N <= {N_MAX} certifies the block at mu <= {mu_hi}; use the large-k bounds or reduce h"
            ),
        }
    }
}

impl core::error::Error for SmallkError {}

impl From<RigorError> for SmallkError {
    fn from(e: RigorError) -> Self {
        SmallkError::Inverse(e)
    }
}

/// Certified data for one Fourier block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockBound {
    pub k: Option<usize>,
    pub mu: RigorousScalar,
    pub n: usize,
    pub beta: RigorousScalar,
    pub rho: RigorousScalar,
    /// `β_k / (1 - ρ_k)`; meaningful only when `valid`.
    pub norm_bound: RigorousScalar,
    pub valid: bool,
    /// Enclosure of `‖(𝓛^{(N)})⁻¹ e_0‖_{ℓ¹}`.
    pub col0_norm: RigorousScalar,
    /// Bound on `‖I - C𝓛^{(N)}‖` for the floating inverse `C`.
    pub residual: f64,
}

/// `𝓛_k^{(N)}`: row 0 is `(1, -2, 2, -2, ...)`, row `j` carries
/// `(μ, 2j, -μ)` on columns `j-1, j, j+1`.
pub fn build_block(mu: RigorousScalar, n: usize) -> RigorousMatrix {
    let mut m = RigorousMatrix::zeros(n + 1, n + 1);
    m.set(0, 0, RigorousScalar::ONE);
    for j in 1..=n {
        let s = if j % 2 == 0 { 2.0 } else { -2.0 };
        m.set(0, j, RigorousScalar::point(s));
        m.set(j, j - 1, mu);
        m.set(j, j, RigorousScalar::point(2.0 * j as f64));
        if j < n {
            m.set(j, j + 1, -mu);
        }
    }
    m
}

/// Floating solver for `𝓛^{(N)}(μ) x = r` in O(N): Thomas elimination on the
/// tridiagonal core (pivots `2i + μ²/p_{i-1}` stay positive) and a rank-one
/// correction for the boundary row.
#[derive(Clone, Debug)]
pub struct BlockSolver {
    n: usize,
    mu: f64,
    piv: Vec<f64>,
    cp: Vec<f64>,
    z: Vec<f64>,
    denom: f64,
}

impl BlockSolver {
    pub fn new(mu: f64, n: usize) -> Self {
        let mut piv = vec![0.0; n + 1];
        let mut cp = vec![0.0; n + 1];
        for i in 1..=n {
            let p = if i == 1 {
                2.0
            } else {
                2.0 * i as f64 + mu * mu / piv[i - 1]
            };
            piv[i] = p;
            cp[i] = -mu / p;
        }
        let mut s = Self {
            n,
            mu,
            piv,
            cp,
            z: Vec::new(),
            denom: 1.0,
        };
        let mut e = vec![0.0; n + 1];
        if n >= 1 {
            e[1] = mu;
        }
        let z = s.tri_solve(&e, 1);
        let mut sz = 0.0;
        for (j, &v) in z.iter().enumerate().skip(1) {
            sz += if j % 2 == 0 { 2.0 * v } else { -2.0 * v };
        }
        s.z = z;
        s.denom = 1.0 - sz;
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Solves `T w = r[1..]`; entries of `r` before `first` are taken as 0.
    fn tri_solve(&self, r: &[f64], first: usize) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n + 1];
        let mut prev = 0.0;
        for i in first.max(1)..=n {
            let v = (r[i] - self.mu * prev) / self.piv[i];
            d[i] = v;
            prev = v;
        }
        for i in (1..n).rev() {
            d[i] -= self.cp[i] * d[i + 1];
        }
        d
    }

    /// Approximate solution of `𝓛 x = r`.
    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        let first = r.iter().skip(1).position(|&v| v != 0.0).map(|p| p + 1).unwrap_or(self.n + 1);
        self.solve_from(r, first)
    }

    fn solve_from(&self, r: &[f64], first: usize) -> Vec<f64> {
        let mut w = if first <= self.n {
            self.tri_solve(r, first)
        } else {
            vec![0.0; self.n + 1]
        };
        let mut sw = 0.0;
        for (j, &v) in w.iter().enumerate().skip(1) {
            sw += if j % 2 == 0 { 2.0 * v } else { -2.0 * v };
        }
        let x0 = (r[0] - sw) / self.denom;
        w[0] = x0;
        for j in 1..=self.n {
            w[j] -= x0 * self.z[j];
        }
        w
    }

    /// Column `j` of the floating inverse.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.n + 1];
        e[j] = 1.0;
        self.solve_from(&e, if j == 0 { self.n + 1 } else { j })
    }
}

#[inline]
fn sum_up(terms: f64, count: usize) -> f64 {
    // recursive summation of `count` nonnegative terms: relative error ≤ γ_count
    let g = (count as f64 + 2.0) * U;
    up(up(terms * (1.0 + 2.0 * g)) + (count as f64 + 1.0) * ETA)
}

/// Weighted column norm `|x_0| + 2Σ|x_i|` of a floating vector (upper bound).
fn col_norm_up(x: &[f64]) -> f64 {
    let mut s = x[0].abs();
    for &v in &x[1..] {
        s += 2.0 * v.abs();
    }
    sum_up(s, x.len())
}

fn col_norm_lo(x: &[f64]) -> f64 {
    let mut s = x[0].abs();
    for &v in &x[1..] {
        s += 2.0 * v.abs();
    }
    let g = (x.len() as f64 + 2.0) * U;
    dn(s * (1.0 - 2.0 * g)).max(0.0)
}

/// Verified information about `(𝓛^{(N)}(μ))⁻¹` for every `μ` in an interval.
///
/// With `C` the floating inverse at `mid(μ)` and `ε ≥ ‖I - C𝓛(μ)‖` (operator
/// norm of weighted ℓ¹), every vector obeys
/// `‖𝓛⁻¹v‖ ≤ ‖Cv‖ / (1 - ε)` and `‖𝓛⁻¹v‖ ≥ ‖Cv‖ (1 - 2ε)/(1 - ε)`.
#[derive(Clone, Debug)]
pub struct BlockInverse {
    pub mu: RigorousScalar,
    pub n: usize,
    solver: BlockSolver,
    /// Upper bound of `‖I - C𝓛(μ)‖`.
    pub eps: f64,
    /// `‖C e_0‖` (lower, upper).
    c0: (f64, f64),
    /// `max(‖Ce_0‖, sup ½‖Ce_n‖)` (lower, upper).
    op_c: (f64, f64),
    /// `‖C e_N + C e_0 / (N+2)‖` (lower, upper).
    combo: (f64, f64),
}

impl BlockInverse {
    pub fn new(mu: RigorousScalar, n: usize) -> Result<Self, SmallkError> {
        if n < 2 {
            return Err(SmallkError::TooSmallN(n));
        }
        let m = mu.mid();
        let w = mu.rad();
        let solver = BlockSolver::new(m, n);
        if !(solver.denom.is_finite()) || solver.denom == 0.0 {
            return Err(RigorError::Unverifiable { residual: f64::INFINITY }.into());
        }
        let c0 = solver.column(0);
        let c0_norm = (col_norm_lo(&c0), col_norm_up(&c0));
        let (mut op_lo, mut op_up) = c0_norm;
        let mut eps = 0.0f64;
        let zero = vec![0.0; n + 1];
        let mut prev = zero.clone();
        let mut cur = c0.clone();
        let mut next = solver.column(1);
        for j in 0..=n {
            // column j of 𝓛(m) has s0 in row 0 and (left, diag, right) in rows
            // j-1, j, j+1; (dl, dr) is its derivative in μ
            let (s0, left, diag, right, dl, dr) = if j == 0 {
                (1.0, 0.0, 0.0, m, 0.0, 1.0)
            } else {
                let s = if j % 2 == 0 { 2.0 } else { -2.0 };
                let (l, dl) = if j >= 2 { (-m, -1.0) } else { (0.0, 0.0) };
                let (r, dr) = if j < n { (m, 1.0) } else { (0.0, 0.0) };
                (s, l, 2.0 * j as f64, r, dl, dr)
            };
            let mut acc = 0.0f64;
            for i in 0..=n {
                let p0 = c0[i] * s0;
                let pl = prev[i] * left;
                let pd = cur[i] * diag;
                let pr = next[i] * right;
                let delta = if i == j { 1.0 } else { 0.0 };
                let r = delta - (((p0 + pl) + pd) + pr);
                let mag = p0.abs() + pl.abs() + pd.abs() + pr.abs() + 1.0;
                let deriv = (dl * prev[i] + dr * next[i]).abs();
                // |fl(r) - r| ≤ γ_5 · mag; the spread of μ adds w·|C E e_j|
                let b = r.abs() + 6.0 * U * mag + w * deriv * (1.0 + 4.0 * U) + 4.0 * ETA;
                acc += if i == 0 { b } else { 2.0 * b };
            }
            let acc = sum_up(acc, n + 1);
            let col = if j == 0 { acc } else { up(acc * 0.5) };
            eps = eps.max(col);
            if j >= 1 {
                op_lo = op_lo.max(col_norm_lo(&cur) * 0.5);
                op_up = op_up.max(up(col_norm_up(&cur) * 0.5));
            }
            if j < n {
                prev = core::mem::replace(&mut cur, core::mem::take(&mut next));
                next = if j + 2 <= n { solver.column(j + 2) } else { zero.clone() };
            }
        }
        let col_n = cur;
        if !(eps < 1.0) {
            return Err(RigorError::Unverifiable { residual: eps }.into());
        }
        let sc = RigorousScalar::ONE / RigorousScalar::point((n + 2) as f64);
        let mut combo_iv = RigorousScalar::ZERO;
        for i in 0..=n {
            let v = (RigorousScalar::point(c0[i]) * sc + col_n[i]).abs();
            combo_iv += if i == 0 { v } else { v * 2.0 };
        }
        Ok(Self {
            mu,
            n,
            solver,
            eps,
            c0: c0_norm,
            op_c: (op_lo, op_up),
            combo: (combo_iv.lo(), combo_iv.hi()),
        })
    }

    /// Enclosure of `‖𝓛⁻¹v‖` from `(lower, upper)` bounds of `‖Cv‖`.
    fn lift(&self, c: (f64, f64)) -> RigorousScalar {
        let e = RigorousScalar::point(self.eps);
        let one = RigorousScalar::ONE;
        let up_f = RigorousScalar::point(c.1) / (one - e);
        let lo_f = RigorousScalar::point(c.0) * (one - e * 2.0) / (one - e);
        RigorousScalar::new(lo_f.lo().max(0.0).min(up_f.hi()), up_f.hi())
    }

    /// `‖(𝓛^{(N)})⁻¹ e_0‖`.
    pub fn col0_norm(&self) -> RigorousScalar {
        self.lift(self.c0)
    }

    /// `‖(𝓛^{(N)})⁻¹‖_{B(ℓ¹)}` as the max of the column-0 norm and half the sup of the others.
    pub fn op_norm(&self) -> RigorousScalar {
        self.lift(self.op_c)
    }

    /// `‖(𝓛^{(N)})⁻¹ e_N + (𝓛^{(N)})⁻¹ e_0 / (N+2)‖`.
    pub fn combo_norm(&self) -> RigorousScalar {
        self.lift(self.combo)
    }

    pub fn solver(&self) -> &BlockSolver {
        &self.solver
    }

    /// Upper bound of `‖(𝓛^{(N)}(μ))⁻¹ g‖` for every `μ` and every `g` in the
    /// enclosures, via `x̃ = C mid(g)` and the residual `g - 𝓛x̃`.
    pub fn apply_norm_up(&self, g: &[RigorousScalar]) -> f64 {
        let n = self.n;
        assert_eq!(g.len(), n + 1);
        let gm: Vec<f64> = g.iter().map(|v| v.mid()).collect();
        let x = self.solver.solve(&gm);
        let xi: Vec<RigorousScalar> = x.iter().map(|&v| RigorousScalar::point(v)).collect();
        let mut res = Vec::with_capacity(n + 1);
        let mut r0 = xi[0];
        for j in 1..=n {
            r0 += xi[j] * if j % 2 == 0 { 2.0 } else { -2.0 };
        }
        res.push(g[0] - r0);
        for j in 1..=n {
            let mut lx = self.mu * xi[j - 1] + xi[j] * (2.0 * j as f64);
            if j < n {
                lx -= self.mu * xi[j + 1];
            }
            res.push(g[j] - lx);
        }
        let res_norm = crate::seqspace::ell1_norm(&res).hi();
        let xn = col_norm_up(&x);
        add_up(xn, self.op_norm().hi() * res_norm * (1.0 + 4.0 * U))
    }
}

/// Finite-section bound for one block at Chebyshev cut `N`, closed over the tail.
pub fn certify_block(mu: RigorousScalar, n: usize) -> Result<BlockBound, SmallkError> {
    if n % 2 != 0 {
        return Err(SmallkError::OddN(n));
    }
    if n < 4 {
        return Err(SmallkError::TooSmallN(n));
    }
    let inv = BlockInverse::new(mu, n)?;
    Ok(bound_from_inverse(&inv))
}

/// Assembles `ρ_k`, `β_k` and `β_k / (1 - ρ_k)` from verified column norms.
pub fn bound_from_inverse(inv: &BlockInverse) -> BlockBound {
    let n = inv.n as f64;
    let c0 = inv.col0_norm();
    let opn = inv.op_norm();
    let combo = inv.combo_norm();
    let p = |x: f64| RigorousScalar::point(x);
    let one = RigorousScalar::ONE;
    let rho1 = (c0 + one) / p(n + 1.0);
    let rho2 = combo + one / p(n + 2.0);
    let rho3 = c0 * 2.0 / (p(n + 1.0) * p(n + 3.0)) + one / p(n + 1.0) + one / p(n + 3.0);
    let rho = inv.mu.abs() * 0.5 * rho1.max(rho2).max(rho3);
    let beta = opn.max((c0 + one) / p(2.0 * (n + 1.0)));
    let valid = rho.hi() < 1.0;
    let norm_bound = if valid {
        beta / (one - rho)
    } else {
        RigorousScalar::new(0.0, f64::INFINITY)
    };
    BlockBound {
        k: None,
        mu: inv.mu,
        n: inv.n,
        beta,
        rho,
        norm_bound,
        valid,
        col0_norm: c0,
        residual: inv.eps,
    }
}

/// Same bound with the finite inverse enclosed by dense [`iv_gauss_solve`];
/// O(N³), intended for small `N` and cross-checks.
pub fn certify_block_dense(mu: RigorousScalar, n: usize) -> Result<BlockBound, SmallkError> {
    if n % 2 != 0 {
        return Err(SmallkError::OddN(n));
    }
    let a = build_block(mu, n);
    let x = iv_gauss_solve(&a, &RigorousMatrix::identity(n + 1))?;
    let col = |j: usize| crate::seqspace::ell1_norm(&x.column(j));
    let c0 = col(0);
    let mut opn = c0;
    for j in 1..=n {
        opn = opn.max(col(j) * 0.5);
    }
    let sc = RigorousScalar::ONE / RigorousScalar::point((n + 2) as f64);
    let combo: Vec<RigorousScalar> = (0..=n).map(|i| x.get(i, n) + x.get(i, 0) * sc).collect();
    let combo = crate::seqspace::ell1_norm(&combo);
    let p = |x: f64| RigorousScalar::point(x);
    let one = RigorousScalar::ONE;
    let nf = n as f64;
    let rho1 = (c0 + one) / p(nf + 1.0);
    let rho2 = combo + one / p(nf + 2.0);
    let rho3 = c0 * 2.0 / (p(nf + 1.0) * p(nf + 3.0)) + one / p(nf + 1.0) + one / p(nf + 3.0);
    let rho = mu.abs() * 0.5 * rho1.max(rho2).max(rho3);
    let beta = opn.max((c0 + one) / p(2.0 * (nf + 1.0)));
    let valid = rho.hi() < 1.0;
    let norm_bound = if valid {
        beta / (one - rho)
    } else {
        RigorousScalar::new(0.0, f64::INFINITY)
    };
    Ok(BlockBound {
        k: None,
        mu,
        n,
        beta,
        rho,
        norm_bound,
        valid,
        col0_norm: c0,
        residual: 0.0,
    })
}

/// First schedule entry `2⌈|μ|⌉ + 8`.
pub fn schedule_start(mu_mag: f64) -> usize {
    let c = libm::ceil(mu_mag) as usize;
    2 * c + 8
}

/// Smallest `N` of the schedule `2⌈|μ|⌉+8, doubling` with `ρ_k < 1`.
#[allow(non_snake_case)]
pub fn auto_N(mu: RigorousScalar) -> Result<usize, SmallkError> {
    let mut n = schedule_start(mu.mag());
    while n <= N_MAX {
        if let Ok(b) = certify_block(mu, n) {
            if b.valid {
                return Ok(n);
            }
        }
        n *= 2;
    }
    Err(SmallkError::CapReached { mu_hi: mu.hi() })
}

/// Doubles `N` from the schedule start until the block bound is at most
/// `target` (or `ρ_k` is at most `rho_target`, when given).
pub fn certify_block_until(
    mu: RigorousScalar,
    n_start: usize,
    target: f64,
    rho_target: Option<f64>,
) -> Result<BlockBound, SmallkError> {
    let mut n = n_start.max(schedule_start(mu.mag()));
    if n % 2 == 1 {
        n += 1;
    }
    let mut best: Option<BlockBound> = None;
    while n <= N_MAX {
        let b = certify_block(mu, n)?;
        let done = b.valid
            && b.norm_bound.hi() <= target
            && rho_target.map(|t| b.rho.hi() <= t).unwrap_or(true);
        if done {
            return Ok(b);
        }
        if b.valid && best.as_ref().map(|x| b.norm_bound.hi() < x.norm_bound.hi()).unwrap_or(true) {
            best = Some(b);
        }
        n *= 2;
    }
    best.ok_or(SmallkError::CapReached { mu_hi: mu.hi() })
}

/// One verified cell of a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshRow {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub rho: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Outcome of [`mesh_certify`].
#[derive(Clone, Debug, PartialEq)]
pub struct MeshReport {
    pub success: bool,
    pub worst_bound: f64,
    pub rows: Vec<MeshRow>,
    /// First subinterval that could not be verified at minimum width.
    pub failed: Option<(f64, f64)>,
}

/// Minimum subinterval width before giving up.
pub const MIN_WIDTH: f64 = 1.0 / 64.0;

fn try_cell(lo: f64, hi: f64, target: f64) -> MeshRow {
    let mu = RigorousScalar::new(lo, hi);
    let mut n = schedule_start(hi);
    let mut last = MeshRow {
        lo,
        hi,
        n,
        rho: f64::INFINITY,
        bound: f64::INFINITY,
        ok: false,
    };
    while n <= N_MAX {
        match certify_block(mu, n) {
            Ok(b) => {
                last = MeshRow {
                    lo,
                    hi,
                    n,
                    rho: b.rho.hi(),
                    bound: b.norm_bound.hi(),
                    ok: b.valid && b.norm_bound.hi() <= target,
                };
                if last.ok {
                    return last;
                }
                // a wider cut only helps while ρ still dominates
                if b.valid && b.rho.hi() < 1e-3 {
                    return last;
                }
            }
            Err(_) => {
                last.n = n;
            }
        }
        n *= 2;
    }
    last
}

/// Verifies `[lo, hi]` with adaptive bisection; returns rows in order.
pub fn mesh_certify_cell(lo: f64, hi: f64, target: f64) -> MeshReport {
    let mut rows = Vec::new();
    let mut stack = vec![(lo, hi)];
    let mut failed = None;
    while let Some((a, b)) = stack.pop() {
        let row = try_cell(a, b, target);
        if row.ok {
            rows.push(row);
        } else if b - a > MIN_WIDTH {
            let m = 0.5 * (a + b);
            stack.push((m, b));
            stack.push((a, m));
        } else {
            rows.push(row);
            failed = Some((a, b));
            break;
        }
    }
    finish_report(rows, failed)
}

pub fn finish_report(rows: Vec<MeshRow>, failed: Option<(f64, f64)>) -> MeshReport {
    let worst = rows.iter().map(|r| r.bound).fold(0.0f64, f64::max);
    MeshReport {
        success: failed.is_none() && rows.iter().all(|r| r.ok),
        worst_bound: worst,
        rows,
        failed,
    }
}

/// Unit-width cells covering `[lo, hi]`.
pub fn mesh_cells(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    assert!(0.0 <= lo && lo < hi);
    let mut cells = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = (libm::floor(a) + 1.0).min(hi);
        cells.push((a, b));
        a = b;
    }
    cells
}

/// Certifies `‖𝓛_k⁻¹‖ ≤ target` for every `μ_k ∈ [lo, hi]` (serial).
pub fn mesh_certify(lo: f64, hi: f64, target: f64) -> MeshReport {
    let mut rows = Vec::new();
    for (a, b) in mesh_cells(lo, hi) {
        let r = mesh_certify_cell(a, b, target);
        rows.extend(r.rows);
        if let Some(f) = r.failed {
            return finish_report(rows, Some(f));
        }
    }
    finish_report(rows, None)
}
