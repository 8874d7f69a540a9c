//! Analytic bounds on `‖𝓛_k⁻¹‖_{B(ℓ¹)}` once `μ_k` is large.
//!
//! The tridiagonal core `T` (diagonal `d_j`, sub-diagonal `μ`, super-diagonal
//! `−μ`) has an inverse that unrolls through the sequences `a_j`, `â_j`,
//! `b_j`. The rank-one boundary row is absorbed with Sherman–Morrison.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::rigor::{dn, up, RigorousScalar};

/// Blanket constant used for every mode with `μ_k ≥ 0`.
pub const DELTA_TILDE: f64 = 1.455;

/// Target of the computer-assisted mesh on `μ ∈ [0, 1000]`.
pub const MESH_TARGET: f64 = 1.45;

/// Upper end of the meshed `μ` range.
pub const MESH_LIMIT: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LargekError {
    /// The analytic bounds need `μ > 0`.
    NonPositiveMu(f64),
    /// The enclosure reaches below zero; use the small-k machinery instead.
    NegativeMu { lo: f64 },
    /// No analytic constant covers an enclosure that touches zero.
    Uncovered { lo: f64, hi: f64 },
}

impl fmt::Display for LargekError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LargekError::NonPositiveMu(m) => write!(f, "mu must be positive, got {m}"),
            LargekError::NegativeMu { lo } => {
                write!(f, "mu enclosure has negative lower end {lo}; use the block certificates")
            }
            LargekError::Uncovered { lo, hi } => {
                write!(f, "no analytic bound for mu in [{lo}, {hi}] without a mesh certificate")
            }
        }
    }
}

impl core::error::Error for LargekError {}

/// The sequences `a_j`, `â_j`, `b_j`, stored with index 0 holding the zero
/// start value so that `a[j]` is `a_j` for `j = 0..=N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveSeqs {
    pub mu: f64,
    pub n: usize,
    pub a: Vec<f64>,
    pub ahat: Vec<f64>,
    pub b: Vec<f64>,
}

/// Tridiagonal core of size `n`. `reversed` selects `d̄_j = 2N − 2j + 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridiagSpec {
    pub mu: f64,
    pub n: usize,
    pub reversed: bool,
}

impl TridiagSpec {
    pub fn new(mu: f64, n: usize) -> Self {
        Self { mu, n, reversed: false }
    }

    pub fn reversed(mu: f64, n: usize) -> Self {
        Self { mu, n, reversed: true }
    }

    /// Diagonal with a dummy entry at index 0, so `d[j]` is `d_j`.
    pub fn diag(&self) -> Vec<f64> {
        let n = self.n;
        (0..=n)
            .map(|j| match (j, self.reversed) {
                (0, _) => 0.0,
                (_, false) => (2 * j) as f64,
                (_, true) => (2 * n - 2 * j + 2) as f64,
            })
            .collect()
    }

    /// Dense row-major `T`.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.n;
        let d = self.diag();
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            t[i * n + i] = d[i + 1];
            if i > 0 {
                t[i * n + i - 1] = self.mu;
            }
            if i + 1 < n {
                t[i * n + i + 1] = -self.mu;
            }
        }
        t
    }
}

/// Sequences for the standard diagonal `d_j = 2j`.
pub fn recursive_seqs(mu: f64, n: usize) -> RecursiveSeqs {
    recursive_seqs_for(&TridiagSpec::new(mu, n))
}

/// Sequences for an arbitrary [`TridiagSpec`] diagonal.
pub fn recursive_seqs_for(spec: &TridiagSpec) -> RecursiveSeqs {
    assert!(spec.n % 2 == 0 && spec.n > 0, "N must be even and positive");
    let n = spec.n;
    let half = n / 2;
    let d = spec.diag();
    let m2 = spec.mu * spec.mu;
    let mut a = vec![0.0; half + 1];
    let mut ahat = vec![0.0; half + 1];
    let mut b = vec![0.0; half + 1];
    for j in 1..=half {
        let (lo, hi) = (d[n - 2 * j + 1], d[n - 2 * j + 2]);
        let den = lo * hi + a[j - 1] * lo * m2 + m2;
        a[j] = (hi + a[j - 1] * m2) / den;
        ahat[j] = spec.mu / den;
        let (odd, even) = (d[2 * j - 1], d[2 * j]);
        b[j] = (odd + b[j - 1] * m2) / (even * odd + b[j - 1] * even * m2 + m2);
    }
    RecursiveSeqs { mu: spec.mu, n, a, ahat, b }
}

/// Inverse of the `c`-th diagonal 2×2 block (rows `2c−1, 2c`), row-major.
fn diag_block(seqs: &RecursiveSeqs, d: &[f64], c: usize) -> [f64; 4] {
    let mu = seqs.mu;
    let half = seqs.n / 2;
    let p = d[2 * c - 1] + mu * mu * seqs.b[c - 1];
    let q = d[2 * c] + mu * mu * seqs.a[half - c];
    let det = p * q + mu * mu;
    [q / det, mu / det, -mu / det, p / det]
}

/// Dense row-major `T⁻¹` from the explicit recursion: diagonal 2×2 blocks,
/// the lower triangle by pairs `rows(2i+1, 2i+2) = μ(−a_{n−i}, â_{n−i})·row 2i`,
/// the upper triangle by the parity symmetry. Plain binary64; not a
/// certificate.
pub fn tinv_explicit(spec: &TridiagSpec) -> Vec<f64> {
    let seqs = recursive_seqs_for(spec);
    let d = spec.diag();
    let n = spec.n;
    let half = n / 2;
    let mu = spec.mu;
    let mut inv = vec![0.0; n * n];
    for c in 1..=half {
        let blk = diag_block(&seqs, &d, c);
        // 0-based rows/cols 2c-2, 2c-1
        let (r0, r1) = (2 * c - 2, 2 * c - 1);
        inv[r0 * n + r0] = blk[0];
        inv[r0 * n + r1] = blk[1];
        inv[r1 * n + r0] = blk[2];
        inv[r1 * n + r1] = blk[3];
        for col in [r0, r1] {
            for i in c..half {
                // 1-based row 2i is the base; rows 2i+1, 2i+2 follow
                let base = inv[(2 * i - 1) * n + col];
                inv[(2 * i) * n + col] = -mu * seqs.a[half - i] * base;
                inv[(2 * i + 1) * n + col] = mu * seqs.ahat[half - i] * base;
            }
        }
    }
    for l in 0..n {
        for i in (l + 1)..n {
            let s = if (i - l) % 2 == 0 { 1.0 } else { -1.0 };
            inv[l * n + i] = s * inv[i * n + l];
        }
    }
    inv
}

/// Closed-form ℓ¹ norm of rows `2c−1..N` of column `2c−2+cc` (`cc ∈ {1,2}`),
/// obtained by unrolling the pair recursion.
pub fn lower_column_norm(seqs: &RecursiveSeqs, c: usize, cc: usize) -> f64 {
    let spec = TridiagSpec::new(seqs.mu, seqs.n);
    lower_column_norm_with(seqs, &spec.diag(), c, cc)
}

fn lower_column_norm_with(seqs: &RecursiveSeqs, d: &[f64], c: usize, cc: usize) -> f64 {
    let half = seqs.n / 2;
    let blk = diag_block(seqs, d, c);
    let (top, bot) = if cc == 1 { (blk[0], blk[2]) } else { (blk[1], blk[3]) };
    let m = half - c + 1;
    let mut total = libm::fabs(top) + libm::fabs(bot);
    let mut prod = libm::fabs(bot);
    for i in 1..m {
        let mu = libm::fabs(seqs.mu);
        total += mu * (seqs.a[m - i] + seqs.ahat[m - i]) * prod;
        prod *= mu * seqs.ahat[m - i];
    }
    total
}

fn decimal(x: f64) -> RigorousScalar {
    RigorousScalar::new(dn(x), up(x))
}

/// Uniform bound on `‖T⁻¹‖₁` valid for every even `N > 2μ`.
pub fn tinv_norm_bound(mu: f64) -> Result<RigorousScalar, LargekError> {
    if !(mu > 0.0) {
        return Err(LargekError::NonPositiveMu(mu));
    }
    let (core, tail) = if mu > 1000.0 {
        (decimal(0.727), RigorousScalar::ratio(1.0, 2000.0))
    } else if mu > 100.0 {
        (decimal(0.736), RigorousScalar::ratio(1.0, 200.0))
    } else if mu > 10.0 {
        (decimal(0.806), RigorousScalar::ratio(1.0, 20.0))
    } else {
        (
            RigorousScalar::point(8.0).sqrt(),
            RigorousScalar::ONE / (RigorousScalar::point(2.0) * RigorousScalar::point(mu)),
        )
    };
    Ok(core + tail)
}

/// `max{2‖T⁻¹‖₁, 1}`, the bound on the finite section `(𝓛_k^{(N)})⁻¹`.
pub fn sherman_morrison_bound(mu: f64) -> Result<RigorousScalar, LargekError> {
    let t = tinv_norm_bound(mu)?;
    Ok(t.scale2(1).max(RigorousScalar::ONE))
}

/// The table `C(μ)` for `μ > 10`.
pub fn c_table(mu: f64) -> Option<f64> {
    if mu > 1000.0 {
        Some(1.455)
    } else if mu > 100.0 {
        Some(1.482)
    } else if mu > 10.0 {
        Some(1.712)
    } else {
        None
    }
}

/// Bound on `‖𝓛_k⁻¹‖_{B(ℓ¹)}` for a nonnegative `μ` enclosure.
///
/// With `mesh_certified` the meshed range `[0, 1000]` gets the mesh target.
/// Otherwise the stratum is picked from `μ.lo` (the constants decrease in
/// `μ`); below 10 the generic element-wise bound is used, which needs `μ.lo > 0`.
#[allow(non_snake_case)]
pub fn uniform_Lk_bound(
    mu: RigorousScalar,
    mesh_certified: bool,
) -> Result<RigorousScalar, LargekError> {
    if mu.lo() < 0.0 {
        return Err(LargekError::NegativeMu { lo: mu.lo() });
    }
    if mesh_certified && mu.hi() <= MESH_LIMIT {
        return Ok(RigorousScalar::point(MESH_TARGET));
    }
    if let Some(c) = c_table(mu.lo()) {
        return Ok(RigorousScalar::point(c));
    }
    if mu.lo() > 0.0 {
        return sherman_morrison_bound(mu.lo());
    }
    Err(LargekError::Uncovered { lo: mu.lo(), hi: mu.hi() })
}

/// Outcome of [`appendix_sum_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixReport {
    pub mu: f64,
    pub n: usize,
    pub terms: usize,
    pub sum_a: f64,
    pub sum_ahat: f64,
    /// Closed-form integral majorant of `Σ a_j`.
    pub integral_a: f64,
    /// `atan(4)/4`.
    pub integral_ahat: f64,
    pub const_a: f64,
    pub const_ahat: f64,
    pub ok: bool,
}

impl fmt::Display for AppendixReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mu = {}  N = {}  terms = {}", self.mu, self.n, self.terms)?;
        writeln!(
            f,
            "sum a_j    = {:.6}  integral = {:.6}  constant = {}",
            self.sum_a, self.integral_a, self.const_a
        )?;
        writeln!(
            f,
            "sum ahat_j = {:.6}  integral = {:.6}  constant = {}",
            self.sum_ahat, self.integral_ahat, self.const_ahat
        )?;
        write!(f, "{}", if self.ok { "ok" } else { "VIOLATED" })
    }
}

/// Integral majorant of `Σ_{j≤⌊μ⌋} a_j`.
pub fn integral_a(mu: f64) -> f64 {
    let at = libm::atan(4.0);
    let s2 = libm::sqrt(2.0);
    let num = mu * mu * mu * (4.0 * (4.0 + s2) + 17.0 * s2 * at)
        + 8.0 * mu * mu * (4.0 + 17.0 * at)
        + 16.0 * mu
        + 16.0
        + 68.0 * at;
    num / (136.0 * mu * mu * mu)
}

/// Evaluates `Σ_{j=1}^{⌊μ⌋} a_j` and `Σ â_j` at `N = 2⌊μ⌋ + 2` and compares
/// with the hard-coded constants that feed [`tinv_norm_bound`]. Needs `μ ≥ 10`.
pub fn appendix_sum_check(mu: f64) -> Result<AppendixReport, LargekError> {
    if !(mu >= 10.0) {
        return Err(LargekError::Uncovered { lo: mu, hi: mu });
    }
    let terms = libm::floor(mu) as usize;
    let n = 2 * terms + 2;
    let seqs = recursive_seqs(mu, n);
    let sum_a: f64 = seqs.a[1..=terms].iter().sum();
    let sum_ahat: f64 = seqs.ahat[1..=terms].iter().sum();
    let const_a = if mu >= 1000.0 {
        0.395
    } else if mu >= 100.0 {
        0.404
    } else {
        0.474
    };
    let const_ahat = 0.332;
    let ok = sum_a <= const_a && sum_ahat <= const_ahat;
    Ok(AppendixReport {
        mu,
        n,
        terms,
        sum_a,
        sum_ahat,
        integral_a: integral_a(mu),
        integral_ahat: libm::atan(4.0) / 4.0,
        const_a,
        const_ahat,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_terms() {
        let s = recursive_seqs(5.0, 10);
        assert!((s.a[1] - 20.0 / 385.0).abs() < 1e-15);
        assert!((s.b[1] - 2.0 / 33.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two() {
        let inv = tinv_explicit(&TridiagSpec::new(1.0, 2));
        let want = [4.0 / 9.0, 1.0 / 9.0, -1.0 / 9.0, 2.0 / 9.0];
        for (x, y) in inv.iter().zip(want) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn strata() {
        assert_eq!(uniform_Lk_bound(RigorousScalar::point(11.0), false).unwrap().hi(), 1.712);
        assert_eq!(uniform_Lk_bound(RigorousScalar::point(200.0), false).unwrap().hi(), 1.482);
        assert_eq!(uniform_Lk_bound(RigorousScalar::point(5000.0), false).unwrap().hi(), 1.455);
        assert_eq!(uniform_Lk_bound(RigorousScalar::point(0.0), true).unwrap().hi(), 1.45);
        assert!(uniform_Lk_bound(RigorousScalar::new(-1.0, 1.0), true).is_err());
        assert!(uniform_Lk_bound(RigorousScalar::point(0.0), false).is_err());
    }

    #[test]
    fn norm_bound_values() {
        assert!(tinv_norm_bound(11.0).unwrap().contains(0.856));
        assert!(tinv_norm_bound(2000.0).unwrap().contains(0.7275));
        assert!(tinv_norm_bound(5.0).unwrap().contains(2.0 * 2f64.sqrt() + 0.1));
        assert!(tinv_norm_bound(0.0).is_err());
        assert!(sherman_morrison_bound(11.0).unwrap().contains(1.712));
    }
}
