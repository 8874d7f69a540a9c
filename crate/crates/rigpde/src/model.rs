//! The PDE family `u_t = Lu + Q(u)` with even periodic data, its Fourier
//! reduction and the zero-finding map `F(a, b) = 𝓛a - b + (h/2)ΛQ(a)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::rigor::RigorousScalar;
use crate::seqspace::{convolve, convolve_truncated, CoeffGrid, FourierVector, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    EmptyLinearPart,
    NotDissipative,
    /// `Q` must start at the quadratic term.
    LowOrderNonlinearity,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::EmptyLinearPart => write!(f, "no linear coefficients given"),
            ModelError::NotDissipative => {
                write!(f, "leading linear coefficient does not make the eigenvalues tend to -inf")
            }
            ModelError::LowOrderNonlinearity => {
                write!(f, "nonlinearity has a constant or linear term")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// `L = Σ γ_{2ℓ} ∂_x^{2ℓ}` and `Q(u) = Σ_{j≥2} q_j u^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    gamma: Vec<f64>,
    q: Vec<f64>,
}

impl ModelSpec {
    /// `gamma[ℓ]` multiplies `∂_x^{2ℓ}`; `q[j]` multiplies `u^j`.
    pub fn new(name: &str, gamma: Vec<f64>, q: Vec<f64>) -> Result<Self, ModelError> {
        let mut gamma = gamma;
        while gamma.len() > 1 && *gamma.last().unwrap() == 0.0 {
            gamma.pop();
        }
        if gamma.is_empty() {
            return Err(ModelError::EmptyLinearPart);
        }
        let d = gamma.len() - 1;
        let lead = gamma[d] * if d % 2 == 0 { 1.0 } else { -1.0 };
        if d == 0 || !(lead < 0.0) {
            return Err(ModelError::NotDissipative);
        }
        let mut q = q;
        while q.last() == Some(&0.0) {
            q.pop();
        }
        if q.iter().take(2).any(|&c| c != 0.0) {
            return Err(ModelError::LowOrderNonlinearity);
        }
        Ok(Self {
            name: String::from(name),
            gamma,
            q,
        })
    }

    /// `u_t = u_xx + αu - αu²`.
    pub fn fisher(alpha: f64) -> Self {
        Self::new("fisher", vec![alpha, 1.0], vec![0.0, 0.0, -alpha]).unwrap()
    }

    /// `u_t = (α-1)u - 2u_xx - u_xxxx - u³`.
    pub fn swift_hohenberg(alpha: f64) -> Self {
        Self::new("swift-hohenberg", vec![alpha - 1.0, -2.0, -1.0], vec![0.0, 0.0, 0.0, -1.0])
            .unwrap()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Polynomial degree `p` of `Q` (1 when `Q = 0`).
    pub fn degree(&self) -> usize {
        self.q.len().saturating_sub(1).max(1)
    }

    pub fn is_linear(&self) -> bool {
        self.q.iter().all(|&c| c == 0.0)
    }
}

/// `λ_k = Σ_ℓ γ_{2ℓ} (-1)^ℓ k^{2ℓ}`.
pub fn eigenvalue(model: &ModelSpec, k: usize) -> f64 {
    eigenvalue_iv(model, k).mid()
}

/// Enclosure of `λ_k`.
pub fn eigenvalue_iv(model: &ModelSpec, k: usize) -> RigorousScalar {
    if let Some(v) = exact_integer_eigenvalue(model, k) {
        return RigorousScalar::point(v);
    }
    let k2 = RigorousScalar::point(k as f64).sqr();
    let mut pw = RigorousScalar::ONE;
    let mut s = RigorousScalar::ZERO;
    for (l, &g) in model.gamma.iter().enumerate() {
        let sign = if l % 2 == 0 { g } else { -g };
        s += pw * sign;
        pw = pw * k2;
    }
    s
}

/// Integer coefficients give an integer `λ_k`; it is exact in binary64 while
/// every partial sum stays below 2^53.
fn exact_integer_eigenvalue(model: &ModelSpec, k: usize) -> Option<f64> {
    const LIMIT: f64 = 9.007_199_254_740_992e15;
    if model.gamma.iter().any(|&g| libm::trunc(g) != g || g.abs() >= LIMIT) {
        return None;
    }
    let k2 = (k as f64) * (k as f64);
    let mut pw = 1.0f64;
    let mut s = 0.0f64;
    let mut bound = 0.0f64;
    for (l, &g) in model.gamma.iter().enumerate() {
        let t = if l % 2 == 0 { g * pw } else { -g * pw };
        bound += t.abs();
        if !(bound < LIMIT) || !(pw < LIMIT) {
            return None;
        }
        s += t;
        pw *= k2;
    }
    Some(s)
}

/// Data for one integration step of length `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepContext {
    pub model: ModelSpec,
    pub h: f64,
    /// Fourier truncation `K`.
    pub k_modes: usize,
    /// Chebyshev truncation `N`.
    pub n: usize,
    pub nu: f64,
    /// User lower bound for `k̂`.
    pub khat_override: Option<usize>,
}

impl StepContext {
    pub fn new(model: ModelSpec, h: f64, k_modes: usize, n: usize, nu: f64) -> Self {
        assert!(h > 0.0, "step size must be positive");
        assert!(nu >= 1.0);
        Self {
            model,
            h,
            k_modes,
            n,
            nu,
            khat_override: None,
        }
    }

    /// `k̂ = max{k : μ_k < 0}` joined with the override; `None` if empty.
    pub fn khat(&self) -> Option<usize> {
        let auto = last_unstable_mode(&self.model);
        match (auto, self.khat_override) {
            (Some(a), Some(o)) => Some(a.max(o)),
            (a, o) => a.or(o),
        }
    }

    /// Residual support `M = p(K-1)`.
    pub fn residual_modes(&self) -> usize {
        self.model.degree() * (self.k_modes - 1)
    }
}

/// Largest `k` whose eigenvalue may be positive (`μ_k` may be negative).
pub fn last_unstable_mode(model: &ModelSpec) -> Option<usize> {
    // λ_k is a polynomial in k² with negative leading term, so past the
    // largest root it stays negative; scanning a generous window suffices.
    let mut last = None;
    let mut streak = 0usize;
    let mut k = 0usize;
    while streak < 64 && k < 1_000_000 {
        if eigenvalue_iv(model, k).hi() > 0.0 {
            last = Some(k);
            streak = 0;
        } else {
            streak += 1;
        }
        k += 1;
    }
    last
}

/// Enclosure of `μ_k = -h λ_k / 2`.
pub fn mu(ctx: &StepContext, k: usize) -> RigorousScalar {
    mu_at(&ctx.model, ctx.h, k)
}

pub fn mu_at(model: &ModelSpec, h: f64, k: usize) -> RigorousScalar {
    -(eigenvalue_iv(model, k) * (h * 0.5))
}

/// `(Λc)_0 = 0`, `(Λc)_j = -c_{j-1} + c_{j+1}`; output has one more entry.
pub fn apply_lambda<T: Scalar>(c: &[T]) -> Vec<T> {
    let n = c.len();
    let at = |j: usize| if j < n { c[j] } else { T::zero() };
    let mut out = vec![T::zero(); n + 1];
    for (j, o) in out.iter_mut().enumerate().skip(1) {
        *o = at(j + 1) - at(j - 1);
    }
    out
}

/// `Q(a) = Σ_j q_j a^{*j}` with full convolution support.
pub fn apply_q<T: Scalar>(model: &ModelSpec, a: &CoeffGrid<T>) -> CoeffGrid<T> {
    let p = model.degree();
    let k_out = p * (a.k_modes() - 1) + 1;
    let n_out = p * a.n();
    apply_q_truncated(model, a, k_out, n_out)
}

/// `Q(a)` restricted to `k < k_out`, `j ≤ n_out`. Intermediate powers keep
/// full support so the retained entries are exact.
pub fn apply_q_truncated<T: Scalar>(
    model: &ModelSpec,
    a: &CoeffGrid<T>,
    k_out: usize,
    n_out: usize,
) -> CoeffGrid<T> {
    let mut out = CoeffGrid::zeros(k_out, n_out, a.nu());
    if model.is_linear() {
        return out;
    }
    let p = model.degree();
    let mut pw = a.clone();
    for j in 2..=p {
        let q = model.q[j];
        if j == p {
            pw = convolve_truncated(&pw, a, k_out, n_out);
        } else {
            pw = convolve(&pw, a);
        }
        if q != 0.0 {
            let qs = T::from_f64(q);
            for k in 0..k_out.min(pw.k_modes()) {
                for jj in 0..=n_out.min(pw.n()) {
                    let v = out.get(k, jj) + qs * pw.get(k, jj);
                    out.set(k, jj, v);
                }
            }
        }
    }
    out
}

/// `𝓛a`: the boundary row and the tridiagonal rows per mode.
pub fn apply_l_blocks<T: Scalar>(ctx: &StepContext, a: &CoeffGrid<T>) -> CoeffGrid<T> {
    let mut out = CoeffGrid::zeros(a.k_modes(), a.n() + 1, a.nu());
    for k in 0..a.k_modes() {
        let m = T::from_rigorous(mu(ctx, k));
        let row = a.row(k);
        let mut v = row[0];
        for (l, &x) in row.iter().enumerate().skip(1) {
            v = if l % 2 == 0 { v + x + x } else { v - x - x };
        }
        out.set(k, 0, v);
        for j in 1..=a.n() + 1 {
            let am = a.get_or_zero(k, j - 1);
            let a0 = a.get_or_zero(k, j);
            let ap = a.get_or_zero(k, j + 1);
            out.set(k, j, m * am + T::from_f64(2.0 * j as f64) * a0 - m * ap);
        }
    }
    out
}

/// `F(a, b)` on the full residual support: modes `k ≤ p(K-1)` and
/// Chebyshev degrees `j ≤ max(N+1, pN+1)`.
#[allow(non_snake_case)]
pub fn apply_F<T: Scalar>(ctx: &StepContext, a: &CoeffGrid<T>, b: &FourierVector<T>) -> CoeffGrid<T> {
    let q = apply_q(&ctx.model, a);
    let k_out = q.k_modes().max(a.k_modes()).max(b.coeffs.len());
    let n_out = (a.n() + 1).max(q.n() + 1);
    assemble_f(ctx, a, b, &q, k_out, n_out)
}

/// Galerkin projection of `F(a, b)` onto `k < K_a`, `j ≤ N_a`.
#[allow(non_snake_case)]
pub fn apply_F_projected<T: Scalar>(
    ctx: &StepContext,
    a: &CoeffGrid<T>,
    b: &FourierVector<T>,
) -> CoeffGrid<T> {
    let q = apply_q_truncated(&ctx.model, a, a.k_modes(), a.n() + 1);
    assemble_f(ctx, a, b, &q, a.k_modes(), a.n())
}

fn assemble_f<T: Scalar>(
    ctx: &StepContext,
    a: &CoeffGrid<T>,
    b: &FourierVector<T>,
    q: &CoeffGrid<T>,
    k_out: usize,
    n_out: usize,
) -> CoeffGrid<T> {
    let half_h = T::from_rigorous(RigorousScalar::point(ctx.h) * 0.5);
    let mut f = CoeffGrid::zeros(k_out, n_out, a.nu());
    for k in 0..k_out {
        let m = T::from_rigorous(mu(ctx, k));
        let mut v = T::zero();
        if k < a.k_modes() {
            let row = a.row(k);
            v = row[0];
            for (l, &x) in row.iter().enumerate().skip(1) {
                v = if l % 2 == 0 { v + x + x } else { v - x - x };
            }
        }
        f.set(k, 0, v - b.get(k));
        for j in 1..=n_out {
            let lin = m * a.get_or_zero(k, j - 1) + T::from_f64(2.0 * j as f64) * a.get_or_zero(k, j)
                - m * a.get_or_zero(k, j + 1);
            let nl = half_h * (q.get_or_zero(k, j + 1) - q.get_or_zero(k, j - 1));
            f.set(k, j, lin + nl);
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues() {
        let f = ModelSpec::fisher(100.0);
        assert_eq!(eigenvalue(&f, 0), 100.0);
        assert_eq!(eigenvalue(&f, 9), 19.0);
        let sh = ModelSpec::swift_hohenberg(8.1);
        assert!((eigenvalue(&sh, 1) - 8.1).abs() < 1e-14);
        assert!((eigenvalue(&sh, 0) - 7.1).abs() < 1e-14);
        assert_eq!(last_unstable_mode(&f), Some(9));
        assert_eq!(last_unstable_mode(&sh), Some(1));
    }

    #[test]
    fn rejects_bad_models() {
        assert_eq!(
            ModelSpec::new("x", vec![1.0, -1.0], vec![]),
            Err(ModelError::NotDissipative)
        );
        assert_eq!(
            ModelSpec::new("x", vec![1.0, 1.0], vec![0.0, 2.0]),
            Err(ModelError::LowOrderNonlinearity)
        );
    }

    #[test]
    fn mu_values() {
        let lin = ModelSpec::new("heat", vec![-4.0, 0.0, 0.0], vec![]);
        assert!(lin.is_err());
        let lin = ModelSpec::new("heat", vec![-4.0, 1.0], vec![]).unwrap();
        assert!(mu_at(&lin, 1.0, 0).contains(2.0));
        let z = ModelSpec::new("z", vec![0.0, 1.0], vec![]).unwrap();
        assert!(mu_at(&z, 0.3, 0).contains(0.0));
        let f = ModelSpec::fisher(100.0);
        let m = mu_at(&f, 0.0045001, 0);
        assert!((m.mid() + 0.2250050).abs() < 1e-9);
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(apply_lambda(&[0.0; 3]), vec![0.0; 4]);
        assert_eq!(apply_lambda(&[1.0, 0.0, 0.0]), vec![0.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn f_of_zero() {
        let ctx = StepContext::new(ModelSpec::fisher(100.0), 0.01, 3, 4, 1.0);
        let a = CoeffGrid::<f64>::zeros(3, 4, 1.0);
        let f = apply_F(&ctx, &a, &FourierVector::new(vec![0.0; 3], 1.0));
        assert!(f.entries().iter().all(|&x| x == 0.0));
        let f = apply_F(&ctx, &a, &FourierVector::new(vec![0.5, -1.0, 2.0], 1.0));
        assert_eq!(f.get(0, 0), -0.5);
        assert_eq!(f.get(1, 0), 1.0);
        assert_eq!(f.get(2, 0), -2.0);
        for k in 0..f.k_modes() {
            for j in 1..=f.n() {
                assert_eq!(f.get(k, j), 0.0);
            }
        }
    }

    #[test]
    fn q_examples() {
        let f = ModelSpec::fisher(100.0);
        let mut d = CoeffGrid::<f64>::zeros(1, 0, 1.0);
        d.set(0, 0, 1.0);
        assert_eq!(apply_q(&f, &d).get(0, 0), -100.0);
        let sh = ModelSpec::swift_hohenberg(8.1);
        let t = 0.3;
        let mut a = CoeffGrid::<f64>::zeros(2, 0, 1.0);
        a.set(1, 0, t);
        let q = apply_q(&sh, &a);
        assert_eq!(q.k_modes(), 4);
        assert!((q.get(1, 0) + 3.0 * t * t * t).abs() < 1e-15);
        assert!((q.get(3, 0) + t * t * t).abs() < 1e-15);
        assert_eq!(q.get(0, 0), 0.0);
        assert_eq!(q.get(2, 0), 0.0);
    }
}
