//! The weighted space X_{ν,1} of two-index Fourier-Chebyshev sequences.
//!
//! Only the `k ≥ 0, j ≥ 0` quarter is stored; the full sequence is recovered
//! through `a_{-k,j} = a_{k,j}` and `a_{k,-j} = a_{k,j}`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, Mul, Neg, Sub};

use crate::rigor::RigorousScalar;

/// Entry type of a grid: plain binary64 or an interval.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_rigorous(self) -> RigorousScalar;
    /// Conversion from an enclosure (plain values keep the midpoint).
    fn from_rigorous(x: RigorousScalar) -> Self;
    /// Representative floating value (the midpoint for intervals).
    fn approx(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_rigorous(self) -> RigorousScalar {
        RigorousScalar::point(self)
    }
    fn from_rigorous(x: RigorousScalar) -> Self {
        x.mid()
    }
    fn approx(self) -> f64 {
        self
    }
}

impl Scalar for RigorousScalar {
    fn zero() -> Self {
        RigorousScalar::ZERO
    }
    fn from_f64(x: f64) -> Self {
        RigorousScalar::point(x)
    }
    fn to_rigorous(self) -> RigorousScalar {
        self
    }
    fn from_rigorous(x: RigorousScalar) -> Self {
        x
    }
    fn approx(self) -> f64 {
        self.mid()
    }
}

/// Truncated coefficients `a_{k,j}`, `0 ≤ k < K`, `0 ≤ j ≤ N`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffGrid<T = f64> {
    k_modes: usize,
    n: usize,
    nu: f64,
    data: Vec<T>,
}

impl<T: Scalar> CoeffGrid<T> {
    pub fn zeros(k_modes: usize, n: usize, nu: f64) -> Self {
        assert!(k_modes >= 1, "at least one Fourier mode");
        assert!(nu >= 1.0, "decay rate must satisfy nu >= 1");
        Self {
            k_modes,
            n,
            nu,
            data: vec![T::zero(); k_modes * (n + 1)],
        }
    }

    pub fn from_fn(k_modes: usize, n: usize, nu: f64, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut g = Self::zeros(k_modes, n, nu);
        for k in 0..k_modes {
            for j in 0..=n {
                g.set(k, j, f(k, j));
            }
        }
        g
    }

    /// Fourier truncation `K` (number of stored modes).
    pub fn k_modes(&self) -> usize {
        self.k_modes
    }

    /// Chebyshev truncation `N` (highest stored degree).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    #[inline]
    pub fn get(&self, k: usize, j: usize) -> T {
        self.data[k * (self.n + 1) + j]
    }

    /// Entry with zero outside the stored range.
    #[inline]
    pub fn get_or_zero(&self, k: usize, j: usize) -> T {
        if k < self.k_modes && j <= self.n {
            self.get(k, j)
        } else {
            T::zero()
        }
    }

    #[inline]
    pub fn set(&mut self, k: usize, j: usize, v: T) {
        self.data[k * (self.n + 1) + j] = v;
    }

    pub fn row(&self, k: usize) -> &[T] {
        &self.data[k * (self.n + 1)..(k + 1) * (self.n + 1)]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [T] {
        let w = self.n + 1;
        &mut self.data[k * w..(k + 1) * w]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    /// Copy truncated or zero-padded to the given sizes.
    pub fn resized(&self, k_modes: usize, n: usize) -> Self {
        Self::from_fn(k_modes, n, self.nu, |k, j| self.get_or_zero(k, j))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CoeffGrid<U> {
        CoeffGrid {
            k_modes: self.k_modes,
            n: self.n,
            nu: self.nu,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn to_rigorous(&self) -> CoeffGrid<RigorousScalar> {
        self.map(|x| x.to_rigorous())
    }

    pub fn approx(&self) -> CoeffGrid<f64> {
        self.map(|x| x.approx())
    }

    /// Entrywise `self + s * other` over the union of supports.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        let km = self.k_modes.max(other.k_modes);
        let n = self.n.max(other.n);
        Self::from_fn(km, n, self.nu, |k, j| {
            self.get_or_zero(k, j) + s * other.get_or_zero(k, j)
        })
    }
}

/// Initial data `b_k` with an optional ℓ¹_ν error radius.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierVector<T = f64> {
    pub coeffs: Vec<T>,
    pub nu: f64,
    /// Upper bound on `‖b - b̄‖_{ℓ¹_ν}` for the true data `b`.
    pub radius: f64,
}

impl<T: Scalar> FourierVector<T> {
    pub fn new(coeffs: Vec<T>, nu: f64) -> Self {
        Self {
            coeffs,
            nu,
            radius: 0.0,
        }
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        assert!(r >= 0.0);
        self.radius = r;
        self
    }

    pub fn get(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    /// `|b_0| + 2 Σ_{k≥1} |b_k| ν^k`.
    pub fn norm(&self) -> RigorousScalar {
        let mut s = RigorousScalar::ZERO;
        for (k, &b) in self.coeffs.iter().enumerate() {
            let w = if k == 0 {
                RigorousScalar::ONE
            } else {
                nu_pow(self.nu, k) * 2.0
            };
            s += b.to_rigorous().abs() * w;
        }
        s
    }
}

/// Weight `ω_{k,j}` of X_{ν,1}.
pub fn weight(k: usize, j: usize, nu: f64) -> f64 {
    assert!(nu >= 1.0);
    let s = match (k, j) {
        (0, 0) => 1.0,
        (0, _) => 2.0,
        (_, 0) => 2.0,
        _ => 4.0,
    };
    if k == 0 {
        s
    } else {
        s * libm::pow(nu, k as f64)
    }
}

/// Enclosure of `ν^k`.
pub fn nu_pow(nu: f64, k: usize) -> RigorousScalar {
    RigorousScalar::point(nu).powi(k as u32)
}

/// Enclosure of `ω_{k,j}`.
pub fn weight_iv(k: usize, j: usize, nu: f64) -> RigorousScalar {
    let s = match (k, j) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => 2.0,
        _ => 4.0,
    };
    if k == 0 {
        RigorousScalar::point(s)
    } else {
        nu_pow(nu, k) * s
    }
}

/// `|y_0| + 2 Σ_{j≥1} |y_j|`.
pub fn ell1_norm<T: Scalar>(c: &[T]) -> RigorousScalar {
    let mut tail = RigorousScalar::ZERO;
    for &y in c.iter().skip(1) {
        tail += y.to_rigorous().abs();
    }
    let head = c.first().map(|y| y.to_rigorous().abs()).unwrap_or(RigorousScalar::ZERO);
    head + tail * 2.0
}

/// Upper bound of [`ell1_norm`] computed without interval objects.
pub fn ell1_norm_up(c: &[f64]) -> f64 {
    let mut tail = 0.0f64;
    for &y in c.iter().skip(1) {
        tail = crate::rigor::add_up(tail, y.abs());
    }
    let head = c.first().map(|y| y.abs()).unwrap_or(0.0);
    crate::rigor::add_up(head, 2.0 * tail)
}

/// `‖a‖ = Σ |a_{k,j}| ω_{k,j}`, evaluated as `‖a_0‖ + 2 Σ_{k≥1} ‖a_k‖ ν^k`.
pub fn x_norm<T: Scalar>(a: &CoeffGrid<T>) -> RigorousScalar {
    let mut s = ell1_norm(a.row(0));
    for k in 1..a.k_modes() {
        s += ell1_norm(a.row(k)) * nu_pow(a.nu(), k) * 2.0;
    }
    s
}

/// Per-mode ℓ¹ norms `‖a_k‖`; `x_norm` equals their ν-weighted sum.
pub fn mode_norms<T: Scalar>(a: &CoeffGrid<T>) -> Vec<RigorousScalar> {
    (0..a.k_modes()).map(|k| ell1_norm(a.row(k))).collect()
}

/// Adds `Σ_{j1} x_{|j1|} y_{|j - j1|}` into `out[j]` for `j < out.len()`.
fn sym_conv_1d<T: Scalar>(x: &[T], y: &[T], out: &mut [T]) {
    let nx = x.len() as isize - 1;
    let ny = y.len() as isize - 1;
    for (j, o) in out.iter_mut().enumerate() {
        let j = j as isize;
        let lo = (-nx).max(j - ny);
        let hi = nx.min(j + ny);
        let mut acc = *o;
        let mut j1 = lo;
        while j1 <= hi {
            acc = acc + x[j1.unsigned_abs()] * y[(j - j1).unsigned_abs()];
            j1 += 1;
        }
        *o = acc;
    }
}

/// Convolution restricted to `k < k_out`, `j ≤ n_out`.
pub fn convolve_truncated<T: Scalar>(
    a: &CoeffGrid<T>,
    b: &CoeffGrid<T>,
    k_out: usize,
    n_out: usize,
) -> CoeffGrid<T> {
    let mut out = CoeffGrid::zeros(k_out, n_out, a.nu());
    let ka = a.k_modes() as isize - 1;
    let kb = b.k_modes() as isize - 1;
    for k in 0..k_out {
        let ki = k as isize;
        let lo = (-ka).max(ki - kb);
        let hi = ka.min(ki + kb);
        let mut k1 = lo;
        while k1 <= hi {
            let ra = a.row(k1.unsigned_abs());
            let rb = b.row((ki - k1).unsigned_abs());
            sym_conv_1d(ra, rb, out.row_mut(k));
            k1 += 1;
        }
    }
    out
}

/// Full-support discrete convolution: sizes `K_a + K_b - 1`, `N_a + N_b`.
pub fn convolve<T: Scalar>(a: &CoeffGrid<T>, b: &CoeffGrid<T>) -> CoeffGrid<T> {
    assert_eq!(a.nu(), b.nu(), "incompatible decay rates");
    convolve_truncated(a, b, a.k_modes() + b.k_modes() - 1, a.n() + b.n())
}

/// Trace at `τ = 1`: `b_k = a_{k,0} + 2 Σ_{j≥1} a_{k,j}`.
pub fn endpoint_trace<T: Scalar>(a: &CoeffGrid<T>) -> FourierVector<T> {
    let coeffs = (0..a.k_modes())
        .map(|k| {
            let r = a.row(k);
            let mut s = T::zero();
            for &v in &r[1..] {
                s = s + v;
            }
            r[0] + s * T::from_f64(2.0)
        })
        .collect();
    FourierVector::new(coeffs, a.nu())
}

/// [`endpoint_trace`] carrying the enclosure radius `r0` of the grid.
pub fn endpoint_trace_with_radius<T: Scalar>(a: &CoeffGrid<T>, r0: f64) -> FourierVector<T> {
    endpoint_trace(a).with_radius(r0)
}

/// Chebyshev series `c_0 + 2 Σ c_j T_j(τ)` by Clenshaw recurrence.
pub fn cheb_eval(c: &[f64], tau: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &cj in c.iter().skip(1).rev() {
        let b0 = 2.0 * tau * b1 - b2 + 2.0 * cj;
        b2 = b1;
        b1 = b0;
    }
    let c0 = c.first().copied().unwrap_or(0.0);
    c0 + tau * b1 - b2
}

/// `u(τ, x) = a_0(τ) + 2 Σ_{k≥1} a_k(τ) cos(kx)`.
pub fn eval_solution(a: &CoeffGrid<f64>, tau: f64, x: f64) -> f64 {
    assert!(tau.abs() <= 1.0, "tau must lie in [-1, 1]");
    let mut u = cheb_eval(a.row(0), tau);
    for k in 1..a.k_modes() {
        u += 2.0 * cheb_eval(a.row(k), tau) * libm::cos(k as f64 * x);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights() {
        assert_eq!(weight(0, 0, 1.1), 1.0);
        assert_eq!(weight(0, 5, 1.1), 2.0);
        assert_eq!(weight(2, 3, 1.0), 4.0);
        assert!(weight_iv(3, 0, 1.5).contains(2.0 * 3.375));
    }

    #[test]
    fn norms() {
        let mut a = CoeffGrid::<f64>::zeros(3, 3, 2.0);
        a.set(0, 0, 1.0);
        assert!(x_norm(&a).contains(1.0));
        let mut a = CoeffGrid::<f64>::zeros(3, 3, 2.0);
        a.set(1, 2, 0.5);
        assert!(x_norm(&a).contains(4.0));
        assert!(ell1_norm(&[1.0]).contains(1.0));
        assert!(ell1_norm(&[0.0, 0.0, 0.0, 1.0]).contains(2.0));
        assert!(ell1_norm(&[1.0, 1.0, 1.0]).contains(5.0));
        let u = ell1_norm_up(&[1.0, 1.0, 1.0]);
        assert!((5.0..5.0 + 1e-14).contains(&u));
    }

    #[test]
    fn convolve_examples() {
        let mut d = CoeffGrid::<f64>::zeros(1, 0, 1.0);
        d.set(0, 0, 1.0);
        let b = CoeffGrid::from_fn(3, 2, 1.0, |k, j| (k * 3 + j) as f64 + 0.5);
        let c = convolve(&d, &b);
        assert_eq!(c.k_modes(), 3);
        assert_eq!(c.n(), 2);
        assert_eq!(c, b);

        let mut a = CoeffGrid::<f64>::zeros(2, 0, 1.0);
        a.set(1, 0, 1.0);
        let c = convolve(&a, &a);
        assert_eq!(c.k_modes(), 3);
        assert_eq!(c.get(0, 0), 2.0);
        assert_eq!(c.get(1, 0), 0.0);
        assert_eq!(c.get(2, 0), 1.0);
    }

    #[test]
    fn traces_and_eval() {
        let mut a = CoeffGrid::<f64>::zeros(2, 1, 1.0);
        a.set(0, 0, 1.0);
        assert_eq!(endpoint_trace(&a).coeffs, vec![1.0, 0.0]);
        let mut a = CoeffGrid::<f64>::zeros(2, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 1, 0.5);
        assert_eq!(endpoint_trace(&a).coeffs[1], 2.0);

        let mut a = CoeffGrid::<f64>::zeros(1, 0, 1.0);
        a.set(0, 0, 3.25);
        assert_eq!(eval_solution(&a, 0.4, 1.3), 3.25);
        let mut a = CoeffGrid::<f64>::zeros(2, 0, 1.0);
        a.set(1, 0, 1.0);
        assert!((eval_solution(&a, -0.2, 0.7) - 2.0 * libm::cos(0.7)).abs() < 1e-15);
        let mut a = CoeffGrid::<f64>::zeros(1, 1, 1.0);
        a.set(0, 1, 1.0);
        assert!((eval_solution(&a, 0.3, 2.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn fourier_vector_norm() {
        let b = FourierVector::new(vec![-0.1, 0.01, -0.001], 1.0);
        assert!(b.norm().contains(0.122) || (b.norm().mid() - 0.122).abs() < 1e-15);
    }
}
