//! Interval arithmetic with outward rounding.
//!
//! Every operation is evaluated in round-to-nearest and the endpoints are then
//! pushed one ulp outward with `next_down`/`next_up`. No rounding-mode state is
//! touched, so values can be shared freely across threads.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Errors raised by the rigorous substrate.
#[derive(Clone, Debug, PartialEq)]
pub enum RigorError {
    /// Division by an interval that contains zero.
    DivisionByZero,
    /// Endpoints out of order or NaN.
    InvalidInterval,
    /// Matrix shapes do not match.
    Dimension,
    /// The preconditioned residual `||I - CA||` was not below one.
    Unverifiable { residual: f64 },
}

impl fmt::Display for RigorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RigorError::DivisionByZero => write!(f, "division by an interval containing zero"),
            RigorError::InvalidInterval => write!(f, "invalid interval endpoints"),
            RigorError::Dimension => write!(f, "matrix dimensions do not match"),
            RigorError::Unverifiable { residual } => {
                write!(f, "cannot verify inverse, residual bound {residual:e}")
            }
        }
    }
}

impl core::error::Error for RigorError {}

#[inline]
pub(crate) fn dn(x: f64) -> f64 {
    x.next_down()
}

#[inline]
pub(crate) fn up(x: f64) -> f64 {
    x.next_up()
}

/// Upper bound of `a + b`.
#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    up(a + b)
}

/// Upper bound of `a * b`.
#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    up(a * b)
}

/// Upper bound of `a / b` for `b > 0`.
#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    up(a / b)
}

#[inline]
fn nz(x: f64) -> f64 {
    // 0 * inf produces NaN; inside an enclosure product that term is 0.
    if x.is_nan() {
        0.0
    } else {
        x
    }
}

/// Closed interval `[lo, hi]` of binary64 numbers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigorousScalar {
    lo: f64,
    hi: f64,
}

impl RigorousScalar {
    pub const ZERO: Self = Self { lo: 0.0, hi: 0.0 };
    pub const ONE: Self = Self { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Self = Self {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// Interval from endpoints; panics if `lo > hi` or either is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi).expect("interval endpoints out of order")
    }

    pub fn try_new(lo: f64, hi: f64) -> Result<Self, RigorError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(RigorError::InvalidInterval);
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate interval `[x, x]`.
    pub const fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// `[m - r, m + r]` rounded outward.
    pub fn ball(m: f64, r: f64) -> Self {
        let r = r.abs();
        Self {
            lo: dn(m - r),
            hi: up(m + r),
        }
    }

    /// Encloses the rational `num / den`.
    pub fn ratio(num: f64, den: f64) -> Self {
        Self::point(num) / Self::point(den)
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Largest absolute value of a member.
    #[inline]
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value of a member.
    pub fn mig(&self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }

    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    /// Upper bound of the width `hi - lo`.
    pub fn width(&self) -> f64 {
        up(self.hi - self.lo)
    }

    /// Upper bound of the radius around `mid()`.
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        up(self.hi - m).max(up(m - self.lo))
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn encloses(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn hull(self, other: Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn abs(self) -> Self {
        Self {
            lo: self.mig(),
            hi: self.mag(),
        }
    }

    pub fn max(self, other: Self) -> Self {
        Self {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn min(self, other: Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn sqr(self) -> Self {
        let a = self.abs();
        Self {
            lo: if a.lo == 0.0 { 0.0 } else { dn(a.lo * a.lo).max(0.0) },
            hi: up(a.hi * a.hi),
        }
    }

    pub fn powi(self, n: u32) -> Self {
        match n {
            0 => Self::ONE,
            1 => self,
            _ => {
                if n % 2 == 0 {
                    self.sqr().powi(n / 2)
                } else {
                    self * self.powi(n - 1)
                }
            }
        }
    }

    /// Square root of the nonnegative part.
    pub fn sqrt(self) -> Self {
        let lo = if self.lo <= 0.0 {
            0.0
        } else {
            dn(libm::sqrt(self.lo)).max(0.0)
        };
        Self {
            lo,
            hi: up(libm::sqrt(self.hi.max(0.0))),
        }
    }

    pub fn recip(self) -> Result<Self, RigorError> {
        Self::ONE.checked_div(self)
    }

    pub fn checked_div(self, y: Self) -> Result<Self, RigorError> {
        if y.contains_zero() {
            return Err(RigorError::DivisionByZero);
        }
        let q = [self.lo / y.lo, self.lo / y.hi, self.hi / y.lo, self.hi / y.hi];
        Ok(Self::from_candidates(q))
    }

    /// Scales by an exact power of two.
    pub fn scale2(self, e: i32) -> Self {
        let s = libm::ldexp(1.0, e);
        // exact unless underflow; keep the outward nudge for safety
        Self::point(s) * self
    }

    fn from_candidates(q: [f64; 4]) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in q {
            let v = nz(v);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Self {
            lo: dn(lo),
            hi: up(hi),
        }
    }
}

impl fmt::Display for RigorousScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl From<f64> for RigorousScalar {
    fn from(x: f64) -> Self {
        Self::point(x)
    }
}

impl Add for RigorousScalar {
    type Output = Self;
    #[inline]
    fn add(self, y: Self) -> Self {
        if y == Self::ZERO {
            return self;
        }
        if self == Self::ZERO {
            return y;
        }
        Self {
            lo: dn(self.lo + y.lo),
            hi: up(self.hi + y.hi),
        }
    }
}

impl Sub for RigorousScalar {
    type Output = Self;
    #[inline]
    fn sub(self, y: Self) -> Self {
        if y == Self::ZERO {
            return self;
        }
        Self {
            lo: dn(self.lo - y.hi),
            hi: up(self.hi - y.lo),
        }
    }
}

impl Mul for RigorousScalar {
    type Output = Self;
    #[inline]
    fn mul(self, y: Self) -> Self {
        if let Some(r) = trivial_mul(self, y).or_else(|| trivial_mul(y, self)) {
            return r;
        }
        if self.is_point() && y.is_point() {
            let p = nz(self.lo * y.lo);
            return Self { lo: dn(p), hi: up(p) };
        }
        Self::from_candidates([
            self.lo * y.lo,
            self.lo * y.hi,
            self.hi * y.lo,
            self.hi * y.hi,
        ])
    }
}

#[inline]
fn trivial_mul(x: RigorousScalar, y: RigorousScalar) -> Option<RigorousScalar> {
    if !y.is_point() {
        return None;
    }
    if y.lo == 0.0 && x.mag().is_finite() {
        Some(RigorousScalar::ZERO)
    } else if y.lo == 1.0 {
        Some(x)
    } else if y.lo == -1.0 {
        Some(-x)
    } else {
        None
    }
}

/// Division operator; yields the entire line when `0 ∈ y`. Use
/// [`RigorousScalar::checked_div`] to get an error instead.
impl core::ops::Div for RigorousScalar {
    type Output = Self;
    fn div(self, y: Self) -> Self {
        self.checked_div(y).unwrap_or(Self::ENTIRE)
    }
}

impl Neg for RigorousScalar {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add<f64> for RigorousScalar {
    type Output = Self;
    fn add(self, y: f64) -> Self {
        self + Self::point(y)
    }
}

impl Sub<f64> for RigorousScalar {
    type Output = Self;
    fn sub(self, y: f64) -> Self {
        self - Self::point(y)
    }
}

impl Mul<f64> for RigorousScalar {
    type Output = Self;
    fn mul(self, y: f64) -> Self {
        self * Self::point(y)
    }
}

impl AddAssign for RigorousScalar {
    fn add_assign(&mut self, y: Self) {
        *self = *self + y;
    }
}

impl SubAssign for RigorousScalar {
    fn sub_assign(&mut self, y: Self) {
        *self = *self - y;
    }
}

impl core::iter::Sum for RigorousScalar {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

/// Operation selector for [`iv_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IvOp {
    Add,
    Sub,
    Mul,
    Div,
    Abs,
    Max,
}

/// Applies `op` to `x` and `y` (`y` is ignored for `Abs`).
pub fn iv_arith(
    op: IvOp,
    x: RigorousScalar,
    y: RigorousScalar,
) -> Result<RigorousScalar, RigorError> {
    Ok(match op {
        IvOp::Add => x + y,
        IvOp::Sub => x - y,
        IvOp::Mul => x * y,
        IvOp::Div => x.checked_div(y)?,
        IvOp::Abs => x.abs(),
        IvOp::Max => x.max(y),
    })
}

/// Dense row-major matrix of intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct RigorousMatrix {
    rows: usize,
    cols: usize,
    data: Vec<RigorousScalar>,
}

impl RigorousMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![RigorousScalar::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, RigorousScalar::ONE);
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> RigorousScalar,
    ) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Point matrix from row-major values.
    pub fn from_f64(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| RigorousScalar::point(values[i * cols + j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> RigorousScalar {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: RigorousScalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<RigorousScalar> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mid(&self) -> Vec<f64> {
        self.data.iter().map(|x| x.mid()).collect()
    }

    /// Interval product.
    pub fn matmul(&self, other: &Self) -> Result<Self, RigorError> {
        if self.cols != other.rows {
            return Err(RigorError::Dimension);
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == RigorousScalar::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(l, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }
}

/// Approximate inverse of a dense row-major matrix by Gauss-Jordan elimination
/// with partial pivoting. Returns `None` on an exactly zero pivot.
pub fn approx_inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let mut p = c;
        for r in c + 1..n {
            if m[r * n + c].abs() > m[p * n + c].abs() {
                p = r;
            }
        }
        let piv = m[p * n + c];
        if piv == 0.0 || !piv.is_finite() {
            return None;
        }
        if p != c {
            for j in 0..n {
                m.swap(p * n + j, c * n + j);
                inv.swap(p * n + j, c * n + j);
            }
        }
        for j in 0..n {
            m[c * n + j] /= piv;
            inv[c * n + j] /= piv;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = m[r * n + c];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m[r * n + j] -= f * m[c * n + j];
                inv[r * n + j] -= f * inv[c * n + j];
            }
        }
    }
    Some(inv)
}

/// Verified enclosure of `A⁻¹B` for every member of the interval matrices.
///
/// A floating approximate inverse `C` of `mid(A)` preconditions the problem;
/// with `R = I - CA` and `‖R‖₁ < 1` (max column sum), every solution column
/// obeys `X_j ∈ CB_j + R X_j` and `‖X_j‖₁ ≤ ‖CB_j‖₁ / (1 - ‖R‖₁)`.
pub fn iv_gauss_solve(
    a: &RigorousMatrix,
    b: &RigorousMatrix,
) -> Result<RigorousMatrix, RigorError> {
    let n = a.rows;
    if a.cols != n || b.rows != n {
        return Err(RigorError::Dimension);
    }
    let c = approx_inverse(&a.mid(), n).ok_or(RigorError::Unverifiable {
        residual: f64::INFINITY,
    })?;
    let cm = RigorousMatrix::from_f64(n, n, &c);
    let ca = cm.matmul(a)?;
    let mut row_mag = vec![0.0f64; n];
    let mut col_sum = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n {
            let e = if i == j { RigorousScalar::ONE } else { RigorousScalar::ZERO };
            let r = (e - ca.get(i, j)).mag();
            row_mag[i] = row_mag[i].max(r);
            col_sum[j] = add_up(col_sum[j], r);
        }
    }
    let eps = col_sum.iter().cloned().fold(0.0f64, f64::max);
    if !(eps < 1.0) {
        return Err(RigorError::Unverifiable { residual: eps });
    }
    let denom = dn(1.0 - eps);
    let z = cm.matmul(b)?;
    let mut out = z.clone();
    for j in 0..b.cols {
        let mut zn = 0.0f64;
        for i in 0..n {
            zn = add_up(zn, z.get(i, j).mag());
        }
        let xn = div_up(zn, denom);
        for i in 0..n {
            let r = mul_up(row_mag[i], xn);
            out.set(i, j, z.get(i, j) + RigorousScalar::new(-r, r));
        }
    }
    Ok(out)
}
