use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rigpde::rigor::iv_gauss_solve;
use rigpde::{RigorousMatrix, RigorousScalar};

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn holds(iv: RigorousScalar, exact: &BigRational) -> bool {
    let lo_ok = iv.lo() == f64::NEG_INFINITY || q(iv.lo()) <= *exact;
    let hi_ok = iv.hi() == f64::INFINITY || *exact <= q(iv.hi());
    lo_ok && hi_ok
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        -1.0f64..1.0,
        (-300i32..300, -1.0f64..1.0).prop_map(|(e, m)| m * 2f64.powi(e)),
        Just(0.0),
        Just(1.0 / 3.0),
    ]
}

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (finite(), finite()).prop_map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
}

/// Endpoints and the exact midpoint of `[lo, hi]`.
fn members(lo: f64, hi: f64) -> Vec<BigRational> {
    let (a, b) = (q(lo), q(hi));
    let m = (&a + &b) / BigRational::from_integer(BigInt::from(2));
    vec![a, b, m]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn arithmetic_encloses_exact((xl, xh) in interval(), (yl, yh) in interval()) {
        let x = RigorousScalar::new(xl, xh);
        let y = RigorousScalar::new(yl, yh);
        for a in members(xl, xh) {
            for b in members(yl, yh) {
                prop_assert!(holds(x + y, &(&a + &b)));
                prop_assert!(holds(x - y, &(&a - &b)));
                prop_assert!(holds(x * y, &(&a * &b)));
                prop_assert!(holds(x.sqr(), &(&a * &a)));
                prop_assert!(holds(x.abs(), &a.abs()));
                if !b.is_zero() {
                    if let Ok(d) = x.checked_div(y) {
                        prop_assert!(holds(d, &(&a / &b)));
                    }
                }
            }
        }
    }

    #[test]
    fn division_by_zero_interval_errors((xl, xh) in interval(), w in 0.0f64..5.0) {
        let x = RigorousScalar::new(xl, xh);
        prop_assert!(x.checked_div(RigorousScalar::new(-w, w)).is_err());
    }

    #[test]
    fn sqrt_brackets(lo in 0.0f64..1e8, w in 0.0f64..1e3) {
        let s = RigorousScalar::new(lo, lo + w).sqrt();
        prop_assert!(q(s.lo()) * q(s.lo()) <= q(lo));
        prop_assert!(q(s.hi()) * q(s.hi()) >= q(lo + w));
    }

    #[test]
    fn powi_encloses((xl, xh) in interval(), n in 0u32..6) {
        let x = RigorousScalar::new(xl, xh);
        for a in members(xl, xh) {
            let mut p = BigRational::from_integer(BigInt::from(1));
            for _ in 0..n {
                p *= &a;
            }
            prop_assert!(holds(x.powi(n), &p));
        }
    }
}

fn rational_solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Vec<BigRational> {
    let n = b.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut r = r.clone();
            r.push(v.clone());
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero()).unwrap();
        m.swap(c, p);
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[c][c];
                for k in c..=n {
                    let t = &f * &m[c][k];
                    m[r][k] -= t;
                }
            }
        }
    }
    (0..n).map(|i| &m[i][n] / &m[i][i]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_solve_encloses_rational(
        n in 2usize..7,
        seed in proptest::collection::vec(-1.0f64..1.0, 49 + 7),
    ) {
        // diagonally dominant, so the verification must succeed
        let mut vals = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                vals[i * n + j] = if i == j { 4.0 + seed[i * 7 + j] } else { seed[i * 7 + j] };
            }
        }
        let rhs: Vec<f64> = seed[49..49 + n].to_vec();
        let a = RigorousMatrix::from_f64(n, n, &vals);
        let b = RigorousMatrix::from_f64(n, 1, &rhs);
        let x = iv_gauss_solve(&a, &b).unwrap();
        let qa: Vec<Vec<BigRational>> = (0..n).map(|i| (0..n).map(|j| q(vals[i * n + j])).collect()).collect();
        let qb: Vec<BigRational> = rhs.iter().map(|&v| q(v)).collect();
        let exact = rational_solve(&qa, &qb);
        for i in 0..n {
            prop_assert!(holds(x.get(i, 0), &exact[i]), "row {}", i);
        }
    }
}

#[test]
fn gauss_solve_interval_matrix_covers_members() {
    // every member of [A] has its solution inside the enclosure
    let n = 3;
    let base = [3.0, 0.5, -0.25, 0.125, 2.5, 0.5, -0.5, 0.25, 4.0];
    let a = RigorousMatrix::from_fn(n, n, |i, j| RigorousScalar::ball(base[i * n + j], 1e-3));
    let b = RigorousMatrix::from_f64(n, 1, &[1.0, -2.0, 0.5]);
    let x = iv_gauss_solve(&a, &b).unwrap();
    for corner in 0..8u32 {
        let vals: Vec<f64> = (0..n * n)
            .map(|idx| {
                let s = if (corner >> (idx % 3)) & 1 == 1 { 1e-3 } else { -1e-3 };
                base[idx] + if idx % 4 == 0 { s } else { -s }
            })
            .collect();
        let qa: Vec<Vec<BigRational>> = (0..n).map(|i| (0..n).map(|j| q(vals[i * n + j])).collect()).collect();
        let exact = rational_solve(&qa, &[q(1.0), q(-2.0), q(0.5)]);
        for i in 0..n {
            assert!(holds(x.get(i, 0), &exact[i]));
        }
    }
}

#[test]
fn ratio_encloses_one_third() {
    let t = RigorousScalar::ratio(1.0, 3.0);
    let third = BigRational::new(BigInt::from(1), BigInt::from(3));
    assert!(holds(t, &third));
    assert!(t.width() > 0.0);
}
