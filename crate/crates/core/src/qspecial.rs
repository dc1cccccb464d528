//! q-series special functions and the algebra of the boundary parameters
//! `a, ã, b, b̃`.
//!
//! All products are in double precision. Infinite q-Pochhammer symbols are
//! truncated once the factors differ from one by less than [`POCH_TAIL`].

use crate::error::{domain, Error, Result};
use crate::markov_oracle::BoundaryRates;
use crate::{re, C64};

/// Infinite products stop once `|q^k x|` drops below this.
pub const POCH_TAIL: f64 = 1e-17;

const MAX_FACTORS: usize = 1_000_000;

/// Order of a q-Pochhammer symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Finite(usize),
    Infinite,
}

/// `q^n`, with `0^0 = 1`.
#[inline]
pub fn qpow(q: f64, n: usize) -> f64 {
    if n == 0 {
        1.0
    } else {
        q.powi(n as i32)
    }
}

/// `(x; q)_n` or `(x; q)_∞`.
pub fn qpoch(x: C64, order: Order, q: f64) -> C64 {
    match order {
        Order::Finite(n) => qpoch_n(x, n, q),
        Order::Infinite => qpoch_inf(x, q),
    }
}

/// Finite product `(x)_n = Π_{k<n} (1 − q^k x)`.
pub fn qpoch_n(x: C64, n: usize, q: f64) -> C64 {
    let mut r = re(1.0);
    let mut t = x;
    for _ in 0..n {
        r *= 1.0 - t;
        t *= q;
    }
    r
}

/// Infinite product `(x)_∞`, requires `|q| < 1`.
pub fn qpoch_inf(x: C64, q: f64) -> C64 {
    let mut r = re(1.0);
    let mut t = x;
    for _ in 0..MAX_FACTORS {
        if t.norm() < POCH_TAIL {
            break;
        }
        r *= 1.0 - t;
        t *= q;
    }
    r
}

/// `(x_1, …, x_m)_∞ = Π_i (x_i)_∞`.
pub fn qpoch_inf_prod(xs: &[C64], q: f64) -> C64 {
    xs.iter().map(|&x| qpoch_inf(x, q)).product()
}

/// Taylor coefficients `[z^0 … z^{n-1}]` of `Π_i (c_i z)_∞ / Π_j (d_j z)_∞`.
///
/// Uses the q-difference equation `G(z) Π(1 − d_j z) = G(qz) Π(1 − c_i z)`,
/// which turns into a linear recurrence of depth `max(#c, #d)`.
pub fn pochhammer_ratio_series(nums: &[C64], dens: &[C64], q: f64, n: usize) -> Vec<C64> {
    let r = linear_product(nums);
    let p = linear_product(dens);
    let depth = r.len().max(p.len());
    let mut v = vec![re(0.0); n];
    if n == 0 {
        return v;
    }
    v[0] = re(1.0);
    for k in 1..n {
        let mut s = re(0.0);
        for j in 1..depth.min(k + 1) {
            let rj = r.get(j).copied().unwrap_or_default();
            let pj = p.get(j).copied().unwrap_or_default();
            s += (rj * qpow(q, k - j) - pj) * v[k - j];
        }
        v[k] = s / (1.0 - qpow(q, k));
    }
    v
}

/// Coefficients of `Π_i (1 − c_i z)`.
fn linear_product(cs: &[C64]) -> Vec<C64> {
    let mut poly = vec![re(1.0)];
    for &c in cs {
        let mut next = vec![re(0.0); poly.len() + 1];
        for (k, &a) in poly.iter().enumerate() {
            next[k] += a;
            next[k + 1] -= a * c;
        }
        poly = next;
    }
    poly
}

/// Basic hypergeometric series `₂φ₁(a, b; c; z)` in base `q`.
pub fn hyper_2phi1(a: C64, b: C64, c: C64, z: C64, q: f64) -> Result<C64> {
    const TOL: f64 = 1e-14;
    const MAX_TERMS: usize = 100_000;
    let mut term = re(1.0);
    let mut sum = re(1.0);
    let mut small_run = 0;
    for n in 0..MAX_TERMS {
        let qn = qpow(q, n);
        let num = (1.0 - a * qn) * (1.0 - b * qn);
        if num.norm() == 0.0 {
            return Ok(sum);
        }
        let den = (1.0 - qpow(q, n + 1)) * (1.0 - c * qn);
        if den.norm() < 1e-14 {
            return Err(Error::Pole(format!("2phi1 denominator vanishes at n = {n}")));
        }
        term *= num / den * z;
        sum += term;
        if !sum.is_finite() {
            break;
        }
        if term.norm() <= TOL * sum.norm().max(1e-300) {
            small_run += 1;
            if small_run >= 3 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::Divergent(format!("2phi1 at z = {z}")))
}

/// The four boundary combinations `a, ã` (left reservoir) and `b, b̃`
/// (right reservoir).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ABParameters {
    pub a: f64,
    pub a_tilde: f64,
    pub b: f64,
    pub b_tilde: f64,
}

impl ABParameters {
    pub fn new(a: f64, a_tilde: f64, b: f64, b_tilde: f64) -> Self {
        Self { a, a_tilde, b, b_tilde }
    }

    /// All four parameters strictly inside the unit disc.
    pub fn is_max_current(&self) -> bool {
        self.all().iter().all(|v| v.abs() < 1.0)
    }

    /// `[a, ã, b, b̃]`.
    pub fn all(&self) -> [f64; 4] {
        [self.a, self.a_tilde, self.b, self.b_tilde]
    }

    /// Largest modulus among the four.
    pub fn max_abs(&self) -> f64 {
        self.all().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// One-way boundaries (`ã = b̃ = 0`).
    pub fn is_one_way(&self) -> bool {
        self.a_tilde == 0.0 && self.b_tilde == 0.0
    }
}

fn radical_pair(rate_in: f64, rate_back: f64, q: f64) -> (f64, f64) {
    let s = 1.0 - q - rate_in + rate_back;
    let d = (s * s + 4.0 * rate_in * rate_back).sqrt();
    ((s + d) / (2.0 * rate_in), (s - d) / (2.0 * rate_in))
}

/// Rates → `(a, ã, b, b̃)`.
pub fn ab_from_rates(rates: &BoundaryRates, q: f64) -> Result<ABParameters> {
    if !(rates.alpha > 0.0) || !(rates.beta > 0.0) {
        return domain(format!(
            "alpha and beta must be positive (alpha = {}, beta = {})",
            rates.alpha, rates.beta
        ));
    }
    let s_left = (1.0 - q - rates.alpha + rates.gamma).powi(2) + 4.0 * rates.alpha * rates.gamma;
    let s_right = (1.0 - q - rates.beta + rates.delta).powi(2) + 4.0 * rates.beta * rates.delta;
    if s_left < 0.0 || s_right < 0.0 {
        return domain("negative discriminant in the boundary-parameter map");
    }
    let (a, a_tilde) = radical_pair(rates.alpha, rates.gamma, q);
    let (b, b_tilde) = radical_pair(rates.beta, rates.delta, q);
    Ok(ABParameters { a, a_tilde, b, b_tilde })
}

/// `(a, ã, b, b̃)` → rates.
pub fn rates_from_ab(ab: &ABParameters, q: f64) -> BoundaryRates {
    let left = (1.0 + ab.a) * (1.0 + ab.a_tilde);
    let right = (1.0 + ab.b) * (1.0 + ab.b_tilde);
    BoundaryRates {
        alpha: (1.0 - q) / left,
        gamma: -ab.a * ab.a_tilde * (1.0 - q) / left,
        beta: (1.0 - q) / right,
        delta: -ab.b * ab.b_tilde * (1.0 - q) / right,
    }
}

/// Which boundary parameters enter `h_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HbMode {
    /// Only `a` and `b`.
    OneWay,
    /// All of `a, ã, b, b̃`.
    TwoWay,
}

/// Boundary normalisation `h_b(x) = (x²)_∞ / (ax, ãx, bx, b̃x)_∞`.
pub fn hb(x: C64, ab: &ABParameters, q: f64, mode: HbMode) -> Result<C64> {
    let params: &[f64] = match mode {
        HbMode::OneWay => &[ab.a, ab.b],
        HbMode::TwoWay => &[ab.a, ab.a_tilde, ab.b, ab.b_tilde],
    };
    let den: C64 = params.iter().map(|&s| qpoch_inf(x * s, q)).product();
    if den.norm() < 1e-14 {
        return Err(Error::Pole(format!("h_b denominator vanishes at x = {x}")));
    }
    Ok(qpoch_inf(x * x, q) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn finite_products() {
        assert_eq!(qpoch_n(re(0.7), 0, 0.3), re(1.0));
        assert!(close(qpoch_n(re(0.4), 5, 0.0), re(0.6), 1e-15));
        assert!(close(qpoch(re(0.5), Order::Finite(2), 0.5), re(0.375), 1e-15));
    }

    #[test]
    fn infinite_product_euler() {
        // Euler: 1/(z)_∞ = Σ z^n/(q)_n.
        let (q, z): (f64, f64) = (0.45, 0.3);
        let mut s = 0.0;
        for n in 0..200 {
            s += z.powi(n) / qpoch_n(re(q), n as usize, q).re;
        }
        assert!((1.0 / qpoch_inf(re(z), q).re - s).abs() < 1e-14);
    }

    #[test]
    fn ratio_series_matches_q_binomial() {
        // (az)_∞/(z)_∞ = Σ (a)_n/(q)_n z^n.
        let (q, a) = (0.35, C64::new(0.4, -0.2));
        let v = pochhammer_ratio_series(&[a], &[re(1.0)], q, 20);
        for (n, vn) in v.iter().enumerate() {
            let expect = qpoch_n(a, n, q) / qpoch_n(re(q), n, q);
            assert!(close(*vn, expect, 1e-13), "n={n}");
        }
    }

    #[test]
    fn ratio_series_at_q_zero() {
        // q = 0: (1 − cz)/(1 − dz).
        let v = pochhammer_ratio_series(&[re(0.3)], &[re(0.5)], 0.0, 6);
        assert!(close(v[0], re(1.0), 1e-15));
        for n in 1..6 {
            let expect = 0.5f64.powi(n as i32) - 0.3 * 0.5f64.powi(n as i32 - 1);
            assert!(close(v[n], re(expect), 1e-15));
        }
    }

    #[test]
    fn two_phi_one_basic() {
        let q = 0.3;
        assert_eq!(hyper_2phi1(re(0.2), re(0.1), re(0.5), re(0.0), q).unwrap(), re(1.0));
        // a = b = c = q: Σ (q)_n z^n/(q)_n = 1/(1 − z).
        let v = hyper_2phi1(re(q), re(q), re(q), re(0.2), q).unwrap();
        assert!(close(v, re(1.0 / 0.8), 1e-14));
    }

    #[test]
    fn heine_transformation() {
        let (a, b, c, z, q) = (re(0.2), re(0.3), re(0.4), re(0.25), 0.5);
        let lhs = hyper_2phi1(a, b, c, z, q).unwrap();
        let w = z * a * b / c;
        let rhs = qpoch_inf(w, q) / qpoch_inf(z, q) * hyper_2phi1(c / a, c / b, c, w, q).unwrap();
        assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    }

    #[test]
    fn two_phi_one_divergent() {
        let r = hyper_2phi1(re(0.2), re(0.3), re(0.4), re(1.5), 0.5);
        assert!(matches!(r, Err(Error::Divergent(_))));
    }

    #[test]
    fn ab_examples() {
        let r = BoundaryRates::new(1.0, 1.0, 0.0, 0.0);
        let ab = ab_from_rates(&r, 0.0).unwrap();
        assert_eq!((ab.a, ab.a_tilde), (0.0, 0.0));
        let r = BoundaryRates::new(0.5, 1.0, 0.0, 0.0);
        let ab = ab_from_rates(&r, 0.0).unwrap();
        assert!((ab.a - 1.0).abs() < 1e-15 && ab.a_tilde == 0.0);
        assert!(ab_from_rates(&BoundaryRates::new(0.0, 1.0, 0.1, 0.1), 0.2).is_err());
    }

    #[test]
    fn hb_examples() {
        let zero = ABParameters::new(0.0, 0.0, 0.0, 0.0);
        let x = re(0.37);
        assert!(close(hb(x, &zero, 0.4, HbMode::TwoWay).unwrap(), qpoch_inf(x * x, 0.4), 1e-15));
        let ab = ABParameters::new(0.5, 0.0, 0.5, 0.0);
        let v = hb(re(0.2), &ab, 0.0, HbMode::OneWay).unwrap();
        assert!(close(v, re(0.96 / 0.81), 1e-15));
        assert!(close(hb(re(0.0), &ab, 0.3, HbMode::TwoWay).unwrap(), re(1.0), 1e-15));
        let pole = ABParameters::new(2.0, 0.0, 0.0, 0.0);
        assert!(hb(re(0.5), &pole, 0.0, HbMode::OneWay).is_err());
    }

    fn cplx() -> impl Strategy<Value = C64> {
        (-0.9f64..0.9, -0.9f64..0.9).prop_map(|(a, b)| C64::new(a, b))
    }

    proptest! {
        #[test]
        fn split_identity(x in cplx(), q in 0.0f64..0.9, j in 0usize..8, k in 0usize..8) {
            let lhs = qpoch_n(x, j + k, q);
            let rhs = qpoch_n(x, j, q) * qpoch_n(x * qpow(q, j), k, q);
            prop_assert!(close(lhs, rhs, 1e-14));
        }

        #[test]
        fn infinite_tail_is_converged(x in cplx(), q in 0.0f64..0.95) {
            // Doubling the depth past the cut-off changes nothing measurable.
            let a = qpoch_inf(x, q);
            let mut b = re(1.0);
            let mut t = x;
            for _ in 0..4000 {
                b *= 1.0 - t;
                t *= q;
            }
            prop_assert!(close(a, b, 1e-14));
        }

        #[test]
        fn rates_roundtrip(a in 0.0f64..0.95, at in -0.95f64..0.0, b in 0.0f64..0.95,
                           bt in -0.95f64..0.0, q in 0.0f64..0.9) {
            let ab = ABParameters::new(a, at, b, bt);
            let rates = rates_from_ab(&ab, q);
            let back = ab_from_rates(&rates, q).unwrap();
            prop_assert!((back.a - a).abs() < 1e-10);
            prop_assert!((back.a_tilde - at).abs() < 1e-10);
            prop_assert!((back.b - b).abs() < 1e-10);
            prop_assert!((back.b_tilde - bt).abs() < 1e-10);
        }

        #[test]
        fn ab_roundtrip_from_rates(al in 0.05f64..3.0, be in 0.05f64..3.0, ga in 0.0f64..2.0,
                                   de in 0.0f64..2.0, q in 0.0f64..0.9) {
            let r = BoundaryRates::new(al, be, ga, de);
            let back = rates_from_ab(&ab_from_rates(&r, q).unwrap(), q);
            prop_assert!((back.alpha - al).abs() < 1e-9 * (1.0 + al));
            prop_assert!((back.beta - be).abs() < 1e-9 * (1.0 + be));
            prop_assert!((back.gamma - ga).abs() < 1e-9 * (1.0 + ga));
            prop_assert!((back.delta - de).abs() < 1e-9 * (1.0 + de));
        }

        #[test]
        fn exchange_relation_of_two_sums(a in cplx(), b in cplx(), x in cplx(), y in cplx(),
                                         q in 0.0f64..0.9, n in 0usize..9) {
            let side = |a: C64, b: C64, x: C64, y: C64| -> C64 {
                (0..=n).map(|k| {
                    qpoch_n(a, k, q) * qpoch_n(b, n - k, q)
                        / (qpoch_n(re(q), k, q) * qpoch_n(re(q), n - k, q))
                        * x.powu(k as u32) * y.powu((n - k) as u32)
                }).sum()
            };
            prop_assume!(x.norm() > 0.1 && y.norm() > 0.1);
            let lhs = side(a, b, x, y);
            let rhs = side(a * x / y, b * y / x, y, x);
            prop_assert!(close(lhs, rhs, 1e-10));
        }

        #[test]
        fn q_leibniz(fc in proptest::collection::vec(-1.0f64..1.0, 1..5),
                     gc in proptest::collection::vec(-1.0f64..1.0, 1..5),
                     q in 0.05f64..0.9, x in 0.2f64..1.5, n in 0usize..6) {
            // D_x f = (f(x) − f(qx))/x applied symbolically to polynomials.
            fn dq(c: &[f64], q: f64) -> Vec<f64> {
                (1..c.len()).map(|k| c[k] * (1.0 - q.powi(k as i32))).collect()
            }
            fn dqn(c: &[f64], q: f64, n: usize) -> Vec<f64> {
                let mut v = c.to_vec();
                for _ in 0..n { v = dq(&v, q); }
                v
            }
            fn ev(c: &[f64], x: f64) -> f64 {
                c.iter().rev().fold(0.0, |s, &a| s * x + a)
            }
            let mut prod = vec![0.0; fc.len() + gc.len() - 1];
            for (i, a) in fc.iter().enumerate() {
                for (j, b) in gc.iter().enumerate() { prod[i + j] += a * b; }
            }
            let lhs = ev(&dqn(&prod, q, n), x);
            let qn = |m: usize| qpoch_n(re(q), m, q).re;
            let rhs: f64 = (0..=n).map(|k| {
                qn(n) / (qn(k) * qn(n - k))
                    * ev(&dqn(&fc, q, k), q.powi((n - k) as i32) * x)
                    * ev(&dqn(&gc, q, n - k), x)
            }).sum();
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        }
    }
}
