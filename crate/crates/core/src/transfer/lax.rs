//! Two-level blocks rewritten as Lax matrices in the variable
//! `λ = (1+qx)/(q(1+x))`, and the matching boundary matrices `K̂±₂(λ)`.
//!
//! Lax matrices are `4×4` with the physical index outermost: entry
//! `(τ'·2 + a, τ·2 + b)`.

use super::aux::{XMatrix, XVariant};
use super::kplus::kminus2_display;
use crate::error::{domain, Result};
use crate::markov_oracle::BoundaryRates;
use crate::qspecial::{ab_from_rates, ABParameters};
use crate::{re, CMatrix, C64};

/// Lax matrices of one site at spectral value `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxBlock {
    pub lambda: C64,
    pub x: C64,
    /// `L(λ)`, from `X₂(x)`.
    pub l: CMatrix,
    /// `L̄(λ)`, from `X̄₂(x)`.
    pub l_bar: CMatrix,
}

/// `x = −(1 − qλ)/(q(1 − λ))`.
pub fn x_of_lambda(lambda: C64, q: f64) -> Result<C64> {
    if q == 0.0 || (1.0 - lambda).norm() < 1e-300 {
        return domain(format!("x(λ) is undefined at λ = {lambda}, q = {q}"));
    }
    Ok(-(1.0 - q * lambda) / (q * (1.0 - lambda)))
}

/// `λ = (1+qx)/(q(1+x))`.
pub fn lambda_of_x(x: C64, q: f64) -> C64 {
    (1.0 + q * x) / (q * (1.0 + x))
}

impl LaxBlock {
    pub fn new(lambda: C64, q: f64) -> Result<Self> {
        let x = x_of_lambda(lambda, q)?;
        let y = 1.0 / (q * x);
        let x2 = XMatrix::new(x, y, q, 2, XVariant::Standard)?.physical_outer();
        let xb = XMatrix::new(y, x, q, 2, XVariant::Contragredient)?.physical_outer();
        let s = 1.0 / (1.0 + x);
        // L = (1/(1+x)) (diag_aux(1, −q) X₂ diag_aux(1, −1/q)) · diag_phys(1, x)
        let aux_sign = [re(1.0), re(-q)];
        let l = CMatrix::from_fn(4, 4, |r, c| {
            let (a, t, b) = (r & 1, c >> 1, c & 1);
            let phys = if t == 1 { x } else { re(1.0) };
            x2[(r, c)] * aux_sign[a] / aux_sign[b] * phys * s
        });
        // L̄ = (1/(1+x)) diag_phys(x, 1) · (swap_aux X̄₂ swap_aux)
        let l_bar = CMatrix::from_fn(4, 4, |r, c| {
            let (tp, a, t, b) = (r >> 1, r & 1, c >> 1, c & 1);
            let phys = if tp == 0 { x } else { re(1.0) };
            phys * xb[(tp * 2 + (1 - a), t * 2 + (1 - b))] * s
        });
        Ok(Self { lambda, x, l, l_bar })
    }
}

/// `K̂⁺₂(λ) = (1−1/q²x²)/((1−b/qx)(1−b̃/qx)) · diag(1,−q) K⁺₂ swap`, written
/// so that the removable singularity at `λ = 0` is cancelled analytically.
pub fn khat_plus(lambda: C64, ab: &ABParameters, q: f64) -> Result<[[C64; 2]; 2]> {
    let x = x_of_lambda(lambda, q)?;
    let (b, bt) = (ab.b, ab.b_tilde);
    let qx = q * x;
    let den = (1.0 - b / qx) * (1.0 - bt / qx);
    if den.norm() < 1e-14 {
        return domain(format!("K̂⁺₂ has a pole at λ = {lambda}"));
    }
    let vanish = 1.0 - 1.0 / (qx * qx);
    // (1 − 1/q²x²)/(q²x² − 1) = 1/q²x²
    let off_01 = qx * (qx + qx * b * bt - b - bt) / (qx * qx);
    let off_10 = x * (1.0 + b * bt - qx * b - qx * bt) / (qx * qx);
    Ok([
        [off_01 / den, vanish / den],
        [-q * (-x * b * bt) * vanish / den, -q * off_10 / den],
    ])
}

/// `K̂⁻₂(λ) = (1−1/qx²)/((1−a/qx)(1−ã/qx)) · swap K⁻₂ diag(1,−1/q)`.
pub fn khat_minus(lambda: C64, ab: &ABParameters, q: f64) -> Result<[[C64; 2]; 2]> {
    let x = x_of_lambda(lambda, q)?;
    let (a, at) = (ab.a, ab.a_tilde);
    let qx = q * x;
    let den = (1.0 - a / qx) * (1.0 - at / qx);
    if den.norm() < 1e-14 {
        return domain(format!("K̂⁻₂ has a pole at λ = {lambda}"));
    }
    let pref = (1.0 - 1.0 / (q * x * x)) / den;
    let k = kminus2_display(x, ab, q)?;
    let col = [re(1.0), re(-1.0 / q)];
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| pref * k[1 - i][j] * col[j])))
}

/// Closed-form values of `K̂±₂` and their `λ`-derivatives at `λ = 0`.
#[allow(clippy::type_complexity)]
pub fn khat_expected(rates: &BoundaryRates, q: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2], [[f64; 2]; 2], [[f64; 2]; 2]) {
    let BoundaryRates { alpha: al, beta: be, gamma: ga, delta: de } = *rates;
    let kp0 = [[1.0, 0.0], [0.0, 1.0]];
    let kp1 = [[-2.0 * de, 2.0 * be], [2.0 * de, 1.0 - q - 2.0 * be]];
    let km0 = [[(1.0 - al + ga) / (1.0 + q), ga / q], [al, (al - ga + q) / (1.0 + q)]];
    let a = (2.0 + (al - 2.0) * al - ga * ga) / (1.0 + q);
    let b = 2.0 * (1.0 - al + ga) / ((1.0 + q) * (1.0 + q));
    let km1 = [
        [-al + ga + a - b, ga * (2.0 * q - al - ga) / q],
        [al * (1.0 + q - al - ga), -2.0 * ga + q - a + b],
    ];
    (kp0, kp1, km0, km1)
}

/// Deviations of `K̂±₂(0)` and `dK̂±₂/dλ(0)` from their closed forms:
/// `[K̂⁺, dK̂⁺, K̂⁻, dK̂⁻]`, each the max entry modulus.
pub fn khat_residuals(rates: &BoundaryRates, q: f64) -> Result<[f64; 4]> {
    let ab = ab_from_rates(rates, q)?;
    let (kp0, kp1, km0, km1) = khat_expected(rates, q);
    let h = 1e-5;
    let deriv = |f: &dyn Fn(C64) -> Result<[[C64; 2]; 2]>| -> Result<[[C64; 2]; 2]> {
        let (p, m) = (f(re(h))?, f(re(-h))?);
        Ok(std::array::from_fn(|i| std::array::from_fn(|j| (p[i][j] - m[i][j]) / (2.0 * h))))
    };
    let dist = |got: [[C64; 2]; 2], want: [[f64; 2]; 2]| {
        let mut m = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((got[i][j] - want[i][j]).norm());
            }
        }
        m
    };
    let plus = |l: C64| khat_plus(l, &ab, q);
    let minus = |l: C64| khat_minus(l, &ab, q);
    Ok([
        dist(plus(re(0.0))?, kp0),
        dist(deriv(&plus)?, kp1),
        dist(minus(re(0.0))?, km0),
        dist(deriv(&minus)?, km1),
    ])
}
