//! Fused boundary vectors `K±` of the product `U(x)T(y)`.
//!
//! Both are stored as `N×N` arrays `[i][j]` with `i` the level of the
//! `U`-row space and `j` that of the `T`-row space. They are normalised so
//! that `K±[0][0] = 1`.

use super::boundary::{v_coefficients, vt_coefficients};
use crate::error::{domain, Error, Result};
use crate::qspecial::{pochhammer_ratio_series, qpoch_n, qpow, ABParameters};
use crate::{re, CMatrix, C64};

/// How `K⁺` coefficients are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KMode {
    /// Closed form, valid when `b̃ = 0`.
    OneWay,
    /// Finite sum from the generating function; valid for all rates.
    TwoWay,
}

/// `(q)_k / (z²)_k` for `k < n`; these absorb `(q)_∞/(z²)_∞` and the level
/// factor of the vector that carries it.
fn normalised_levels(z: C64, q: f64, n: usize) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(n);
    let mut v = re(1.0);
    for k in 0..n {
        out.push(v);
        let den = 1.0 - z * z * qpow(q, k);
        if den.norm() < 1e-14 {
            if k + 1 < n {
                return Err(Error::Pole(format!("(z²)_{} vanishes at z = {z}", k + 1)));
            }
            break;
        }
        v *= (1.0 - qpow(q, k + 1)) / den;
    }
    Ok(out)
}

/// `K⁺(x, y)` truncated to `n×n`:
/// `K⁺ = (q)_∞/(y²)_∞ · (yZ)_∞/(xZ)_∞ · |V(x)⟩⟩|Ṽ(y)⟩⟩` with `Z = S₁S₂⁻¹`
/// and the level factor on the second vector.
pub fn kplus_matrix(x: C64, y: C64, ab: &ABParameters, q: f64, n: usize) -> Result<CMatrix> {
    let m = 2 * n;
    let v = v_coefficients(x, ab, q, n);
    let vt = vt_coefficients(y, ab, q, m);
    let lev = normalised_levels(y, q, m)?;
    let c = pochhammer_ratio_series(&[y], &[x], q, n);
    Ok(CMatrix::from_fn(n, n, |i, j| {
        (0..=i).map(|k| c[k] * v[i - k] * vt[j + k] * lev[j + k]).sum()
    }))
}

/// `K⁻(x, y)` truncated to `n×n`:
/// `K⁻ = (q)_∞/(x²)_∞ · ⟨⟨W(x)|⟨⟨W̃(y)| · (xZ)_∞/(yZ)_∞`, the level factor
/// kept on the first vector only.
pub fn kminus_matrix(x: C64, y: C64, ab: &ABParameters, q: f64, n: usize) -> Result<CMatrix> {
    let m = 2 * n;
    let w: Vec<C64> = {
        // w_coefficients includes (x²q^k)_∞/(q^{k+1})_∞; replace it by (q)_k/(x²)_k.
        let (a, at) = (re(ab.a), re(ab.a_tilde));
        let g = pochhammer_ratio_series(&[x, a * at * x], &[a, at], q, m);
        let lev = normalised_levels(x, q, m)?;
        g.iter().zip(lev).map(|(u, f)| u * f).collect()
    };
    let wt: Vec<C64> = {
        let (a, at) = (re(ab.a), re(ab.a_tilde));
        pochhammer_ratio_series(&[a * y, at * y], &[re(1.0), a * at], q, n)
    };
    let c = pochhammer_ratio_series(&[x], &[y], q, n);
    Ok(CMatrix::from_fn(n, n, |i, j| {
        (0..=j).map(|k| c[k] * w[i + k] * wt[j - k]).sum()
    }))
}

/// One-way closed form
/// `K⁺_{i,j} = (xyq^j)_i (y/b)_i b^i (by)_j / ((q)_i (y²)_{i+j})`.
pub fn kplus_one_way(i: usize, j: usize, x: C64, y: C64, b: f64, q: f64) -> Result<C64> {
    let den = qpoch_n(re(q), i, q) * qpoch_n(y * y, i + j, q);
    if den.norm() < 1e-300 {
        return Err(Error::Pole(format!("(y²)_{} vanishes at y = {y}", i + j)));
    }
    let yb: C64 = (0..i).map(|k| b - y * qpow(q, k)).product();
    Ok(qpoch_n(x * y * qpow(q, j), i, q) * yb * qpoch_n(y * b, j, q) / den)
}

/// A single coefficient `K⁺_{i,j}(x, y)`.
pub fn kplus_coeffs(i: usize, j: usize, x: C64, y: C64, ab: &ABParameters, q: f64, mode: KMode) -> Result<C64> {
    match mode {
        KMode::OneWay => {
            if ab.b_tilde != 0.0 {
                return domain("the closed form needs b̃ = 0");
            }
            kplus_one_way(i, j, x, y, ab.b, q)
        }
        KMode::TwoWay => Ok(kplus_matrix(x, y, ab, q, i.max(j) + 1)?[(i, j)]),
    }
}

/// Closed-form `2×2` block of `K⁺` at `y = 1/qx`.
pub fn kplus2_display(x: C64, ab: &ABParameters, q: f64) -> Result<[[C64; 2]; 2]> {
    let (b, bt) = (ab.b, ab.b_tilde);
    let den = q * q * x * x - 1.0;
    if den.norm() < 1e-14 {
        return Err(Error::Pole(format!("K⁺₂ has a pole at x = {x}")));
    }
    Ok([
        [re(1.0), q * x * (q * x + q * x * b * bt - b - bt) / den],
        [x * (1.0 + b * bt - q * x * b - q * x * bt) / den, -x * b * bt],
    ])
}

/// Closed-form `2×2` block of `K⁻` at `y = 1/qx` (rows index the `T`-row
/// level, i.e. the transpose of [`kminus_matrix`]).
pub fn kminus2_display(x: C64, ab: &ABParameters, q: f64) -> Result<[[C64; 2]; 2]> {
    let (a, at) = (ab.a, ab.a_tilde);
    let den = 1.0 - x * x;
    if den.norm() < 1e-14 || x.norm() == 0.0 {
        return Err(Error::Pole(format!("K⁻₂ has a pole at x = {x}")));
    }
    Ok([
        [re(1.0), (a + at - x - a * at * x) / den],
        [(a * x + at * x - 1.0 - a * at) / (q * den), -a * at / (q * x)],
    ])
}

/// Checks of the truncation structure at `xy = q^{1−p}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioCheck {
    pub p: usize,
    /// `max |K⁺_{i,j}|` over `i ≥ p`, `j < p`.
    pub zero_block: f64,
    /// Worst relative deviation of `K⁺_{i+p,j+p}(x,y)/K⁺_{i,j}(q^p x, q^p y)`
    /// from the closed-form ratio, over `i, j ≤ max_index`.
    pub ratio_error: f64,
}

/// `(x/b)_p b^p (xb)_p (y/b̃)_p b̃^p (yb̃)_p (−y)^p q^{p(p−1)/2} / (y²)_{2p}`.
fn ratio_prefactor(x: C64, y: C64, ab: &ABParameters, q: f64, p: usize) -> C64 {
    let (b, bt) = (ab.b, ab.b_tilde);
    let xb: C64 = (0..p).map(|k| b - x * qpow(q, k)).product();
    let yb: C64 = (0..p).map(|k| bt - y * qpow(q, k)).product();
    xb * qpoch_n(x * b, p, q) * yb * qpoch_n(y * bt, p, q) / qpoch_n(y * y, 2 * p, q)
        * (-y).powi(p as i32)
        * q.powf((p * (p.saturating_sub(1))) as f64 / 2.0)
}

/// Vanishing block and block-ratio law of `K⁺` at `y = q^{1−p}/x`.
pub fn truncation_ratio_check(p: usize, x: C64, ab: &ABParameters, q: f64, max_index: usize) -> Result<RatioCheck> {
    if p == 0 {
        return domain("p must be at least 1");
    }
    let y = qpow(q, 0) / (x * qpow(q, p - 1));
    let n = max_index + p + 1;
    let big = kplus_matrix(x, y, ab, q, n + p)?;
    let small = kplus_matrix(x * qpow(q, p), y * qpow(q, p), ab, q, n)?;
    let mut zero_block = 0.0f64;
    for i in p..n + p {
        for j in 0..p {
            zero_block = zero_block.max(big[(i, j)].norm());
        }
    }
    let pre = ratio_prefactor(x, y, ab, q, p);
    let mut ratio_error = 0.0f64;
    for i in 0..=max_index {
        for j in 0..=max_index {
            let expect = pre * qpoch_n(re(qpow(q, j + 1)), p, q) / qpoch_n(re(qpow(q, i + 1)), p, q);
            let got = big[(i + p, j + p)] / small[(i, j)];
            ratio_error = ratio_error.max((got / expect - 1.0).norm());
        }
    }
    Ok(RatioCheck { p, zero_block, ratio_error })
}
