//! R matrix on the tensor product of two truncated auxiliary spaces.
//!
//! The pair `|i⟩⊗|j⟩` has index `i·N + j`. Every factor preserves the total
//! level `i + j`, so on the triangle `i + j ≤ N − 3` the truncated operators
//! act exactly and residuals there carry no truncation error.

use super::aux::{XMatrix, XVariant};
use super::boundary::{v_coefficients, vt_coefficients};
use crate::error::{Error, Result};
use crate::numerics::max_abs;
use crate::qspecial::{pochhammer_ratio_series, qpoch_inf, qpow, ABParameters};
use crate::{re, CMatrix, C64};

/// Diagonal `f(z) = (q^{k+1})_∞/(zq^k)_∞` on level `k` of one factor.
fn f_diag(z: C64, q: f64, n: usize) -> Result<Vec<C64>> {
    (0..n)
        .map(|k| {
            let den = qpoch_inf(z * qpow(q, k), q);
            if den.norm() < 1e-14 {
                Err(Error::Pole(format!("(z q^{k})_∞ vanishes at z = {z}")))
            } else {
                Ok(qpoch_inf(re(qpow(q, k + 1)), q) / den)
            }
        })
        .collect()
}

/// `f` acting on factor `slot` (1 or 2) of the pair.
pub fn f_factor(slot: usize, z: C64, q: f64, n: usize) -> Result<CMatrix> {
    let f = f_diag(z, q, n)?;
    Ok(CMatrix::from_fn(n * n, n * n, |r, c| {
        if r != c {
            re(0.0)
        } else if slot == 1 {
            f[r / n]
        } else {
            f[r % n]
        }
    }))
}

/// `Σ_k c_k Z^k` with `Z|i,j⟩ = |i+dir, j−dir⟩`.
fn shift_series(coeffs: &[C64], dir: isize, n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n * n, n * n);
    for i in 0..n as isize {
        for j in 0..n as isize {
            for (k, &c) in coeffs.iter().enumerate() {
                let (ti, tj) = (i + dir * k as isize, j - dir * k as isize);
                if ti < 0 || tj < 0 || ti >= n as isize || tj >= n as isize {
                    break;
                }
                m[((ti * n as isize + tj) as usize, (i * n as isize + j) as usize)] = c;
            }
        }
    }
    m
}

/// `g⁻(y, y') = (yZ)_∞/(y'Z)_∞`, `Z = S₁S₂⁻¹`.
pub fn g_minus(y: C64, yp: C64, q: f64, n: usize) -> CMatrix {
    shift_series(&pochhammer_ratio_series(&[y], &[yp], q, n), 1, n)
}

/// `g⁺(x, x') = (x'Z⁻¹)_∞/(xZ⁻¹)_∞`.
pub fn g_plus(x: C64, xp: C64, q: f64, n: usize) -> CMatrix {
    shift_series(&pochhammer_ratio_series(&[xp], &[x], q, n), -1, n)
}

/// Factors of `R(x, y, x', y') = R_y(x, y, x', y') R_x(x, y', x', y)` and
/// their inverses.
#[derive(Clone, Debug)]
pub struct RFactors {
    pub n: usize,
    /// `f₂(x'y') g⁻(y, y') f₂(x'y)⁻¹`.
    pub r_y: CMatrix,
    /// `f₁(xy') g⁺(x, x') f₁(x'y')⁻¹`.
    pub r_x: CMatrix,
    pub r: CMatrix,
    pub r_inv: CMatrix,
}

fn diag_inv(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| if r == c { 1.0 / m[(r, r)] } else { re(0.0) })
}

/// `a·b`, skipping the zero entries of `b`. Every factor here is block
/// diagonal in the total level or has a few entries per row, so this is far
/// cheaper than a dense product.
pub fn sparse_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut c = CMatrix::zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        for k in 0..b.nrows() {
            let v = b[(k, j)];
            if v != re(0.0) {
                c.column_mut(j).axpy(v, &a.column(k), re(1.0));
            }
        }
    }
    c
}

/// `R_y(x, y, x', y')`, exchanging `y ↔ y'`.
pub fn r_y(x: C64, y: C64, xp: C64, yp: C64, q: f64, n: usize) -> Result<(CMatrix, CMatrix)> {
    let _ = x;
    let fa = f_factor(2, xp * yp, q, n)?;
    let fb = f_factor(2, xp * y, q, n)?;
    let fwd = sparse_mul(&sparse_mul(&fa, &g_minus(y, yp, q, n)), &diag_inv(&fb));
    let inv = sparse_mul(&sparse_mul(&fb, &g_minus(yp, y, q, n)), &diag_inv(&fa));
    Ok((fwd, inv))
}

/// `R_x(x, y, x', y')`, exchanging `x ↔ x'`.
pub fn r_x(x: C64, y: C64, xp: C64, yp: C64, q: f64, n: usize) -> Result<(CMatrix, CMatrix)> {
    let _ = yp;
    let fa = f_factor(1, x * y, q, n)?;
    let fb = f_factor(1, xp * y, q, n)?;
    let fwd = sparse_mul(&sparse_mul(&fa, &g_plus(x, xp, q, n)), &diag_inv(&fb));
    let inv = sparse_mul(&sparse_mul(&fb, &g_plus(xp, x, q, n)), &diag_inv(&fa));
    Ok((fwd, inv))
}

/// All factors of the R matrix at truncation `n`.
pub fn r_factors(x: C64, y: C64, xp: C64, yp: C64, q: f64, n: usize) -> Result<RFactors> {
    let (ry, ry_inv) = r_y(x, y, xp, yp, q, n)?;
    let (rx, rx_inv) = r_x(x, yp, xp, y, q, n)?;
    let r = sparse_mul(&ry, &rx);
    let r_inv = sparse_mul(&rx_inv, &ry_inv);
    Ok(RFactors { n, r_y: ry, r_x: rx, r, r_inv })
}

/// Indices `i·N + j` with `i + j ≤ N − 3`.
pub fn safe_indices(n: usize) -> Vec<usize> {
    (0..n * n).filter(|&k| k / n + k % n + 3 <= n).collect()
}

/// `Σ_s X₁_{τ's} ⊗ X₂_{sτ}` for all four physical pairs.
fn row_pair(x1: &XMatrix, x2: &XMatrix) -> [[CMatrix; 2]; 2] {
    let a = x1.dense_blocks();
    let b = x2.dense_blocks();
    std::array::from_fn(|tp| {
        std::array::from_fn(|t| a[tp][0].kronecker(&b[0][t]) + a[tp][1].kronecker(&b[1][t]))
    })
}

fn restricted(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

/// `max ‖(X₁(l)X₂(l') R − R X₁(r)X₂(r'))‖` on the safe triangle, relative to
/// `‖X₁X₂R‖`.
fn exchange_residual(l: (C64, C64), lp: (C64, C64), r: (C64, C64), rp: (C64, C64), rm: &CMatrix, q: f64, n: usize) -> Result<f64> {
    let left = row_pair(&XMatrix::new(l.0, l.1, q, n, XVariant::Standard)?, &XMatrix::new(lp.0, lp.1, q, n, XVariant::Standard)?);
    let right = row_pair(&XMatrix::new(r.0, r.1, q, n, XVariant::Standard)?, &XMatrix::new(rp.0, rp.1, q, n, XVariant::Standard)?);
    let idx = safe_indices(n);
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for tp in 0..2 {
        for t in 0..2 {
            let a = sparse_mul(&left[tp][t], rm);
            let b = sparse_mul(rm, &right[tp][t]);
            num = num.max(max_abs(&restricted(&(&a - &b), &idx)));
            den = den.max(max_abs(&restricted(&a, &idx)));
        }
    }
    Ok(num / den.max(1e-300))
}

/// Residuals of the three exchange relations `[R_y, R_x, R]`.
pub fn exchange_residuals(x: C64, y: C64, xp: C64, yp: C64, q: f64, n: usize) -> Result<[f64; 3]> {
    let f = r_factors(x, y, xp, yp, q, n)?;
    let (rx, _) = r_x(x, y, xp, yp, q, n)?;
    Ok([
        exchange_residual((x, y), (xp, yp), (x, yp), (xp, y), &f.r_y, q, n)?,
        exchange_residual((x, y), (xp, yp), (xp, y), (x, yp), &rx, q, n)?,
        exchange_residual((x, y), (xp, yp), (xp, yp), (x, y), &f.r, q, n)?,
    ])
}

/// `‖R⁻¹(x,x;y,y)|V(x)⟩⟩|Ṽ(y)⟩⟩ − |V(y)⟩⟩|Ṽ(x)⟩⟩‖` on the safe triangle,
/// relative to the size of the right-hand side.
pub fn boundary_action_residual(x: C64, y: C64, ab: &ABParameters, q: f64, n: usize) -> Result<f64> {
    let f = r_factors(x, x, y, y, q, n)?;
    let kron = |a: &[C64], b: &[C64]| nalgebra::DVector::from_fn(n * n, |k, _| a[k / n] * b[k % n]);
    let lhs = &f.r_inv * kron(&v_coefficients(x, ab, q, n), &vt_coefficients(y, ab, q, n));
    let rhs = kron(&v_coefficients(y, ab, q, n), &vt_coefficients(x, ab, q, n));
    let idx = safe_indices(n);
    let num = idx.iter().fold(0.0f64, |m, &k| m.max((lhs[k] - rhs[k]).norm()));
    let den = idx.iter().fold(0.0f64, |m, &k| m.max(rhs[k].norm()));
    Ok(num / den.max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverses_are_exact() {
        let n = 10;
        let f = r_factors(re(0.2), re(0.3), re(0.15), re(0.25), 0.4, n).unwrap();
        let id = CMatrix::identity(n * n, n * n);
        assert!(max_abs(&(&f.r * &f.r_inv - id)) < 1e-12);
    }

    #[test]
    fn equal_parameters_give_identity() {
        let n = 8;
        let f = r_factors(re(0.2), re(0.3), re(0.2), re(0.3), 0.4, n).unwrap();
        assert!(max_abs(&(&f.r - CMatrix::identity(n * n, n * n))) < 1e-14);
    }

    #[test]
    fn exchange_relations_hold() {
        let r = exchange_residuals(re(0.2), re(0.3), re(0.15), re(0.25), 0.4, 16).unwrap();
        for v in r {
            assert!(v < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn boundary_action_holds() {
        let ab = ABParameters::new(0.0, 0.0, 0.3, -0.2);
        let r = boundary_action_residual(re(0.3), re(-0.25), &ab, 0.4, 16).unwrap();
        assert!(r < 1e-10, "{r}");
    }
}
