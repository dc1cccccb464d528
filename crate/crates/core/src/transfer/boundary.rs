//! Boundary vectors of the open chain, generated by q-Pochhammer ratios in
//! the shift operator.

use super::aux::{XMatrix, XVariant};
use crate::error::Result;
use crate::markov_oracle::BoundaryRates;
use crate::qspecial::{pochhammer_ratio_series, qpoch_inf, qpow, ABParameters};
use crate::{re, CMatrix, C64};
use nalgebra::DVector;

/// Which end of the chain a vector closes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Which transfer matrix a vector belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    /// `U(x)`, built from `X(x, x)`.
    U,
    /// `T(y)`, built from `X(y, y)`.
    T,
    /// Two auxiliary spaces fused (`K±`), flattened as `i·N + j`.
    Fused,
}

/// Coefficients of a boundary vector in the level basis.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryVector {
    pub side: Side,
    pub row: RowKind,
    pub spectral: C64,
    pub ab: ABParameters,
    pub coefficients: Vec<C64>,
}

/// `(z² q^k)_∞ / (q^{k+1})_∞` for `k < n`.
pub fn level_factor(z: C64, q: f64, n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| qpoch_inf(z * z * qpow(q, k), q) / qpoch_inf(re(qpow(q, k + 1)), q))
        .collect()
}

/// `|V(x)⟩⟩`: coefficients of `(xS, bb̃xS)_∞ / (bS, b̃S)_∞`.
pub fn v_coefficients(x: C64, ab: &ABParameters, q: f64, n: usize) -> Vec<C64> {
    let (b, bt) = (re(ab.b), re(ab.b_tilde));
    pochhammer_ratio_series(&[x, b * bt * x], &[b, bt], q, n)
}

/// `⟨⟨W(x)|`: coefficients of `(x/S, aãx/S)_∞ / (a/S, ã/S)_∞`, times
/// `(x²A)_∞/(qA)_∞`.
pub fn w_coefficients(x: C64, ab: &ABParameters, q: f64, n: usize) -> Vec<C64> {
    let (a, at) = (re(ab.a), re(ab.a_tilde));
    let g = pochhammer_ratio_series(&[x, a * at * x], &[a, at], q, n);
    g.iter().zip(level_factor(x, q, n)).map(|(u, f)| u * f).collect()
}

/// `|Ṽ(y)⟩⟩`: coefficients of `(byS, b̃yS)_∞ / (S, bb̃S)_∞`.
pub fn vt_coefficients(y: C64, ab: &ABParameters, q: f64, n: usize) -> Vec<C64> {
    let (b, bt) = (re(ab.b), re(ab.b_tilde));
    pochhammer_ratio_series(&[b * y, bt * y], &[re(1.0), b * bt], q, n)
}

/// `⟨⟨W̃(y)|`: coefficients of `(ay/S, ãy/S)_∞ / (1/S, aã/S)_∞`, times
/// `(y²A)_∞/(qA)_∞`.
pub fn wt_coefficients(y: C64, ab: &ABParameters, q: f64, n: usize) -> Vec<C64> {
    let (a, at) = (re(ab.a), re(ab.a_tilde));
    let g = pochhammer_ratio_series(&[a * y, at * y], &[re(1.0), a * at], q, n);
    g.iter().zip(level_factor(y, q, n)).map(|(u, f)| u * f).collect()
}

/// Boundary vector for the `U` or `T` row.
pub fn boundary_vector(side: Side, row: RowKind, spectral: C64, ab: &ABParameters, q: f64, n: usize) -> Result<BoundaryVector> {
    let coefficients = match (side, row) {
        (Side::Left, RowKind::U) => w_coefficients(spectral, ab, q, n),
        (Side::Right, RowKind::U) => v_coefficients(spectral, ab, q, n),
        (Side::Left, RowKind::T) => wt_coefficients(spectral, ab, q, n),
        (Side::Right, RowKind::T) => vt_coefficients(spectral, ab, q, n),
        (_, RowKind::Fused) => {
            return crate::error::domain("fused vectors are built by the kplus module");
        }
    };
    Ok(BoundaryVector { side, row, spectral, ab: *ab, coefficients })
}

/// Residuals of the four boundary conditions, each the max modulus over the
/// first `N − 1` components:
/// `[β(d+n_x) − δ(e+n_x) − (1−q)]|V⟩⟩`, `⟨⟨W|[α(e+n_x) − γ(d+n_x) − (1−q)]`,
/// `[β(d−n_y) − δ(e−n_y) + (1−q)yA]|Ṽ⟩⟩`, `⟨⟨W̃|[α(e−n_y) − γ(d−n_y) + (1−q)yA]`.
pub fn boundary_residuals(x: C64, y: C64, rates: &BoundaryRates, ab: &ABParameters, q: f64, n: usize) -> Result<[f64; 4]> {
    let (al, be, ga, de) = (re(rates.alpha), re(rates.beta), re(rates.gamma), re(rates.delta));
    let id = CMatrix::identity(n, n);
    let a = CMatrix::from_diagonal(&DVector::from_fn(n, |k, _| re(qpow(q, k))));
    let one_q = re(1.0 - q);
    let [[nx, ex], [dx, _]] = XMatrix::new(x, x, q, n, XVariant::Standard)?.dense_blocks();
    let [[_, ey], [dy, ny]] = XMatrix::new(y, y, q, n, XVariant::Standard)?.dense_blocks();
    let col = |v: Vec<C64>| DVector::from_vec(v);
    let v = col(v_coefficients(x, ab, q, n));
    let w = col(w_coefficients(x, ab, q, n)).transpose();
    let vt = col(vt_coefficients(y, ab, q, n));
    let wt = col(wt_coefficients(y, ab, q, n)).transpose();
    let op_v = (&dx + &nx) * be - (&ex + &nx) * de - &id * one_q;
    let op_w = (&ex + &nx) * al - (&dx + &nx) * ga - &id * one_q;
    let op_vt = (&dy - &ny) * be - (&ey - &ny) * de + &a * (one_q * y);
    let op_wt = (&ey - &ny) * al - (&dy - &ny) * ga + &a * (one_q * y);
    let head = |it: Vec<C64>| it.iter().take(n - 1).fold(0.0f64, |m, z| m.max(z.norm()));
    Ok([
        head((op_v * v).iter().copied().collect()),
        head((w * op_w).iter().copied().collect()),
        head((op_vt * vt).iter().copied().collect()),
        head((wt * op_wt).iter().copied().collect()),
    ])
}
