//! Contraction of an `X`-chain over the physical sites.
//!
//! With band blocks every matrix element is a single path through the
//! auxiliary levels, so an entry costs `O(N·L)` for any truncation `N`.

use nalgebra::DVector;

use super::aux::XMatrix;
use crate::{re, CMatrix, C64};

/// Occupation of 0-based site `i`.
#[inline]
fn bit(config: usize, i: usize) -> usize {
    (config >> i) & 1
}

/// `Σ_n left_n · ⟨n| Π_i X_{τ'_i τ_i} |right⟩` for all pairs of
/// configurations. `left` already contains any `A_μ` weights.
pub fn contract_open(left: &[C64], x: &XMatrix, right: &[C64], l: usize, rows: &[usize], cols: &[usize]) -> CMatrix {
    let mut m = CMatrix::zeros(rows.len(), cols.len());
    for (r, &cp) in rows.iter().enumerate() {
        for (c, &cc) in cols.iter().enumerate() {
            let mut acc = re(0.0);
            'start: for (n, &w0) in left.iter().enumerate() {
                if w0 == re(0.0) {
                    continue;
                }
                let (mut pos, mut w) = (n, w0);
                for i in 0..l {
                    match x.block(bit(cp, i), bit(cc, i)).step(pos) {
                        Some((p, s)) => {
                            pos = p;
                            w *= s;
                        }
                        None => continue 'start,
                    }
                }
                acc += w * right[pos];
            }
            m[(r, c)] = acc;
        }
    }
    m
}

/// `Tr[diag(weights) Π_i X_{τ'_i τ_i}]` for all pairs of configurations.
pub fn contract_trace(weights: &[C64], x: &XMatrix, l: usize, rows: &[usize], cols: &[usize]) -> CMatrix {
    let mut m = CMatrix::zeros(rows.len(), cols.len());
    for (r, &cp) in rows.iter().enumerate() {
        for (c, &cc) in cols.iter().enumerate() {
            let mut acc = re(0.0);
            'start: for (n, &w0) in weights.iter().enumerate() {
                let (mut pos, mut w) = (n, w0);
                for i in 0..l {
                    match x.block(bit(cp, i), bit(cc, i)).step(pos) {
                        Some((p, s)) => {
                            pos = p;
                            w *= s;
                        }
                        None => continue 'start,
                    }
                }
                if pos == n {
                    acc += w;
                }
            }
            m[(r, c)] = acc;
        }
    }
    m
}

/// Same contraction with dense blocks `[τ'][τ]`, for fused auxiliary spaces.
pub fn contract_dense(
    left: &DVector<C64>,
    blocks: &[[CMatrix; 2]; 2],
    right: &DVector<C64>,
    l: usize,
    rows: &[usize],
    cols: &[usize],
) -> CMatrix {
    let mut m = CMatrix::zeros(rows.len(), cols.len());
    for (r, &cp) in rows.iter().enumerate() {
        for (c, &cc) in cols.iter().enumerate() {
            let mut v = left.transpose();
            for i in 0..l {
                v *= &blocks[bit(cp, i)][bit(cc, i)];
            }
            m[(r, c)] = (v * right)[(0, 0)];
        }
    }
    m
}
