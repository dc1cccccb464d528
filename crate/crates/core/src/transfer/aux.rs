//! Truncated operators of the auxiliary space and the 2×2 operator-valued
//! matrices `X`, `X̄` and `X̂` built from them.
//!
//! Kets `|n⟩`, `n = 0 … N−1`. `S⁺|n⟩ = |n+1⟩`, `S⁻|n⟩ = |n−1⟩`, so as
//! matrices `S⁺` sits on the subdiagonal and `S⁻` on the superdiagonal.

use crate::error::{domain, Result};
use crate::qspecial::qpow;
use crate::{re, CMatrix, C64};

/// Which operator a truncated matrix represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxTag {
    A,
    Splus,
    Sminus,
    D,
    E,
    Amu,
    Custom,
}

/// A truncated auxiliary-space operator.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxOperator {
    pub tag: AuxTag,
    pub entries: CMatrix,
}

impl AuxOperator {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn custom(entries: CMatrix) -> Self {
        Self { tag: AuxTag::Custom, entries }
    }
}

/// Operator with at most one nonzero entry per row: `⟨n| B = w_n ⟨n + shift|`.
/// Entries whose target falls outside `0 … N−1` are dropped (truncation).
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    pub shift: isize,
    pub weights: Vec<C64>,
}

impl Band {
    pub fn diagonal(weights: Vec<C64>) -> Self {
        Self { shift: 0, weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Row action on a basis bra; `None` when the result is zero.
    #[inline]
    pub fn step(&self, n: usize) -> Option<(usize, C64)> {
        let w = self.weights[n];
        let m = n as isize + self.shift;
        if w == re(0.0) || m < 0 || m >= self.weights.len() as isize {
            None
        } else {
            Some((m as usize, w))
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            if let Some((j, w)) = self.step(i) {
                m[(i, j)] = w;
            }
        }
        m
    }

    fn scaled(&self, c: C64) -> Self {
        Self { shift: self.shift, weights: self.weights.iter().map(|w| w * c).collect() }
    }
}

fn diag_fn(n: usize, f: impl Fn(usize) -> C64) -> Band {
    Band::diagonal((0..n).map(f).collect())
}

/// `1 + xA`.
fn number(n: usize, q: f64, x: C64) -> Band {
    diag_fn(n, |k| 1.0 + x * qpow(q, k))
}

/// `S⁺ f(A)`: row `k` carries `f(q^{k−1})`.
fn raising(n: usize, f: impl Fn(usize) -> C64) -> Band {
    Band { shift: -1, weights: (0..n).map(|k| if k == 0 { re(0.0) } else { f(k - 1) }).collect() }
}

/// `S⁻` times a coefficient depending on the source level: row `k` carries
/// `f(k + 1)`.
fn lowering(n: usize, f: impl Fn(usize) -> C64) -> Band {
    Band { shift: 1, weights: (0..n).map(|k| f(k + 1)).collect() }
}

/// Band form of one tagged operator. `e` is `S⁺(1 − xyA)`, `d` is `S⁻(1 − A)`.
pub fn aux_band(tag: AuxTag, n: usize, q: f64, x: C64, y: C64, mu: C64) -> Result<Band> {
    if n < 2 {
        return domain(format!("truncation N must be at least 2, got {n}"));
    }
    Ok(match tag {
        AuxTag::A => diag_fn(n, |k| re(qpow(q, k))),
        AuxTag::Amu => diag_fn(n, |k| (-mu * k as f64).exp()),
        AuxTag::Splus => raising(n, |_| re(1.0)),
        AuxTag::Sminus => lowering(n, |_| re(1.0)),
        AuxTag::D => lowering(n, |k| re(1.0 - qpow(q, k))),
        AuxTag::E => raising(n, |k| 1.0 - x * y * qpow(q, k)),
        AuxTag::Custom => return domain("custom operators are built with AuxOperator::custom"),
    })
}

/// Dense truncated operator for a tag.
pub fn build_aux(tag: AuxTag, n: usize, q: f64, x: C64, y: C64, mu: C64) -> Result<AuxOperator> {
    Ok(AuxOperator { tag, entries: aux_band(tag, n, q, x, y, mu)?.to_dense() })
}

/// Flavour of the 2×2 operator matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XVariant {
    /// `[[1+xA, S⁺(1−xyA)], [S⁻(1−A), 1+yA]]`.
    Standard,
    /// `[[1+xA, (1−A)S⁺], [(1−xyA)S⁻, 1+yA]]`.
    Contragredient,
    /// `(1−q)/2 · [[1−xA, e], [−d, −1+yA]]`.
    Hat,
}

/// Operator-valued 2×2 matrix; block `(τ', τ)` is the weight of `τ → τ'`.
#[derive(Clone, Debug, PartialEq)]
pub struct XMatrix {
    pub x: C64,
    pub y: C64,
    pub q: f64,
    pub variant: XVariant,
    pub n0: Band,
    pub e: Band,
    pub d: Band,
    pub n1: Band,
}

impl XMatrix {
    pub fn new(x: C64, y: C64, q: f64, n: usize, variant: XVariant) -> Result<Self> {
        if n < 2 {
            return domain(format!("truncation N must be at least 2, got {n}"));
        }
        let zero = re(0.0);
        let (n0, e, d, n1) = match variant {
            XVariant::Standard => (
                number(n, q, x),
                aux_band(AuxTag::E, n, q, x, y, zero)?,
                aux_band(AuxTag::D, n, q, x, y, zero)?,
                number(n, q, y),
            ),
            XVariant::Contragredient => (
                number(n, q, x),
                raising(n, |k| re(1.0 - qpow(q, k + 1))),
                lowering(n, |k| 1.0 - x * y * qpow(q, k - 1)),
                number(n, q, y),
            ),
            XVariant::Hat => {
                let c = re((1.0 - q) / 2.0);
                (
                    diag_fn(n, |k| c * (1.0 - x * qpow(q, k))),
                    aux_band(AuxTag::E, n, q, x, y, zero)?.scaled(c),
                    aux_band(AuxTag::D, n, q, x, y, zero)?.scaled(-c),
                    diag_fn(n, |k| c * (-1.0 + y * qpow(q, k))),
                )
            }
        };
        Ok(Self { x, y, q, variant, n0, e, d, n1 })
    }

    pub fn dim(&self) -> usize {
        self.n0.dim()
    }

    pub fn block(&self, tp: usize, t: usize) -> &Band {
        match (tp, t) {
            (0, 0) => &self.n0,
            (0, 1) => &self.e,
            (1, 0) => &self.d,
            _ => &self.n1,
        }
    }

    pub fn aux(&self, tp: usize, t: usize) -> AuxOperator {
        AuxOperator::custom(self.block(tp, t).to_dense())
    }

    /// Dense blocks indexed `[τ'][τ]`.
    pub fn dense_blocks(&self) -> [[CMatrix; 2]; 2] {
        [
            [self.n0.to_dense(), self.e.to_dense()],
            [self.d.to_dense(), self.n1.to_dense()],
        ]
    }

    /// `2N × 2N` matrix with the physical index outermost: entry
    /// `(τ'·N + a, τ·N + b)` is `X_{τ'τ}[a, b]`.
    pub fn physical_outer(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(2 * n, 2 * n);
        for tp in 0..2 {
            for t in 0..2 {
                m.view_mut((tp * n, t * n), (n, n)).copy_from(&self.block(tp, t).to_dense());
            }
        }
        m
    }
}

/// Two-site product `X⊗X` in the 4×4 physical basis `τ_i·2 + τ_{i+1}`,
/// with operator entries multiplied in the auxiliary space.
pub fn two_site(left: &[[CMatrix; 2]; 2], right: &[[CMatrix; 2]; 2]) -> Vec<Vec<CMatrix>> {
    let mut out = vec![vec![CMatrix::zeros(0, 0); 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = &left[r >> 1][c >> 1] * &right[r & 1][c & 1];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_abs;
    use proptest::prelude::*;

    const Z: C64 = C64::new(0.0, 0.0);

    #[test]
    fn a_is_geometric() {
        let a = build_aux(AuxTag::A, 3, 0.5, Z, Z, Z).unwrap();
        let expect = [1.0, 0.5, 0.25];
        for (k, v) in expect.iter().enumerate() {
            assert_eq!(a.entries[(k, k)], re(*v));
        }
        assert_eq!(a.entries[(0, 1)], Z);
    }

    #[test]
    fn d_annihilates_vacuum() {
        let d = build_aux(AuxTag::D, 5, 0.3, Z, Z, Z).unwrap().entries;
        let mut vac = nalgebra::DVector::<C64>::zeros(5);
        vac[0] = re(1.0);
        assert!((d * vac).norm() < 1e-300);
    }

    #[test]
    fn e_coefficient_vanishes_at_the_fusion_point() {
        // xy = 1/q kills S⁺(1 − xyA) from |1⟩ to |2⟩.
        let q = 0.4;
        let e = build_aux(AuxTag::E, 4, q, re(2.0), re(1.0 / (2.0 * q)), Z).unwrap().entries;
        assert!(e[(2, 1)].norm() < 1e-15);
        assert!((e[(1, 0)] - (1.0 - 1.0 / q)).norm() < 1e-15);
    }

    #[test]
    fn shifts_and_deformation() {
        let sp = build_aux(AuxTag::Splus, 3, 0.5, Z, Z, Z).unwrap().entries;
        let sm = build_aux(AuxTag::Sminus, 3, 0.5, Z, Z, Z).unwrap().entries;
        assert_eq!(sp[(1, 0)], re(1.0));
        assert_eq!(sm[(0, 1)], re(1.0));
        assert_eq!(&sp.transpose(), &sm);
        let amu = build_aux(AuxTag::Amu, 3, 0.5, Z, Z, re(2.0_f64.ln())).unwrap().entries;
        assert!((amu[(2, 2)] - 0.25).norm() < 1e-15);
        assert!(build_aux(AuxTag::A, 1, 0.5, Z, Z, Z).is_err());
    }

    #[test]
    fn fused_block_matches_display() {
        let (q, x) = (0.6, 0.7);
        let m = XMatrix::new(re(x), re(1.0 / (q * x)), q, 2, XVariant::Standard).unwrap().physical_outer();
        let expect = [
            [1.0 + x, 0.0, 0.0, 0.0],
            [0.0, 1.0 + q * x, 1.0 - 1.0 / q, 0.0],
            [0.0, 1.0 - q, 1.0 + 1.0 / (q * x), 0.0],
            [0.0, 0.0, 0.0, 1.0 + 1.0 / x],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((m[(i, j)] - expect[i][j]).norm() < 1e-14, "({i},{j})");
            }
        }
        let b = XMatrix::new(re(1.0 / (q * x)), re(x), q, 2, XVariant::Contragredient).unwrap().physical_outer();
        let expect = [
            [1.0 + 1.0 / (q * x), 0.0, 0.0, 0.0],
            [0.0, 1.0 + 1.0 / x, 1.0 - q, 0.0],
            [0.0, 1.0 - 1.0 / q, 1.0 + x, 0.0],
            [0.0, 0.0, 0.0, 1.0 + q * x],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((b[(i, j)] - expect[i][j]).norm() < 1e-14, "bar ({i},{j})");
            }
        }
    }

    fn inner(m: &CMatrix, n: usize) -> f64 {
        max_abs(&m.view((0, 0), (n - 1, n - 1)).into_owned())
    }

    /// Local bulk generator on two sites, basis `τ_i·2 + τ_{i+1}`.
    fn local_generator(q: f64) -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        m[(1, 1)] = re(-q);
        m[(1, 2)] = re(1.0);
        m[(2, 1)] = re(q);
        m[(2, 2)] = re(-1.0);
        m
    }

    proptest! {
        #[test]
        fn algebra_on_inner_block(x in -0.9f64..0.9, y in -0.9f64..0.9, q in 0.0f64..0.95) {
            let n = 12;
            let xm = XMatrix::new(re(x), re(y), q, n, XVariant::Standard).unwrap();
            let [_, [d, _]] = xm.dense_blocks();
            let e = xm.e.to_dense();
            let a = build_aux(AuxTag::A, n, q, Z, Z, Z).unwrap().entries;
            let id = CMatrix::identity(n, n);
            let lhs = &d * &e - &e * &d * re(q) - (&id - &a * &a * re(x * y)) * re(1.0 - q);
            prop_assert!(inner(&lhs, n) < 1e-14);
            let ae = &a * &e - &e * &a * re(q);
            let da = &d * &a - &a * &d * re(q);
            prop_assert!(inner(&ae, n) < 1e-15);
            prop_assert!(inner(&da, n) < 1e-15);
        }

        #[test]
        fn local_commutator_identity(x in -0.9f64..0.9, y in -0.9f64..0.9, q in 0.0f64..0.95) {
            let n = 10;
            let xs = XMatrix::new(re(x), re(y), q, n, XVariant::Standard).unwrap().dense_blocks();
            let xh = XMatrix::new(re(x), re(y), q, n, XVariant::Hat).unwrap().dense_blocks();
            let xx = two_site(&xs, &xs);
            let hx = two_site(&xh, &xs);
            let xhh = two_site(&xs, &xh);
            let m = local_generator(q);
            for r in 0..4 {
                for c in 0..4 {
                    let mut comm = CMatrix::zeros(n, n);
                    for k in 0..4 {
                        comm += &xx[k][c] * m[(r, k)] - &xx[r][k] * m[(k, c)];
                    }
                    let rhs = &hx[r][c] - &xhh[r][c];
                    prop_assert!(inner(&(comm - rhs), n) < 1e-13, "entry ({}, {})", r, c);
                }
            }
        }
    }
}
