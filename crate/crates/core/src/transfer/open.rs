//! Open-chain transfer matrices `U(x)`, `T(y)`, the factorisation
//! `U(x)T(y) = P(x)Q(y)` and the fused matrices `t̃^[k]`.

use nalgebra::DVector;

use super::aux::{aux_band, AuxTag, XMatrix, XVariant};
use super::boundary::{v_coefficients, vt_coefficients, w_coefficients, wt_coefficients, RowKind};
use super::chain::{contract_dense, contract_open};
use super::kplus::{kminus2_display, kplus2_display};
use super::periodic::fused_partner;
use super::{decay_ratio, TransferMatrix, Truncation};
use crate::bethe::eval_F;
use crate::error::{domain, Error, Result};
use crate::markov_oracle::{BoundaryRates, Geometry, SystemSpec};
use crate::qspecial::{ab_from_rates, hb, qpoch_inf, qpow, ABParameters, HbMode};
use crate::{re, CMatrix, C64};

/// Open chain of `L` sites with the fugacity on the left reservoir bond.
#[derive(Clone, Debug, PartialEq)]
pub struct OpenChain {
    pub l: usize,
    pub q: f64,
    pub mu: C64,
    pub rates: BoundaryRates,
    pub ab: ABParameters,
    pub n: usize,
    basis: Vec<usize>,
}

impl OpenChain {
    pub fn new(spec: &SystemSpec, trunc: Truncation) -> Result<Self> {
        spec.validate()?;
        let rates = match spec.geometry {
            Geometry::Open(r) => r,
            Geometry::Periodic { .. } => return domain("expected an open system"),
        };
        let ab = ab_from_rates(&rates, spec.q)?;
        if !ab.is_max_current() {
            return domain(format!(
                "the boundary vectors need |a|, |ã|, |b|, |b̃| < 1, got {ab:?}"
            ));
        }
        if !(spec.mu.re > 0.0) {
            return domain(format!("T(y) converges only for Re mu > 0, got mu = {}", spec.mu));
        }
        let n = trunc.resolve(decay_ratio(spec.q, Some(&ab), spec.mu)).max(2);
        Ok(Self { l: spec.l, q: spec.q, mu: spec.mu, rates, ab, n, basis: (0..1usize << spec.l).collect() })
    }

    /// Same chain with a different truncation.
    pub fn with_truncation(&self, n: usize) -> Self {
        Self { n: n.max(2), ..self.clone() }
    }

    pub fn spec(&self) -> SystemSpec {
        SystemSpec::open(self.l, self.q, self.mu, self.rates)
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    fn amu(&self) -> Result<Vec<C64>> {
        Ok(aux_band(AuxTag::Amu, self.n, self.q, re(0.0), re(0.0), self.mu)?.weights)
    }

    fn contract(&self, left: Vec<C64>, z: C64, right: &[C64]) -> Result<CMatrix> {
        let amu = self.amu()?;
        let left: Vec<C64> = left.iter().zip(&amu).map(|(a, b)| a * b).collect();
        let xm = XMatrix::new(z, z, self.q, self.n, XVariant::Standard)?;
        Ok(contract_open(&left, &xm, right, self.l, &self.basis, &self.basis))
    }

    /// `U(x) = ⟨⟨W(x)| A_μ Π X(x,x) |V(x)⟩⟩`.
    pub fn u(&self, x: C64) -> Result<CMatrix> {
        let w = w_coefficients(x, &self.ab, self.q, self.n);
        let v = v_coefficients(x, &self.ab, self.q, self.n);
        self.contract(w, x, &v)
    }

    /// `T(y) = ⟨⟨W̃(y)| A_μ Π X(y,y) |Ṽ(y)⟩⟩`.
    pub fn t(&self, y: C64) -> Result<CMatrix> {
        let w = wt_coefficients(y, &self.ab, self.q, self.n);
        let v = vt_coefficients(y, &self.ab, self.q, self.n);
        self.contract(w, y, &v)
    }

    pub fn row(&self, row: RowKind, z: C64) -> Result<CMatrix> {
        match row {
            RowKind::U => self.u(z),
            RowKind::T => self.t(z),
            RowKind::Fused => domain("fused rows are built through t2_blocks"),
        }
    }

    /// `c(z) = (q)_∞ / (az, ãz, bz, b̃z)_∞`.
    pub fn norm_c(&self, z: C64) -> Result<C64> {
        let den: C64 = self.ab.all().iter().map(|&s| qpoch_inf(z * s, self.q)).product();
        if den.norm() < 1e-14 {
            return Err(Error::Pole(format!("c(z) has a pole at z = {z}")));
        }
        Ok(qpoch_inf(re(self.q), self.q) / den)
    }

    pub fn h_b(&self, z: C64) -> Result<C64> {
        hb(z, &self.ab, self.q, HbMode::TwoWay)
    }

    #[allow(non_snake_case)]
    pub fn F(&self, x: C64) -> Result<C64> {
        eval_F(x, self.l, &self.ab, self.q)
    }

    /// `t̃^[2](x) = h_b(x) h_b(1/qx) · ⟨K⁻₂| A_μ^[2]⊗A_μ^[2] Π (X₂ · X̄₂) |K⁺₂⟩`,
    /// with `X₂ = X(x, 1/qx)` and `X̄₂ = X̄(1/qx, x)` on two levels.
    pub fn t2_blocks(&self, x: C64) -> Result<CMatrix> {
        let y = fused_partner(2, x, self.q)?;
        let kp = kplus2_display(x, &self.ab, self.q)?;
        let km = kminus2_display(x, &self.ab, self.q)?;
        let x2 = XMatrix::new(x, y, self.q, 2, XVariant::Standard)?.dense_blocks();
        let xb = XMatrix::new(y, x, self.q, 2, XVariant::Contragredient)?.dense_blocks();
        let blocks: [[CMatrix; 2]; 2] = std::array::from_fn(|tp| {
            std::array::from_fn(|t| (0..2).map(|s| x2[tp][s].kronecker(&xb[s][t])).fold(CMatrix::zeros(4, 4), |a, b| a + b))
        });
        let am = [re(1.0), (-self.mu).exp()];
        let left = DVector::from_fn(4, |idx, _| km[idx & 1][idx >> 1] * am[idx >> 1] * am[idx & 1]);
        let right = DVector::from_fn(4, |idx, _| kp[idx >> 1][idx & 1]);
        let t = contract_dense(&left, &blocks, &right, self.l, &self.basis, &self.basis);
        Ok(t * (self.h_b(x)? * self.h_b(y)?))
    }

    /// Factorisation `P̃`, `Q̃` with `U(0)` inverted once.
    pub fn pq_build(&self) -> Result<PQFactorization> {
        let u0 = self.u(re(0.0))?;
        let svd = u0.clone().svd(false, false);
        let s = &svd.singular_values;
        let condition = s.max() / s.min();
        let u0_inv = u0
            .clone()
            .try_inverse()
            .filter(|_| condition.is_finite() && condition < 1e14)
            .ok_or_else(|| Error::Singular(format!("U(0) is singular (condition {condition:e})")))?;
        let c0 = self.norm_c(re(0.0))?;
        Ok(PQFactorization { chain: self.clone(), u0, u0_inv, c0, condition })
    }
}

/// `P̃(x) = c(x)/c(0) · U(x)U(0)⁻¹` and `Q̃(y) = c(0)c(y) · U(0)T(y)`, so that
/// `P̃(x)Q̃(y) = c(x)c(y) U(x)T(y)` and `P̃(0) = 1`.
#[derive(Clone, Debug)]
pub struct PQFactorization {
    pub chain: OpenChain,
    pub u0: CMatrix,
    u0_inv: CMatrix,
    c0: C64,
    /// 2-norm condition number of `U(0)`.
    pub condition: f64,
}

impl PQFactorization {
    pub fn p(&self, x: C64) -> Result<CMatrix> {
        let c = self.chain.norm_c(x)? / self.c0;
        Ok(self.chain.u(x)? * &self.u0_inv * c)
    }

    pub fn q(&self, y: C64) -> Result<CMatrix> {
        let c = self.chain.norm_c(y)? * self.c0;
        Ok(&self.u0 * self.chain.t(y)? * c)
    }

    /// `t̃^[k](x)`: `0` for `k = 0`, `F(x)·1` for `k = 1`, otherwise
    /// `P̃(x)Q̃(1/q^{k−1}x) − e^{−2kμ} P̃(q^k x)Q̃(q/x)`.
    pub fn t_tilde(&self, k: usize, x: C64) -> Result<CMatrix> {
        let ch = &self.chain;
        let d = ch.basis.len();
        match k {
            0 => Ok(CMatrix::zeros(d, d)),
            1 => Ok(CMatrix::identity(d, d) * ch.F(x)?),
            _ => {
                let y = fused_partner(k, x, ch.q)?;
                let qk = qpow(ch.q, k);
                let lead = self.p(x)? * self.q(y)?;
                let tail = self.p(x * qk)? * self.q(ch.q / x)?;
                Ok(lead - tail * (-2.0 * k as f64 * ch.mu).exp())
            }
        }
    }
}

/// `U(x)` or `T(y)` for an open system.
pub fn open_transfer(row: RowKind, spectral: C64, spec: &SystemSpec, trunc: Truncation) -> Result<TransferMatrix> {
    let chain = OpenChain::new(spec, trunc)?;
    let matrix = chain.row(row, spectral)?;
    let (x, y) = match row {
        RowKind::T => (None, Some(spectral)),
        _ => (Some(spectral), None),
    };
    Ok(TransferMatrix { matrix, basis: chain.basis.clone(), x, y, mu: spec.mu, k: None, truncation: chain.n })
}

/// `P̃`/`Q̃` factorisation for an open system.
pub fn pq_build(spec: &SystemSpec, trunc: Truncation) -> Result<PQFactorization> {
    OpenChain::new(spec, trunc)?.pq_build()
}
