//! Residuals of the functional relations satisfied by the transfer
//! matrices, and reconstruction of the deformed generator from `t^[2]`.
//!
//! Every residual is relative: `‖lhs − rhs‖∞ / max(‖lhs‖∞, ‖rhs‖∞)`, except
//! the commutator which is scaled by `‖M‖∞‖T‖∞`.

use super::open::{OpenChain, PQFactorization};
use super::periodic::{fused_partner, PeriodicChain};
use super::Truncation;
use crate::error::{domain, Result};
use crate::markov_oracle::{build_markov, Geometry, SystemSpec};
use crate::numerics::{log_derivative, max_abs, rel_diff, DiffMethod};
use crate::qspecial::qpow;
use crate::{re, CMatrix, C64};

const FLOOR: f64 = 1e-300;

/// Residual above which the central difference is replaced by Ridders'
/// extrapolation.
pub const FALLBACK_THRESHOLD: f64 = 1e-6;

fn is_open(spec: &SystemSpec) -> bool {
    matches!(spec.geometry, Geometry::Open(_))
}

/// `‖[M_μ, T]‖∞ / (‖M_μ‖∞ ‖T‖∞)` with `T = T(x, y)` on a ring or
/// `T = U(x)T(y)` on an open chain.
pub fn verify_commutation(spec: &SystemSpec, x: C64, y: C64, trunc: Truncation) -> Result<f64> {
    let m = build_markov(spec)?.matrix;
    let t = if is_open(spec) {
        let ch = OpenChain::new(spec, trunc)?;
        ch.u(x)? * ch.t(y)?
    } else {
        PeriodicChain::from_spec(spec, trunc)?.transfer(x, y)?
    };
    let c = &m * &t - &t * &m;
    Ok(max_abs(&c) / (max_abs(&m) * max_abs(&t)).max(FLOOR))
}

/// Residuals of the exchange relations of an open chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExchangeResiduals {
    /// `U(x)T(y)` against `U(y)T(x)`.
    pub ut: f64,
    /// `T(y)U(x)` against `T(x)U(y)`.
    pub tu: f64,
    /// `P̃(x)Q̃(0)` against `P̃(0)Q̃(x)`.
    pub pq_constant: f64,
    /// `P̃(x)Q̃(y)` against `Q̃(y)P̃(x)`.
    pub pq_commutator: f64,
}

impl ExchangeResiduals {
    pub fn max(&self) -> f64 {
        self.ut.max(self.tu).max(self.pq_constant).max(self.pq_commutator)
    }
}

pub fn verify_exchange(spec: &SystemSpec, x: C64, y: C64, trunc: Truncation) -> Result<ExchangeResiduals> {
    if !is_open(spec) {
        return domain("the exchange relations concern open chains");
    }
    let ch = OpenChain::new(spec, trunc)?;
    let (ux, uy, tx, ty) = (ch.u(x)?, ch.u(y)?, ch.t(x)?, ch.t(y)?);
    let pq = ch.pq_build()?;
    let zero = re(0.0);
    let (px, qy) = (pq.p(x)?, pq.q(y)?);
    Ok(ExchangeResiduals {
        ut: rel_diff(&(&ux * &ty), &(&uy * &tx), FLOOR),
        tu: rel_diff(&(&ty * &ux), &(&tx * &uy), FLOOR),
        pq_constant: rel_diff(&(&px * pq.q(zero)?), &(pq.p(zero)? * pq.q(x)?), FLOOR),
        pq_commutator: rel_diff(&(&px * &qy), &(&qy * &px), FLOOR),
    })
}

/// Residuals of the decomposition of a transfer matrix at `xy = q^{1−k}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionResidual {
    /// The decomposition itself, checked against an independent `t^[k]`.
    pub identity: f64,
    /// `t̃^[k](x)` against `t̃^[k](1/q^{k−1}x)`; open chains only.
    pub symmetry: Option<f64>,
}

/// Periodic: `T(x, 1/q^{k−1}x) = t^[k](x) + e^{−kμ} T(q^k x, q/x)`.
///
/// Open (`k = 1, 2`): `P̃(x)Q̃(1/q^{k−1}x) − e^{−2kμ} P̃(q^k x)Q̃(q/x)` against
/// `F(x)·1` or the block construction of `t̃^[2]`.
pub fn verify_decomposition(spec: &SystemSpec, k: usize, x: C64, trunc: Truncation) -> Result<DecompositionResidual> {
    if k == 0 {
        return domain("k must be at least 1");
    }
    let q = spec.q;
    let y = fused_partner(k, x, q)?;
    if is_open(spec) {
        let pq = OpenChain::new(spec, trunc)?.pq_build()?;
        let (combo, direct, sym) = match k {
            1 => {
                let tail = pq.p(x * q)? * pq.q(re(q) / x)? * (-2.0 * spec.mu).exp();
                (pq.p(x)? * pq.q(y)? - tail, pq.t_tilde(1, x)?, None)
            }
            2 => {
                let b = pq.chain.t2_blocks(x)?;
                let s = rel_diff(&b, &pq.chain.t2_blocks(y)?, FLOOR);
                (pq.t_tilde(2, x)?, b, Some(s))
            }
            _ => return domain("open chains have an independent t̃^[k] only for k ≤ 2"),
        };
        Ok(DecompositionResidual { identity: rel_diff(&combo, &direct, FLOOR), symmetry: sym })
    } else {
        let ch = PeriodicChain::from_spec(spec, trunc)?;
        let lhs = ch.transfer(x, y)?;
        let rhs = ch.t_k(k, x)? + ch.transfer(x * qpow(q, k), re(q) / x)? * (-(k as f64) * ch.mu).exp();
        Ok(DecompositionResidual { identity: rel_diff(&lhs, &rhs, FLOOR), symmetry: None })
    }
}

/// Residuals of the T-Q relations and the fusion hierarchy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TqFusionResiduals {
    /// `t^[2](x)Q(1/x) = h(x)Q(1/qx) + w h(qx)Q(q/x)`.
    pub tq2: f64,
    /// `t^[3](x)Q(1/x)Q(1/qx)` expanded over products of two `Q`.
    pub tq3: f64,
    /// `t^[2]_0 t^[k]_1 = h_1 t^[k+1]_0 + w h_0 t^[k−1]_2` for `k = 2, 3`.
    pub fusion: [f64; 2],
    /// `t^[k]_0 t^[2]_{k−1} = h_{k−1} t^[k+1]_0 + w h_k t^[k−1]_0` for `k = 2, 3`.
    pub second_fusion: [f64; 2],
    /// `t^[2]_0 t^[2]_1 t^[2]_2` expanded with both fusions.
    pub combined: f64,
}

impl TqFusionResiduals {
    pub fn max_fusion(&self) -> f64 {
        self.fusion.iter().chain(&self.second_fusion).fold(self.combined, |a, &b| a.max(b))
    }
}

/// Common view of both geometries: `t^[k](x)`, the scalar `h` (or `F`), the
/// Q-operator and the twist weight `w = e^{−μ}` (or `e^{−2μ}`).
struct Hierarchy<'a> {
    t: Box<dyn Fn(usize, C64) -> Result<CMatrix> + 'a>,
    h: Box<dyn Fn(C64) -> Result<C64> + 'a>,
    qop: Box<dyn Fn(C64) -> Result<CMatrix> + 'a>,
    w: C64,
    q: f64,
}

impl Hierarchy<'_> {
    /// `t^[k](q^j x)`.
    fn tk(&self, k: usize, j: usize, x: C64) -> Result<CMatrix> {
        (self.t)(k, x * qpow(self.q, j))
    }

    fn hj(&self, j: usize, x: C64) -> Result<C64> {
        (self.h)(x * qpow(self.q, j))
    }

    fn residuals(&self, x: C64) -> Result<TqFusionResiduals> {
        let q = self.q;
        let qo = |z: C64| (self.qop)(z);
        let (h0, h1, h2) = (self.hj(0, x)?, self.hj(1, x)?, self.hj(2, x)?);
        let (qm1, q0, q1, q2) = (qo(re(q) / x)?, qo(1.0 / x)?, qo(1.0 / (q * x))?, qo(1.0 / (q * q * x))?);

        let t2 = self.tk(2, 0, x)?;
        let tq2 = rel_diff(&(&t2 * &q0), &(&q1 * h0 + &qm1 * (self.w * h1)), FLOOR);

        let t3 = self.tk(3, 0, x)?;
        let lhs = &t3 * &q0 * &q1;
        let rhs = &q1 * &q2 * h0 + &qm1 * &q2 * (self.w * h1) + &qm1 * &q0 * (self.w * self.w * h2);
        let tq3 = rel_diff(&lhs, &rhs, FLOOR);

        let mut fusion = [0.0; 2];
        let mut second_fusion = [0.0; 2];
        for (slot, k) in [2usize, 3].into_iter().enumerate() {
            let lhs = &t2 * self.tk(k, 1, x)?;
            let rhs = self.tk(k + 1, 0, x)? * h1 + self.tk(k - 1, 2, x)? * (self.w * h0);
            fusion[slot] = rel_diff(&lhs, &rhs, FLOOR);

            let lhs = self.tk(k, 0, x)? * self.tk(2, k - 1, x)?;
            let rhs = self.tk(k + 1, 0, x)? * self.hj(k - 1, x)? + self.tk(k - 1, 0, x)? * (self.w * self.hj(k, x)?);
            second_fusion[slot] = rel_diff(&lhs, &rhs, FLOOR);
        }

        // t2_0 t2_1 t2_2 = t2_0 (h_2 t3_1 + w h_3 t1_1)
        //               = h_2 (h_1 t4_0 + w h_0 t2_2) + w h_3 (h_1 t2_0 + w h_0 t0_2)
        let h3 = self.hj(3, x)?;
        let lhs = &t2 * self.tk(2, 1, x)? * self.tk(2, 2, x)?;
        let rhs = (self.tk(4, 0, x)? * h1 + self.tk(2, 2, x)? * (self.w * h0)) * h2 + &t2 * (self.w * h3 * h1);
        let combined = rel_diff(&lhs, &rhs, FLOOR);

        Ok(TqFusionResiduals { tq2, tq3, fusion, second_fusion, combined })
    }
}

/// T-Q relations of orders 2 and 3 and the fusion identities at `x`.
///
/// On a ring `t^[k]` is the fused trace, `h` the sector function and
/// `Q(y) = T(0, y)`. On an open chain `t̃^[k]` comes from the `P̃Q̃`
/// combination, `F` replaces `h` and the weight is `e^{−2μ}`.
pub fn verify_tq_and_fusion(spec: &SystemSpec, x: C64, trunc: Truncation) -> Result<TqFusionResiduals> {
    if is_open(spec) {
        let pq: PQFactorization = OpenChain::new(spec, trunc)?.pq_build()?;
        let ch = pq.chain.clone();
        let hier = Hierarchy {
            t: Box::new(|k, z| pq.t_tilde(k, z)),
            h: Box::new(|z| ch.F(z)),
            qop: Box::new(|z| pq.q(z)),
            w: (-2.0 * spec.mu).exp(),
            q: spec.q,
        };
        hier.residuals(x)
    } else {
        let ch = PeriodicChain::from_spec(spec, trunc)?;
        let hier = Hierarchy {
            t: Box::new(|k, z| ch.t_k(k, z)),
            h: Box::new(|z| ch.h(z)),
            qop: Box::new(|z| ch.q_op(z)),
            w: (-spec.mu).exp(),
            q: spec.q,
        };
        hier.residuals(x)
    }
}

/// Where the logarithmic derivative of `t^[2]` is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReconstructionPoint {
    /// `x = −1`.
    MinusOne,
    /// `x = −1/q`; needs `q > 0`.
    MinusInverseQ,
}

/// Generator rebuilt from `t^[2]` and its distance to [`build_markov`].
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub matrix: CMatrix,
    /// `‖reconstructed − M_μ‖∞`.
    pub residual: f64,
    pub method: DiffMethod,
}

/// Rebuild `M_μ` from the logarithmic derivative of `t^[2]`.
///
/// Ring: `(1−q) ∂ log(t^[2](x)/h(qx))` at `x = −1` and
/// `(1−1/q) ∂ log(t^[2](x)/h(x))` at `x = −1/q`. Open chain: the same with
/// `t̃^[2]` from blocks, `F` for `h` and an extra factor `1/2`.
pub fn markov_from_t2(spec: &SystemSpec, point: ReconstructionPoint, trunc: Truncation) -> Result<Reconstruction> {
    let q = spec.q;
    let (x0, pref, shift) = match point {
        ReconstructionPoint::MinusOne => (re(-1.0), 1.0 - q, q),
        ReconstructionPoint::MinusInverseQ => {
            if q == 0.0 {
                return domain("x = −1/q is not available at q = 0");
            }
            (re(-1.0 / q), 1.0 - 1.0 / q, 1.0)
        }
    };
    let target = build_markov(spec)?.matrix;
    let run = |method: DiffMethod| -> Result<Reconstruction> {
        let ld = if is_open(spec) {
            let ch = OpenChain::new(spec, trunc)?;
            let f = |x: C64| -> Result<CMatrix> { Ok(ch.t2_blocks(x)? / ch.F(x * shift)?) };
            log_derivative(f, x0, method)? * re(0.5 * pref)
        } else {
            let ch = PeriodicChain::from_spec(spec, trunc)?;
            let f = |x: C64| -> Result<CMatrix> { Ok(ch.t_k(2, x)? / ch.h(x * shift)?) };
            log_derivative(f, x0, method)? * re(pref)
        };
        let residual = max_abs(&(&ld - &target));
        Ok(Reconstruction { matrix: ld, residual, method })
    };
    let central = run(DiffMethod::default())?;
    if central.residual <= FALLBACK_THRESHOLD {
        return Ok(central);
    }
    let ridders = run(DiffMethod::Ridders { h0: 1e-2 })?;
    Ok(if ridders.residual < central.residual { ridders } else { central })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov_oracle::BoundaryRates;

    fn open_spec() -> SystemSpec {
        SystemSpec::open(2, 0.5, re(0.3), BoundaryRates::new(0.6, 0.7, 0.2, 0.1))
    }

    fn ring_spec() -> SystemSpec {
        SystemSpec::periodic(3, 0.4, re(0.5), 1)
    }

    #[test]
    fn commutation_open_and_ring() {
        let t = Truncation::default();
        assert!(verify_commutation(&open_spec(), re(0.2), re(0.1), t).unwrap() < 1e-8);
        assert!(verify_commutation(&open_spec(), re(0.0), re(0.0), t).unwrap() < 1e-8);
        assert!(verify_commutation(&ring_spec(), re(0.2), re(0.3), t).unwrap() < 1e-8);
        let fast = open_spec().with_mu(re(0.8));
        assert!(verify_commutation(&fast, re(0.2), re(0.1), Truncation::Fixed(48)).unwrap() < 1e-8);
    }

    #[test]
    fn commutation_residual_decays_with_truncation() {
        let spec = open_spec();
        let at = |n| verify_commutation(&spec, re(0.2), re(0.1), Truncation::Fixed(n)).unwrap();
        assert!(at(64) / at(32) < 10.0 * spec.q.powi(16));
    }

    #[test]
    fn exchange_is_trivial_on_the_diagonal() {
        let r = verify_exchange(&open_spec(), re(0.2), re(0.2), Truncation::default()).unwrap();
        assert_eq!(r.ut, 0.0);
        assert_eq!(r.tu, 0.0);
    }

    #[test]
    fn exchange_generic() {
        let r = verify_exchange(&open_spec(), re(0.2), re(0.35), Truncation::default()).unwrap();
        assert!(r.max() < 1e-8, "{r:?}");
    }

    #[test]
    fn decompositions() {
        for k in 1..=3 {
            let r = verify_decomposition(&ring_spec(), k, re(0.3), Truncation::default()).unwrap();
            assert!(r.identity < 1e-8, "ring k={k}: {r:?}");
        }
        for k in 1..=2 {
            let r = verify_decomposition(&open_spec(), k, re(0.3), Truncation::default()).unwrap();
            assert!(r.identity < 1e-7, "open k={k}: {r:?}");
        }
        let r = verify_decomposition(&open_spec(), 2, re(0.3), Truncation::default()).unwrap();
        assert!(r.symmetry.unwrap() < 1e-8, "{r:?}");
    }

    #[test]
    fn tq_and_fusion() {
        let r = verify_tq_and_fusion(&ring_spec(), re(0.3), Truncation::default()).unwrap();
        assert!(r.tq2 < 1e-7 && r.tq3 < 1e-7, "{r:?}");
        assert!(r.max_fusion() < 1e-6, "{r:?}");
        let r = verify_tq_and_fusion(&open_spec(), re(0.2), Truncation::default()).unwrap();
        assert!(r.tq2 < 1e-7, "{r:?}");
    }

    #[test]
    fn reconstruction() {
        for spec in [open_spec(), SystemSpec::periodic(2, 0.5, re(0.4), 1)] {
            for p in [ReconstructionPoint::MinusOne, ReconstructionPoint::MinusInverseQ] {
                let r = markov_from_t2(&spec, p, Truncation::default()).unwrap();
                assert!(r.residual < 1e-5, "{p:?}: {}", r.residual);
            }
        }
    }
}
