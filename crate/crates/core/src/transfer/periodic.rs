//! Periodic transfer matrix `T(x, y) = Tr[A_μ Π X]` and its fused
//! truncations `t^[k]`.

use super::aux::{aux_band, AuxTag, XMatrix, XVariant};
use super::chain::contract_trace;
use super::{decay_ratio, TransferMatrix, Truncation};
use crate::bethe::eval_h;
use crate::error::{domain, Error, Result};
use crate::markov_oracle::{sector_basis, Geometry, SystemSpec};
use crate::qspecial::qpow;
use crate::{re, CMatrix, C64};

/// Whether `A_μ` is multiplied by `1 − e^{−μ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    Plain,
    /// `(1 − e^{−μ}) A_μ`; at `μ = 0` this is the limiting projector.
    Rescaled,
}

/// Ring of `L` sites, either one particle sector or the full space.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicChain {
    pub l: usize,
    pub q: f64,
    pub mu: C64,
    pub particles: Option<usize>,
    pub n: usize,
    pub scaling: Scaling,
    basis: Vec<usize>,
}

impl PeriodicChain {
    pub fn new(l: usize, q: f64, mu: C64, particles: Option<usize>, trunc: Truncation) -> Result<Self> {
        Self::with_scaling(l, q, mu, particles, trunc, Scaling::Plain)
    }

    pub fn with_scaling(
        l: usize,
        q: f64,
        mu: C64,
        particles: Option<usize>,
        trunc: Truncation,
        scaling: Scaling,
    ) -> Result<Self> {
        if l == 0 {
            return domain("the ring needs at least one site");
        }
        if !(0.0..1.0).contains(&q) {
            return domain(format!("q must lie in [0, 1), got {q}"));
        }
        if let Some(p) = particles {
            if p > l {
                return domain(format!("sector N = {p} exceeds L = {l}"));
            }
        }
        let at_limit = mu == re(0.0) && scaling == Scaling::Rescaled;
        if !(mu.re > 0.0) && !at_limit {
            return domain(format!(
                "the trace over the auxiliary space needs Re mu > 0, got mu = {mu}"
            ));
        }
        let n = trunc.resolve(decay_ratio(q, None, mu)).max(2);
        let basis = match particles {
            Some(p) => sector_basis(l, p),
            None => (0..1usize << l).collect(),
        };
        Ok(Self { l, q, mu, particles, n, scaling, basis })
    }

    /// Chain for a periodic [`SystemSpec`], restricted to its sector.
    pub fn from_spec(spec: &SystemSpec, trunc: Truncation) -> Result<Self> {
        spec.validate()?;
        match spec.geometry {
            Geometry::Periodic { particles } => Self::new(spec.l, spec.q, spec.mu, Some(particles), trunc),
            Geometry::Open(_) => domain("expected a periodic system"),
        }
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    fn weights(&self, n: usize) -> Result<Vec<C64>> {
        let w = aux_band(AuxTag::Amu, n, self.q, re(0.0), re(0.0), self.mu)?.weights;
        Ok(match self.scaling {
            Scaling::Plain => w,
            Scaling::Rescaled => {
                let s = 1.0 - (-self.mu).exp();
                w.into_iter().map(|v| v * s).collect()
            }
        })
    }

    /// `T(x, y)` truncated at `n` levels.
    pub fn transfer_truncated(&self, x: C64, y: C64, n: usize) -> Result<CMatrix> {
        if self.mu == re(0.0) {
            return Ok(self.projector());
        }
        let xm = XMatrix::new(x, y, self.q, n, XVariant::Standard)?;
        Ok(contract_trace(&self.weights(n)?, &xm, self.l, &self.basis, &self.basis))
    }

    /// `T(x, y)` at the chain's truncation.
    pub fn transfer(&self, x: C64, y: C64) -> Result<CMatrix> {
        self.transfer_truncated(x, y, self.n)
    }

    /// All-ones matrix on each particle sector.
    pub fn projector(&self) -> CMatrix {
        let d = self.basis.len();
        CMatrix::from_fn(d, d, |i, j| {
            if self.basis[i].count_ones() == self.basis[j].count_ones() {
                re(1.0)
            } else {
                re(0.0)
            }
        })
    }

    /// `t^[k](x) = T(x, 1/q^{k−1}x)` truncated at `k` levels; `t^[0] = 0`.
    pub fn t_k(&self, k: usize, x: C64) -> Result<CMatrix> {
        let d = self.basis.len();
        match k {
            0 => Ok(CMatrix::zeros(d, d)),
            1 => {
                let y = fused_partner(1, x, self.q)?;
                let xm = XMatrix::new(x, y, self.q, 2, XVariant::Standard)?;
                let w = self.weights(2)?;
                Ok(contract_trace(&w[..1], &xm, self.l, &self.basis, &self.basis))
            }
            _ => {
                let y = fused_partner(k, x, self.q)?;
                self.transfer_truncated(x, y, k)
            }
        }
    }

    /// `h(x) = (1+x)^{L−N}(1+1/x)^N` of the chain's sector.
    pub fn h(&self, x: C64) -> Result<C64> {
        match self.particles {
            Some(p) => eval_h(x, self.l, p),
            None => domain("h(x) needs a fixed particle sector"),
        }
    }

    /// `P(x) = T(0,0)⁻¹ T(x,0)`.
    pub fn p(&self, x: C64) -> Result<CMatrix> {
        let t00 = self.transfer(re(0.0), re(0.0))?;
        let tx0 = self.transfer(x, re(0.0))?;
        t00.lu()
            .solve(&tx0)
            .ok_or_else(|| Error::Singular("T(0, 0) is not invertible".into()))
    }

    /// `Q(y) = T(0, y)`.
    pub fn q_op(&self, y: C64) -> Result<CMatrix> {
        self.transfer(re(0.0), y)
    }
}

/// `1/(q^{k−1} x)`.
pub(crate) fn fused_partner(k: usize, x: C64, q: f64) -> Result<C64> {
    let s = x * qpow(q, k - 1);
    if s.norm() == 0.0 {
        return Err(Error::Pole(format!("1/(q^{} x) is infinite at x = {x}, q = {q}", k - 1)));
    }
    Ok(1.0 / s)
}

/// `T(x, y)` on the ring, for one sector or (with `particles = None`) the
/// whole configuration space.
#[allow(clippy::too_many_arguments)]
pub fn periodic_transfer(
    x: C64,
    y: C64,
    mu: C64,
    l: usize,
    particles: Option<usize>,
    q: f64,
    trunc: Truncation,
    scaling: Scaling,
) -> Result<TransferMatrix> {
    let chain = PeriodicChain::with_scaling(l, q, mu, particles, trunc, scaling)?;
    Ok(TransferMatrix {
        matrix: chain.transfer(x, y)?,
        basis: chain.basis.clone(),
        x: Some(x),
        y: Some(y),
        mu,
        k: None,
        truncation: chain.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov_oracle::build_markov;
    use crate::numerics::max_abs;

    #[test]
    fn single_site_weights() {
        let mu = re(2.0f64.ln());
        let t = periodic_transfer(re(0.25), re(0.0), mu, 1, None, 0.5, Truncation::Fixed(80), Scaling::Plain).unwrap();
        assert!((t.matrix[(0, 0)] - (2.0 + 1.0 / 3.0)).norm() < 1e-14);
        assert_eq!(t.matrix[(0, 1)], re(0.0));
        assert_eq!(t.matrix[(1, 0)], re(0.0));
    }

    #[test]
    fn conserves_particle_number() {
        let t = periodic_transfer(re(0.3), re(-0.2), re(0.5), 4, None, 0.4, Truncation::default(), Scaling::Plain).unwrap();
        for (i, &a) in t.basis.iter().enumerate() {
            for (j, &b) in t.basis.iter().enumerate() {
                if a.count_ones() != b.count_ones() {
                    assert_eq!(t.matrix[(i, j)], re(0.0));
                }
            }
        }
    }

    #[test]
    fn commutes_with_generator_small() {
        let spec = SystemSpec::periodic(2, 0.5, re(0.3), 1);
        let chain = PeriodicChain::from_spec(&spec, Truncation::default()).unwrap();
        let t = chain.transfer(re(0.2), re(0.1)).unwrap();
        let m = build_markov(&spec).unwrap().matrix;
        assert!(max_abs(&(&m * &t - &t * &m)) < 1e-8);
    }

    #[test]
    fn t1_is_h() {
        let chain = PeriodicChain::new(2, 0.4, re(0.7), Some(1), Truncation::default()).unwrap();
        let t1 = chain.t_k(1, re(2.0)).unwrap();
        assert!(max_abs(&(t1 - CMatrix::identity(2, 2) * re(4.5))) < 1e-13);
    }

    #[test]
    fn rejects_zero_mu_unless_rescaled() {
        assert!(PeriodicChain::new(3, 0.4, re(0.0), Some(1), Truncation::default()).is_err());
        let c = PeriodicChain::with_scaling(3, 0.4, re(0.0), Some(1), Truncation::default(), Scaling::Rescaled).unwrap();
        let t = c.transfer(re(0.2), re(0.3)).unwrap();
        assert!(t.iter().all(|&v| v == re(1.0)));
    }
}
