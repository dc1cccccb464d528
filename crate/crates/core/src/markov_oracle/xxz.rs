//! Open XXZ chain with non-diagonal boundaries. For `q > 0` the generator
//! with fugacities `μ_0 = ν_0 + ½ ln(γ/α)`, `μ_i = ½ ln q`,
//! `μ_L = ν_L + ½ ln(δ/β)` equals `√q H + ε`, where
//!
//! `H = ½ Σ_i (σˣσˣ + σʸσʸ + Δ σᶻσᶻ)_{i,i+1} + h⁽⁰⁾ + h⁽ᴸ⁾`.

use super::{build_with_factors, BondFactors, BoundaryRates, DeformedMarkovMatrix, Geometry, DEFAULT_MAX_SITES};
use crate::error::{domain, Result};
use crate::{re, CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XXZParameters {
    pub l: usize,
    pub q: f64,
    pub delta: f64,
    pub a_z: C64,
    pub a_plus: C64,
    pub a_minus: C64,
    pub b_z: C64,
    pub b_plus: C64,
    pub b_minus: C64,
    pub nu0: C64,
    pub nu_l: C64,
    pub epsilon: f64,
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("the XXZ map needs 0 < q < 1, got {q}"));
    }
    Ok(())
}

/// Boundary fields, anisotropy and shift for `L` sites.
pub fn xxz_map(rates: &BoundaryRates, q: f64, nu0: C64, nu_l: C64, l: usize) -> Result<XXZParameters> {
    check_q(q)?;
    rates.validate()?;
    if l == 0 {
        return domain("L must be at least 1");
    }
    let BoundaryRates { alpha, beta, gamma, delta } = *rates;
    let sq = q.sqrt();
    let left = re(alpha * gamma / q).sqrt();
    let right = re(beta * delta / q).sqrt();
    Ok(XXZParameters {
        l,
        q,
        delta: (1.0 / sq + sq) / 2.0,
        a_z: re((1.0 - q - 2.0 * alpha + 2.0 * gamma) / (4.0 * sq)),
        a_plus: left * nu0.exp(),
        a_minus: left * (-nu0).exp(),
        b_z: re((-1.0 + q + 2.0 * beta - 2.0 * delta) / (4.0 * sq)),
        b_plus: right * (-nu_l).exp(),
        b_minus: right * nu_l.exp(),
        nu0,
        nu_l,
        epsilon: -((l - 1) as f64) * (1.0 + q) / 4.0 - (alpha + beta + gamma + delta) / 2.0,
    })
}

/// Inverse of [`xxz_map`]: rates and gauge phases. A vanishing product
/// `a₊a₋` (or `b₊b₋`) leaves the phase undetermined; it is then set to 0.
pub fn rates_from_xxz(p: &XXZParameters) -> Result<(BoundaryRates, C64, C64)> {
    check_q(p.q)?;
    let q = p.q;
    let sq = q.sqrt();
    let split = |diff: C64, prod: C64| -> (C64, C64) {
        let sum = (diff * diff + prod * 4.0).sqrt();
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    };
    let (alpha, gamma) = split((1.0 - q - p.a_z * (4.0 * sq)) / 2.0, p.a_plus * p.a_minus * q);
    let (beta, delta) = split((p.b_z * (4.0 * sq) + 1.0 - q) / 2.0, p.b_plus * p.b_minus * q);
    let phase = |num: C64, den: C64| {
        if num.norm() == 0.0 || den.norm() == 0.0 {
            re(0.0)
        } else {
            (num / den).ln() / 2.0
        }
    };
    let nu0 = phase(p.a_plus, p.a_minus);
    let nu_l = phase(p.b_minus, p.b_plus);
    let all = [alpha, beta, gamma, delta];
    if all.iter().any(|z| z.im.abs() > 1e-12 * (1.0 + z.norm())) {
        return domain(format!("boundary fields give complex rates {all:?}"));
    }
    let rates = BoundaryRates::new(alpha.re, beta.re, gamma.re.max(0.0), delta.re.max(0.0));
    rates.validate()?;
    Ok((rates, nu0, nu_l))
}

/// Dense `H` in the configuration basis (site 1 in the lowest bit).
pub fn xxz_hamiltonian(p: &XXZParameters) -> CMatrix {
    let l = p.l;
    let dim = 1usize << l;
    let mut h = CMatrix::zeros(dim, dim);
    let dz = re(p.delta / 2.0);
    for c in 0..dim {
        for i in 0..l.saturating_sub(1) {
            let (s, t) = ((c >> i) & 1, (c >> (i + 1)) & 1);
            if s == t {
                h[(c, c)] += dz;
            } else {
                h[(c, c)] -= dz;
                h[(c ^ (3 << i), c)] += re(1.0);
            }
        }
        let site = |h: &mut CMatrix, i: usize, z: C64, lower: C64, raise: C64| {
            if (c >> i) & 1 == 0 {
                h[(c, c)] += z;
                h[(c | (1 << i), c)] += raise;
            } else {
                h[(c, c)] -= z;
                h[(c & !(1 << i), c)] += lower;
            }
        };
        site(&mut h, 0, p.a_z, p.a_minus, p.a_plus);
        site(&mut h, l - 1, p.b_z, p.b_minus, p.b_plus);
    }
    h
}

/// Generator in the gauge where it equals `√q H + ε`.
pub fn xxz_gauge_markov(rates: &BoundaryRates, q: f64, nu0: C64, nu_l: C64, l: usize) -> Result<DeformedMarkovMatrix> {
    check_q(q)?;
    rates.validate()?;
    if rates.alpha <= 0.0 || rates.beta <= 0.0 {
        return domain("the XXZ gauge needs alpha > 0 and beta > 0");
    }
    let BoundaryRates { alpha, beta, gamma, delta } = *rates;
    let sq = q.sqrt();
    let mut factors = vec![BondFactors { forward: re(sq), backward: re(1.0 / sq) }; l + 1];
    factors[0] = BondFactors {
        forward: re((gamma / alpha).sqrt()) * nu0.exp(),
        backward: re((alpha / gamma).sqrt()) * (-nu0).exp(),
    };
    factors[l] = BondFactors {
        forward: re((delta / beta).sqrt()) * nu_l.exp(),
        backward: re((beta / delta).sqrt()) * (-nu_l).exp(),
    };
    build_with_factors(l, q, &Geometry::Open(*rates), &factors, DEFAULT_MAX_SITES)
}
