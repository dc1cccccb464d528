//! Matrix-product steady state of the open chain at `μ = 0`.
//!
//! `D = d + n_x` and `E = e + n_x` are read off `X(x, x)`; with the `U`-row
//! boundary vectors they give the stationary weights
//! `⟨⟨W(x)| Π_i (τ_i D + (1 − τ_i) E) |V(x)⟩⟩`, site 1 leftmost.

use nalgebra::DVector;

use crate::error::{domain, Error, Result};
use crate::markov_oracle::{build_markov, stationary_state, BoundaryRates, SystemSpec};
use crate::qspecial::{ab_from_rates, qpoch_inf, ABParameters};
use crate::transfer::boundary::{boundary_residuals, v_coefficients, w_coefficients};
use crate::transfer::{decay_ratio, Truncation, XMatrix, XVariant};
use crate::{re, CMatrix, C64};

/// Truncated `D`, `E` together with the boundary vectors that close them.
#[derive(Clone, Debug, PartialEq)]
pub struct DEOperators {
    pub d: CMatrix,
    pub e: CMatrix,
    pub x: f64,
    pub q: f64,
    pub rates: BoundaryRates,
    pub ab: ABParameters,
    /// `⟨⟨W(x)|` as a row.
    pub w: DVector<C64>,
    /// `|V(x)⟩⟩`.
    pub v: DVector<C64>,
}

/// `D` and `E` at free parameter `x`, truncated at `n` levels.
pub fn build_de(x: f64, q: f64, rates: &BoundaryRates, n: usize) -> Result<DEOperators> {
    if n < 2 {
        return domain(format!("truncation must be at least 2, got {n}"));
    }
    rates.validate()?;
    let ab = ab_from_rates(rates, q)?;
    let [[nx, ex], [dx, _]] = XMatrix::new(re(x), re(x), q, n, XVariant::Standard)?.dense_blocks();
    Ok(DEOperators {
        d: &dx + &nx,
        e: &ex + &nx,
        x,
        q,
        rates: *rates,
        ab,
        w: DVector::from_vec(w_coefficients(re(x), &ab, q, n)),
        v: DVector::from_vec(v_coefficients(re(x), &ab, q, n)),
    })
}

impl DEOperators {
    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    /// `max |DE − qED − (1−q)(D+E)|` over rows and columns `0..N−2`.
    pub fn algebra_residual(&self) -> f64 {
        let n = self.dim();
        let r = &self.d * &self.e - &self.e * &self.d * re(self.q) - (&self.d + &self.e) * re(1.0 - self.q);
        r.view((0, 0), (n - 1, n - 1)).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `[βD − δE − (1−q)]|V⟩⟩` and `⟨⟨W|[αE − γD − (1−q)]`, each the max
    /// modulus over the first `N − 1` components.
    pub fn boundary_residuals(&self) -> Result<[f64; 2]> {
        let r = boundary_residuals(re(self.x), re(self.x), &self.rates, &self.ab, self.q, self.dim())?;
        Ok([r[0], r[1]])
    }

    /// `(ax, ãx, bx, b̃x)_∞`, the `x`-dependence of the raw contraction.
    pub fn normalisation(&self) -> Result<C64> {
        let p: C64 = self.ab.all().iter().map(|&s| qpoch_inf(re(s * self.x), self.q)).product();
        if p.norm() < 1e-300 {
            return Err(Error::Pole(format!("(ax, ãx, bx, b̃x)_∞ vanishes at x = {}", self.x)));
        }
        Ok(p)
    }
}

/// Unnormalised weight of `config` on `l` sites, divided by
/// [`DEOperators::normalisation`] so that it does not depend on `x`.
pub fn steady_weight(config: usize, l: usize, de: &DEOperators) -> Result<f64> {
    if l < usize::BITS as usize && config >> l != 0 {
        return domain(format!("configuration {config:#b} has sites beyond L = {l}"));
    }
    let mut row = de.w.transpose();
    for site in 0..l {
        row = if (config >> site) & 1 == 1 { &row * &de.d } else { &row * &de.e };
    }
    let raw = (row * &de.v)[(0, 0)] / de.normalisation()?;
    if !raw.is_finite() {
        return Err(Error::Divergent(format!("boundary contraction is not finite for {config:#b}")));
    }
    Ok(raw.re)
}

/// All weights of an `l`-site chain, indexed by configuration bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    pub l: usize,
    pub weights: Vec<f64>,
    /// `Z_L = Σ_C weight(C)`.
    pub z: f64,
}

impl SteadyState {
    pub fn probabilities(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.z).collect()
    }
}

/// Levels for an `l`-site chain: the shared policy plus `l`, since each site
/// moves the contraction by at most one level.
pub fn default_truncation(l: usize, q: f64, ab: &ABParameters) -> usize {
    Truncation::default().resolve(decay_ratio(q, Some(ab), re(f64::INFINITY))) + l
}

pub fn steady_state(l: usize, rates: &BoundaryRates, q: f64, x: f64, n: Option<usize>) -> Result<SteadyState> {
    if l == 0 {
        return domain("L must be at least 1");
    }
    let ab = ab_from_rates(rates, q)?;
    if !ab.is_max_current() {
        return domain(format!("the boundary contraction needs |a|, |ã|, |b|, |b̃| < 1, got {ab:?}"));
    }
    let de = build_de(x, q, rates, n.unwrap_or_else(|| default_truncation(l, q, &ab)))?;
    let weights = (0..1usize << l).map(|c| steady_weight(c, l, &de)).collect::<Result<Vec<_>>>()?;
    let z = weights.iter().sum();
    Ok(SteadyState { l, weights, z })
}

/// Stationarity of the matrix-product state against the `μ = 0` generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationarityReport {
    /// `‖M₀|P*⟩‖∞ / ‖|P*⟩‖∞`.
    pub residual: f64,
    /// Angle in radians between `|P*⟩` and the null vector of `M₀`.
    pub angle: f64,
}

pub fn verify_stationarity(l: usize, rates: &BoundaryRates, q: f64, n: Option<usize>) -> Result<StationarityReport> {
    let p = steady_state(l, rates, q, 0.0, n)?.probabilities();
    let m = build_markov(&SystemSpec::open(l, q, re(0.0), *rates))?;
    let pv = DVector::from_iterator(p.len(), p.iter().map(|&v| re(v)));
    let mp = &m.matrix * &pv;
    let pmax = p.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let residual = mp.iter().fold(0.0f64, |a, z| a.max(z.norm())) / pmax;
    let s = stationary_state(&m)?;
    let unit = |v: &[f64]| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect::<Vec<_>>()
    };
    let (u, w) = (unit(&p), unit(&s));
    let chord = u.iter().zip(&w).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Ok(StationarityReport { residual, angle: 2.0 * (chord / 2.0).asin() })
}
