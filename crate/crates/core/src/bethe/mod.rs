//! Functional Bethe Ansatz for the dominant eigenvalue: from `F(x)` (open)
//! or `h(x)` (ring) to the self-consistent function `W`, then to the series
//! `μ(B)`, `E(B)` and finally to the cumulants of the current.

mod circle;
mod residue;
mod series;

pub use circle::{convolve_scaled, convolve_x, grid, CircleFunction};
pub use residue::tasep_residue_mode;
pub use series::{cumulants_from_series, mu_and_e_of_b, solve_w_series, solve_w_series_auto, WSeries, MAX_ORDER, TAIL_TOL};

use crate::error::{domain, Error, Result};
use crate::markov_oracle::{Geometry, SystemSpec};
use crate::qspecial::{ab_from_rates, qpoch_inf, ABParameters};
use crate::{re, C64};

/// Where a [`CumulantSeries`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CumulantMethod {
    Oracle,
    Bethe,
    Residue,
}

/// Cumulants `c_k` of the integrated current, `E(μ) = Σ_k c_k μ^k / k!`.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantSeries {
    /// `cumulants[k] = c_k`; `cumulants[0] = 0`.
    pub cumulants: Vec<f64>,
    pub method: CumulantMethod,
    /// Largest imaginary part discarded along the way.
    pub imag_residue: f64,
}

impl CumulantSeries {
    /// From Taylor coefficients `[μ^k] E`.
    pub fn from_taylor(taylor: &[f64], method: CumulantMethod) -> Self {
        let mut fact = 1.0;
        let cumulants = taylor
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                if k > 0 {
                    fact *= k as f64;
                }
                if k == 0 {
                    0.0
                } else {
                    t * fact
                }
            })
            .collect();
        Self { cumulants, method, imag_residue: 0.0 }
    }

    pub fn n_max(&self) -> usize {
        self.cumulants.len().saturating_sub(1)
    }

    /// `c_k`, or `NaN` beyond the computed order.
    pub fn cumulant(&self, k: usize) -> f64 {
        self.cumulants.get(k).copied().unwrap_or(f64::NAN)
    }

    /// `c_1 … c_{n_max}`.
    pub fn nonzero_orders(&self) -> &[f64] {
        self.cumulants.get(1..).unwrap_or(&[])
    }
}

/// Power series in `B`; entry `0` is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BSeries {
    pub coeffs: Vec<C64>,
}

impl BSeries {
    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }
}

/// Open chains carry `e^{−2μ}` in the functional relations, rings `e^{−μ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PipelineMode {
    Open,
    Periodic,
}

/// Contour evaluation strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BetheMethod {
    /// Unit circle, except residues when `q = 0` and some parameter `≥ 1`.
    Auto,
    UnitCircle,
    /// Residues at `q = 0`.
    Residue,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetheOptions {
    pub grid: usize,
    pub max_grid: usize,
    pub method: BetheMethod,
}

impl Default for BetheOptions {
    fn default() -> Self {
        Self { grid: CircleFunction::DEFAULT_GRID, max_grid: 1 << 15, method: BetheMethod::Auto }
    }
}

/// `F(x) = (1+x)^L (1+1/x)^L (x², x^{−2})_∞ / Π_s (s x, s/x)_∞`, the product
/// over `s ∈ {a, ã, b, b̃}`.
#[allow(non_snake_case)]
pub fn eval_F(x: C64, l: usize, ab: &ABParameters, q: f64) -> Result<C64> {
    if x.norm() == 0.0 {
        return Err(Error::Pole("F has a pole at x = 0".into()));
    }
    let mut den = re(1.0);
    for s in ab.all() {
        den *= qpoch_inf(x * s, q) * qpoch_inf(s / x, q);
    }
    if den.norm() < 1e-14 {
        return Err(Error::Pole(format!("F has a pole at x = {x}")));
    }
    let li = l as i32;
    Ok((1.0 + x).powi(li) * (1.0 + 1.0 / x).powi(li) * qpoch_inf(x * x, q) * qpoch_inf(1.0 / (x * x), q) / den)
}

/// `h(x) = (1+x)^{L−N} (1+1/x)^N` for the ring with `N` particles.
pub fn eval_h(x: C64, l: usize, n: usize) -> Result<C64> {
    if n > l {
        return domain(format!("sector N = {n} exceeds L = {l}"));
    }
    if x.norm() == 0.0 && n > 0 {
        return Err(Error::Pole("h has a pole at x = 0".into()));
    }
    Ok((1.0 + x).powi((l - n) as i32) * (1.0 + 1.0 / x).powi(n as i32))
}

/// `W` for the open chain on an automatically refined grid.
pub fn solve_open_w(l: usize, ab: &ABParameters, q: f64, n_max: usize, opts: &BetheOptions) -> Result<WSeries> {
    if q > 0.0 && !ab.is_max_current() {
        return domain(format!("unit-circle contours need |a|, |ã|, |b|, |b̃| < 1, got {ab:?}"));
    }
    solve_w_series_auto(|z| eval_F(z, l, ab, q), q, PipelineMode::Open, n_max, opts.grid, opts.max_grid)
}

/// `W` for the ring sector with `n` particles.
pub fn solve_periodic_w(l: usize, n: usize, q: f64, n_max: usize, opts: &BetheOptions) -> Result<WSeries> {
    solve_w_series_auto(|z| eval_h(z, l, n), q, PipelineMode::Periodic, n_max, opts.grid, opts.max_grid)
}

/// Cumulants of the current through the functional Bethe Ansatz.
pub fn bethe_cumulants(spec: &SystemSpec, n_max: usize, opts: &BetheOptions) -> Result<CumulantSeries> {
    spec.validate()?;
    if n_max > MAX_ORDER {
        return domain(format!("order {n_max} exceeds {MAX_ORDER}"));
    }
    let q = spec.q;
    let (mu, e, method) = match spec.geometry {
        Geometry::Periodic { particles } => {
            let w = solve_periodic_w(spec.l, particles, q, n_max, opts)?;
            let (mu, e) = mu_and_e_of_b(&w);
            (mu, e, CumulantMethod::Bethe)
        }
        Geometry::Open(rates) => {
            let ab = ab_from_rates(&rates, q)?;
            let residue = match opts.method {
                BetheMethod::Residue => true,
                BetheMethod::UnitCircle => false,
                BetheMethod::Auto => q == 0.0 && !ab.is_max_current(),
            };
            if residue {
                if q != 0.0 {
                    return domain("residue mode is only available for q = 0");
                }
                let (mu, e) = tasep_residue_mode(spec.l, &ab, n_max)?;
                (mu, e, CumulantMethod::Residue)
            } else {
                let w = solve_open_w(spec.l, &ab, q, n_max, opts)?;
                let (mu, e) = mu_and_e_of_b(&w);
                (mu, e, CumulantMethod::Bethe)
            }
        }
    };
    let mut c = cumulants_from_series(&mu, &e, n_max)?;
    c.method = method;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov_oracle::BoundaryRates;

    #[test]
    fn f_examples() {
        let free = ABParameters::new(0.0, 0.0, 0.0, 0.0);
        assert!((eval_F(re(2.0), 1, &free, 0.0).unwrap() - re(-10.125)).norm() < 1e-14);
        let ab = ABParameters::new(0.3, -0.1, 0.2, 0.05);
        assert!(eval_F(re(1.0), 3, &ab, 0.4).unwrap().norm() < 1e-15);
        let x = C64::new(0.4, 0.9);
        let (a, b) = (eval_F(x, 3, &ab, 0.4).unwrap(), eval_F(1.0 / x, 3, &ab, 0.4).unwrap());
        assert!((a - b).norm() < 1e-12 * a.norm());
        assert!((eval_h(re(2.0), 2, 1).unwrap() - 4.5).norm() < 1e-15);
    }

    #[test]
    fn one_site_tasep() {
        let spec = SystemSpec::open(1, 0.0, re(0.0), BoundaryRates::tasep(1.0, 1.0));
        let c = bethe_cumulants(&spec, 3, &BetheOptions::default()).unwrap();
        for (k, want) in [(1, 0.5), (2, 0.25), (3, 0.125)] {
            assert!((c.cumulant(k) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn orders_zero_is_empty() {
        let spec = SystemSpec::open(2, 0.3, re(0.0), BoundaryRates::new(0.9, 0.8, 0.1, 0.1));
        let c = bethe_cumulants(&spec, 0, &BetheOptions::default()).unwrap();
        assert!(c.nonzero_orders().is_empty());
    }

    #[test]
    fn grid_doubling_is_stable() {
        let ab = ab_from_rates(&BoundaryRates::new(0.8, 0.7, 0.1, 0.2), 0.3).unwrap();
        let run = |m: usize| {
            let src = CircleFunction::from_fn(m, |z| eval_F(z, 3, &ab, 0.3)).unwrap();
            mu_and_e_of_b(&solve_w_series(&src, 0.3, PipelineMode::Open, 2).unwrap())
        };
        let (mu1, e1) = run(512);
        let (mu2, e2) = run(1024);
        assert!((mu1.coeffs[2] - mu2.coeffs[2]).norm() < 1e-12);
        assert!((e1.coeffs[2] - e2.coeffs[2]).norm() < 1e-12);
    }

    #[test]
    fn max_current_required_for_q_positive() {
        let spec = SystemSpec::open(2, 0.3, re(0.0), BoundaryRates::new(0.2, 0.8, 0.0, 0.0));
        assert!(matches!(bethe_cumulants(&spec, 2, &BetheOptions::default()), Err(Error::Domain(_))));
    }
}
