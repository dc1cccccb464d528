//! Behaviour of `(1 − e^{−μ}) T_μ` as `μ → 0`.
//!
//! The trace or boundary contraction then picks up every auxiliary level with
//! almost equal weight, so the truncation grows like `1/μ`. The band
//! representation keeps this cheap.

use super::open::OpenChain;
use super::periodic::{PeriodicChain, Scaling};
use super::Truncation;
use crate::error::{domain, Result};
use crate::markov_oracle::{Geometry, SystemSpec};
use crate::numerics::{max_abs, rel_diff};
use crate::{re, CMatrix, C64};

/// Levels needed for `e^{−Nμ}` to fall below `1e−12`.
fn levels_for(mu: f64) -> usize {
    ((-(1e-12f64).ln()) / mu).ceil() as usize + 8
}

/// Measurements at one value of `μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitPoint {
    pub mu: f64,
    /// Ring: `max |(1−e^{−μ})T − J|` with `J` the all-ones sector projector.
    /// Open chain: second singular value over the first.
    pub deviation: f64,
    /// Largest relative difference between the rescaled matrices at the
    /// requested spectral values.
    pub y_spread: f64,
    pub truncation: usize,
}

/// One [`LimitPoint`] per `μ`, in the order given.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitReport {
    pub points: Vec<LimitPoint>,
}

impl LimitReport {
    /// `deviation(μ_{i+1}) / deviation(μ_i)` for consecutive points.
    pub fn deviation_ratios(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1].deviation / w[0].deviation).collect()
    }

    /// Same for the spread over spectral values.
    pub fn spread_ratios(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1].y_spread / w[0].y_spread).collect()
    }
}

fn spread(ms: &[CMatrix]) -> f64 {
    let mut s = 0.0f64;
    for (i, a) in ms.iter().enumerate() {
        for b in &ms[i + 1..] {
            s = s.max(rel_diff(a, b, 1e-300));
        }
    }
    s
}

fn second_over_first(m: &CMatrix) -> f64 {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    if s.len() < 2 || s[0] == 0.0 {
        return 0.0;
    }
    s[1] / s[0]
}

/// Rescaled transfer matrices for a decreasing sequence of `μ`.
///
/// Ring: `(1 − e^{−μ}) T(x, y)` for each `y` in `ys`. Open chain:
/// `(1 − e^{−μ}) c(y) T(y)` with `c(y) = (q)_∞/(ay, ãy, by, b̃y)_∞`, which is
/// `h_b(y)` once the `(y²)_∞` carried by the `T`-row vectors is removed.
/// The `μ` of `spec` itself is ignored.
pub fn mu_zero_limit_checks(spec: &SystemSpec, mus: &[f64], ys: &[f64], x: f64) -> Result<LimitReport> {
    spec.validate()?;
    if ys.is_empty() {
        return domain("at least one spectral value is needed");
    }
    let mut points = Vec::with_capacity(mus.len());
    for &mu in mus {
        if !(mu > 0.0) {
            return domain(format!("mu must be positive, got {mu}"));
        }
        let n = levels_for(mu);
        let s = 1.0 - (-mu).exp();
        let (deviation, mats) = match spec.geometry {
            Geometry::Periodic { particles } => {
                let ch = PeriodicChain::with_scaling(spec.l, spec.q, re(mu), Some(particles), Truncation::Fixed(n), Scaling::Rescaled)?;
                let j = ch.projector();
                let mats = ys.iter().map(|&y| ch.transfer(re(x), re(y))).collect::<Result<Vec<_>>>()?;
                let dev = mats.iter().map(|m| max_abs(&(m - &j))).fold(0.0, f64::max);
                (dev, mats)
            }
            Geometry::Open(_) => {
                let ch = OpenChain::new(&spec.with_mu(re(mu)), Truncation::Fixed(n))?;
                let mats = ys
                    .iter()
                    .map(|&y| -> Result<CMatrix> {
                        let y = C64::from(y);
                        Ok(ch.t(y)? * (ch.norm_c(y)? * s))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let dev = mats.iter().map(second_over_first).fold(0.0, f64::max);
                (dev, mats)
            }
        };
        points.push(LimitPoint { mu, deviation, y_spread: spread(&mats), truncation: n });
    }
    Ok(LimitReport { points })
}
