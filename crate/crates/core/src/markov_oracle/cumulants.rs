use super::eigen::{dominant_eigenvalue, eigenvalues, nearest};
use super::{build_markov, SystemSpec};
use crate::bethe::{CumulantMethod, CumulantSeries};
use crate::error::{domain, Error, Result};
use crate::C64;
use std::f64::consts::PI;

/// Largest order accepted by the Cauchy extraction.
pub const MAX_ORDER: usize = 8;

/// Sampling circle used by [`cumulants_oracle_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchyOptions {
    pub radius: f64,
    pub samples: usize,
    /// Steps taken along the ray from `μ = 0` to the first sample.
    pub radial_steps: usize,
}

impl Default for CauchyOptions {
    fn default() -> Self {
        Self { radius: 0.1, samples: 64, radial_steps: 16 }
    }
}

/// Cumulants of the current from the exact generator, with the default
/// sampling circle.
pub fn cumulants_oracle(spec: &SystemSpec, n_max: usize) -> Result<CumulantSeries> {
    cumulants_oracle_with(spec, n_max, &CauchyOptions::default())
}

/// Samples `E(μ)` on `μ = r e^{iθ_j}`, `θ_j = π(2j+1)/K`, following the
/// branch through `μ = 0`, and inverts the discrete Fourier series.
pub fn cumulants_oracle_with(spec: &SystemSpec, n_max: usize, opts: &CauchyOptions) -> Result<CumulantSeries> {
    if n_max > MAX_ORDER {
        return domain(format!("order {n_max} exceeds {MAX_ORDER}"));
    }
    if opts.samples <= 2 * n_max || !(opts.radius > 0.0) || opts.radial_steps == 0 {
        return domain(format!("invalid sampling options {opts:?}"));
    }
    let k = opts.samples;
    let eval_at = |mu: C64| build_markov(&spec.with_mu(mu));
    let mut prev = dominant_eigenvalue(&eval_at(C64::from(0.0))?, None)?;
    let theta = |j: usize| PI * (2 * j + 1) as f64 / k as f64;
    let step = |mu: C64, prev: C64, angle: f64| -> Result<C64> {
        let ev = eigenvalues(&eval_at(mu)?.matrix)?;
        nearest(&ev, prev).map_err(|detail| Error::Branch { angle, detail })
    };
    let start = C64::from_polar(opts.radius, theta(0));
    for s in 1..=opts.radial_steps {
        prev = step(start * (s as f64 / opts.radial_steps as f64), prev, theta(0))?;
    }
    let mut samples = Vec::with_capacity(k);
    samples.push(prev);
    for j in 1..k {
        prev = step(C64::from_polar(opts.radius, theta(j)), prev, theta(j))?;
        samples.push(prev);
    }
    let closing = step(start, prev, theta(0))?;
    if (closing - samples[0]).norm() > 1e-10 * (1.0 + samples[0].norm()) {
        return Err(Error::Branch {
            angle: theta(0),
            detail: format!("branch does not close: {} vs {}", closing, samples[0]),
        });
    }
    let mut taylor = vec![0.0; n_max + 1];
    let mut imag: f64 = 0.0;
    let mut fact = 1.0;
    for (order, slot) in taylor.iter_mut().enumerate() {
        if order > 0 {
            fact *= order as f64;
        }
        let coeff: C64 = samples
            .iter()
            .enumerate()
            .map(|(j, e)| e * C64::from_polar(1.0, -(order as f64) * theta(j)))
            .sum::<C64>()
            / (k as f64 * opts.radius.powi(order as i32));
        *slot = coeff.re;
        imag = imag.max(coeff.im.abs() * fact);
    }
    let mut series = CumulantSeries::from_taylor(&taylor, CumulantMethod::Oracle);
    series.imag_residue = imag;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov_oracle::BoundaryRates;
    use crate::re;

    #[test]
    fn one_site_tasep() {
        let spec = SystemSpec::open(1, 0.0, re(0.0), BoundaryRates::tasep(1.0, 1.0));
        let c = cumulants_oracle(&spec, 4).unwrap();
        assert!(c.cumulant(0).abs() < 1e-15);
        for (k, want, tol) in [(1, 0.5, 1e-12), (2, 0.25, 1e-12), (3, 0.125, 1e-12), (4, 0.0625, 1e-9)] {
            assert!((c.cumulant(k) - want).abs() < tol, "c{k} = {}", c.cumulant(k));
        }
    }

    #[test]
    fn rejects_bad_orders() {
        let spec = SystemSpec::open(1, 0.0, re(0.0), BoundaryRates::tasep(1.0, 1.0));
        assert!(cumulants_oracle(&spec, 9).is_err());
        let opts = CauchyOptions { samples: 8, ..Default::default() };
        assert!(cumulants_oracle_with(&spec, 5, &opts).is_err());
    }
}
