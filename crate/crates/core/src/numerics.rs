//! Small numerical helpers shared by the verification routines: norms,
//! relative residuals and numerical differentiation of matrix-valued
//! functions.

use crate::{CMatrix, Result, C64};

/// Entrywise max-modulus norm.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `‖a − b‖∞ / max(‖a‖∞, ‖b‖∞, floor)`.
pub fn rel_diff(a: &CMatrix, b: &CMatrix, floor: f64) -> f64 {
    max_abs(&(a - b)) / max_abs(a).max(max_abs(b)).max(floor)
}

/// How a derivative is approximated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiffMethod {
    /// Plain central difference with step `h`.
    Central { h: f64 },
    /// Ridders–Richardson extrapolation starting from step `h0`.
    Ridders { h0: f64 },
}

impl Default for DiffMethod {
    fn default() -> Self {
        DiffMethod::Central { h: 1e-6 }
    }
}

/// Limit `g(h) → g(0)` of an even function of `h`, by Neville extrapolation
/// in `h²` over a geometric sequence of steps. Returns the estimate and its
/// error estimate.
pub fn extrapolate_even<G>(g: G, h0: f64) -> Result<(CMatrix, f64)>
where
    G: Fn(f64) -> Result<CMatrix>,
{
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const NTAB: usize = 10;
    let mut tab: Vec<Vec<CMatrix>> = Vec::with_capacity(NTAB);
    let mut h = h0;
    let mut best = g(h)?;
    let mut err = f64::INFINITY;
    tab.push(vec![best.clone()]);
    for i in 1..NTAB {
        h /= CON;
        let mut row = vec![g(h)?];
        let mut fac = CON2;
        for j in 1..=i {
            let next = (&row[j - 1] * C64::from(fac) - &tab[i - 1][j - 1]) / C64::from(fac - 1.0);
            fac *= CON2;
            let e = max_abs(&(&next - &row[j - 1])).max(max_abs(&(&next - &tab[i - 1][j - 1])));
            if e <= err {
                err = e;
                best = next.clone();
            }
            row.push(next);
        }
        let stalled = max_abs(&(&row[i] - &tab[i - 1][i - 1])) >= 2.0 * err;
        tab.push(row);
        if stalled {
            break;
        }
    }
    Ok((best, err))
}

/// `f(x0)⁻¹ f'(x0)` along the real direction. The value at `x0` itself is
/// never requested: it is reconstructed from `x0 ± h`, so `f` may have a
/// removable singularity there.
pub fn log_derivative<F>(f: F, x0: C64, method: DiffMethod) -> Result<CMatrix>
where
    F: Fn(C64) -> Result<CMatrix>,
{
    let (value, deriv) = match method {
        DiffMethod::Central { h } => {
            let fp = f(x0 + h)?;
            let fm = f(x0 - h)?;
            let value = (&fp + &fm) * C64::from(0.5);
            let deriv = (&fp - &fm) / C64::from(2.0 * h);
            (value, deriv)
        }
        DiffMethod::Ridders { h0 } => {
            let value = extrapolate_even(
                |h| {
                    let fp = f(x0 + h)?;
                    let fm = f(x0 - h)?;
                    Ok((fp + fm) * C64::from(0.5))
                },
                h0,
            )?
            .0;
            let deriv = extrapolate_even(
                |h| {
                    let fp = f(x0 + h)?;
                    let fm = f(x0 - h)?;
                    Ok((fp - fm) / C64::from(2.0 * h))
                },
                h0,
            )?
            .0;
            (value, deriv)
        }
    };
    value.lu().solve(&deriv).ok_or_else(|| {
        crate::Error::Singular(format!("matrix at x0 = {x0} is singular in the log-derivative"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::re;

    #[test]
    fn ridders_beats_central_on_exp() {
        let f = |x: C64| -> Result<CMatrix> { Ok(CMatrix::from_element(1, 1, (x * 3.0).exp())) };
        let c = log_derivative(f, re(0.2), DiffMethod::Central { h: 1e-6 }).unwrap();
        let r = log_derivative(f, re(0.2), DiffMethod::Ridders { h0: 0.1 }).unwrap();
        assert!((c[(0, 0)] - 3.0).norm() < 1e-8);
        assert!((r[(0, 0)] - 3.0).norm() < 1e-12);
    }

    #[test]
    fn removable_singularity() {
        // sin(x)/x · e^{2x} has log-derivative 2 at x = 0.
        let f = |x: C64| -> Result<CMatrix> {
            Ok(CMatrix::from_element(1, 1, x.sin() / x * (x * 2.0).exp()))
        };
        let r = log_derivative(f, re(0.0), DiffMethod::Ridders { h0: 0.1 }).unwrap();
        assert!((r[(0, 0)] - 2.0).norm() < 1e-11);
    }
}
