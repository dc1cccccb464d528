use super::circle::{convolve_scaled, CircleFunction};
use super::{BSeries, CumulantMethod, CumulantSeries, PipelineMode};
use crate::error::{domain, Error, Result};
use crate::C64;

/// Highest order in `B` accepted by the pipeline.
pub const MAX_ORDER: usize = 8;

/// Relative size of the highest Laurent modes above which a grid is deemed
/// too coarse.
pub const TAIL_TOL: f64 = 1e-10;

/// `W(z) = Σ_n B^n W_n(z)`; entry `0` is identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct WSeries {
    pub orders: Vec<CircleFunction>,
    pub q: f64,
    pub mode: PipelineMode,
}

impl WSeries {
    pub fn n_max(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn grid(&self) -> usize {
        self.orders[0].len()
    }
}

/// Solves `W = −c ln(1 − B F e^{X[W]})` order by order in `B`, with
/// `c = ½` (open) or `c = 1` (ring) and `F` the given source.
pub fn solve_w_series(source: &CircleFunction, q: f64, mode: PipelineMode, n_max: usize) -> Result<WSeries> {
    if n_max > MAX_ORDER {
        return domain(format!("order {n_max} exceeds {MAX_ORDER}"));
    }
    let m = source.len();
    let zero = CircleFunction::constant(m, C64::from(0.0))?;
    let one = CircleFunction::constant(m, C64::from(1.0))?;
    let (pref, scale) = match mode {
        PipelineMode::Open => (0.5, 2.0),
        PipelineMode::Periodic => (1.0, 1.0),
    };
    // w: W_n, y: X[W_n], ex: coefficients of e^{X[W]}, v: coefficients of
    // −B F e^{X[W]}, lg: coefficients of ln(1 + v).
    let mut w = vec![zero.clone()];
    let mut y = vec![zero.clone()];
    let mut ex = vec![one];
    let mut v = vec![zero.clone()];
    let mut lg = vec![zero];
    for n in 1..=n_max {
        v.push(source.zip_with(&ex[n - 1], |f, e| -f * e));
        let mut ln = v[n].clone();
        for i in 1..n {
            let c = C64::from(i as f64 / n as f64);
            ln = ln.zip_with(&lg[i].zip_with(&v[n - i], |a, b| a * b), |a, b| a - c * b);
        }
        lg.push(ln.clone());
        let wn = ln.scale(C64::from(-pref));
        if wn.tail() > TAIL_TOL {
            return Err(Error::GridTooCoarse(format!(
                "order {n}: Laurent tail {:.2e} on {m} points",
                wn.tail()
            )));
        }
        y.push(convolve_scaled(&wn, q, scale));
        w.push(wn);
        let mut en = CircleFunction::constant(m, C64::from(0.0))?;
        for k in 1..=n {
            let c = C64::from(k as f64 / n as f64);
            en = en.zip_with(&y[k].zip_with(&ex[n - k], |a, b| a * b), |a, b| a + c * b);
        }
        ex.push(en);
    }
    Ok(WSeries { orders: w, q, mode })
}

/// Like [`solve_w_series`] but samples the source itself, doubling the grid
/// from `start` until the Laurent tails are negligible or `max_grid` is hit.
pub fn solve_w_series_auto<F>(source: F, q: f64, mode: PipelineMode, n_max: usize, start: usize, max_grid: usize) -> Result<WSeries>
where
    F: Fn(C64) -> Result<C64>,
{
    let mut m = start;
    loop {
        let src = CircleFunction::from_fn(m, &source)?;
        match solve_w_series(&src, q, mode, n_max) {
            Err(Error::GridTooCoarse(_)) if m < max_grid => m *= 2,
            other => return other,
        }
    }
}

/// Coefficients of `μ(B) = −∮ W dz/(2πi z)` and
/// `E(B) = −(1 − q) ∮ W dz/(2πi (1 + z)²)`.
pub fn mu_and_e_of_b(w: &WSeries) -> (BSeries, BSeries) {
    let pts = w.orders[0].points();
    let mut mu = vec![C64::from(0.0)];
    let mut e = vec![C64::from(0.0)];
    for wn in &w.orders[1..] {
        mu.push(-wn.mean());
        let weighted: C64 = pts.iter().zip(wn.samples()).map(|(&z, &v)| v * z / ((1.0 + z) * (1.0 + z))).sum();
        e.push(-(1.0 - w.q) * weighted / pts.len() as f64);
    }
    (BSeries { coeffs: mu }, BSeries { coeffs: e })
}

/// Truncated composition `f(g(μ))` with `g(0) = 0`, up to order `n`.
fn compose(f: &[f64], g: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let mut pow = vec![0.0; n + 1];
    pow[0] = 1.0;
    for &fk in f.iter().skip(1).take(n) {
        let mut next = vec![0.0; n + 1];
        for (i, &p) in pow.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (j, &gj) in g.iter().enumerate().skip(1) {
                if i + j > n {
                    break;
                }
                next[i + j] += p * gj;
            }
        }
        pow = next;
        for (o, p) in out.iter_mut().zip(&pow) {
            *o += fk * p;
        }
    }
    out
}

/// Eliminates `B` between `μ(B)` and `E(B)` by series reversion and returns
/// the cumulants `c_k = k! [μ^k] E`.
pub fn cumulants_from_series(mu: &BSeries, e: &BSeries, n_max: usize) -> Result<CumulantSeries> {
    if n_max == 0 {
        return Ok(CumulantSeries::from_taylor(&[0.0], CumulantMethod::Bethe));
    }
    if mu.coeffs.len() <= n_max || e.coeffs.len() <= n_max {
        return domain(format!("series too short for order {n_max}"));
    }
    let mu_r: Vec<f64> = mu.coeffs.iter().map(|z| z.re).collect();
    let e_r: Vec<f64> = e.coeffs.iter().map(|z| z.re).collect();
    if mu_r[1].abs() < 1e-14 {
        return Err(Error::Singular("mu(B) has no linear term; cannot invert".into()));
    }
    let mut b = vec![0.0; n_max + 1];
    b[1] = 1.0 / mu_r[1];
    for k in 2..=n_max {
        let s = compose(&mu_r, &b, k)[k];
        b[k] = -s / mu_r[1];
    }
    let taylor = compose(&e_r, &b, n_max);
    let mut series = CumulantSeries::from_taylor(&taylor, CumulantMethod::Bethe);
    series.imag_residue = mu.max_imag().max(e.max_imag());
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::re;

    fn f_l1_free(z: C64) -> Result<C64> {
        // q = 0, a = ã = b = b̃ = 0, L = 1
        Ok((1.0 + z) * (1.0 + 1.0 / z) * (1.0 - z * z) * (1.0 - 1.0 / (z * z)))
    }

    #[test]
    fn first_orders_closed_form() {
        let q = 0.35;
        let src = CircleFunction::from_fn(256, |z| Ok((1.0 + z) * (1.0 + 1.0 / z) * 0.7)).unwrap();
        let w = solve_w_series(&src, q, PipelineMode::Open, 2).unwrap();
        let half = src.scale(re(0.5));
        for (a, b) in w.orders[1].samples().iter().zip(half.samples()) {
            assert!((a - b).norm() < 1e-14);
        }
        let xh = super::super::circle::convolve_x(&half, q);
        for ((a, f), x) in w.orders[2].samples().iter().zip(src.samples()).zip(xh.samples()) {
            let want = f * f / 4.0 + f / 2.0 * x;
            assert!((a - want).norm() < 1e-13);
        }
    }

    #[test]
    fn q_zero_is_pure_logarithm() {
        let src = CircleFunction::from_fn(128, f_l1_free).unwrap();
        let w = solve_w_series(&src, 0.0, PipelineMode::Open, 5).unwrap();
        for n in 1..=5 {
            for (a, f) in w.orders[n].samples().iter().zip(src.samples()) {
                assert!((a - f.powi(n as i32) / (2.0 * n as f64)).norm() < 1e-11 * (1.0 + f.norm().powi(n as i32)));
            }
        }
    }

    #[test]
    fn first_order_hand_residues() {
        let src = CircleFunction::from_fn(128, f_l1_free).unwrap();
        let w = solve_w_series(&src, 0.0, PipelineMode::Open, 1).unwrap();
        let (mu, e) = mu_and_e_of_b(&w);
        assert!(mu.coeffs[0].norm() == 0.0 && e.coeffs[0].norm() == 0.0);
        assert!((mu.coeffs[1] + 2.0).norm() < 1e-13);
        assert!((e.coeffs[1] + 1.0).norm() < 1e-13);
    }

    #[test]
    fn proportional_series_revert_exactly() {
        let mu = BSeries { coeffs: vec![re(0.0), re(-2.0), re(0.7), re(0.3), re(-0.1)] };
        let e = BSeries { coeffs: mu.coeffs.iter().map(|c| c * 1.5).collect() };
        let c = cumulants_from_series(&mu, &e, 4).unwrap();
        assert!((c.cumulant(1) - 1.5).abs() < 1e-14);
        for k in 2..=4 {
            assert!(c.cumulant(k).abs() < 1e-13);
        }
    }

    #[test]
    fn one_site_tasep_cumulants() {
        let src = CircleFunction::from_fn(128, f_l1_free).unwrap();
        let w = solve_w_series(&src, 0.0, PipelineMode::Open, 4).unwrap();
        let (mu, e) = mu_and_e_of_b(&w);
        let c = cumulants_from_series(&mu, &e, 4).unwrap();
        for (k, want) in [(1, 0.5), (2, 0.25), (3, 0.125), (4, 0.0625)] {
            assert!((c.cumulant(k) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_reversion() {
        let z = BSeries { coeffs: vec![re(0.0); 3] };
        assert!(cumulants_from_series(&z, &z, 2).is_err());
        assert!(cumulants_from_series(&z, &z, 0).unwrap().cumulants.len() == 1);
    }
}
