use crate::error::{domain, Result};
use crate::C64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Function on the unit circle sampled at `z_j = e^{iπ(2j+1)/M}`. The grid
/// is offset by half a step so that it never contains `z = ±1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleFunction {
    samples: Vec<C64>,
}

impl CircleFunction {
    /// Default number of samples.
    pub const DEFAULT_GRID: usize = 512;

    pub fn from_samples(samples: Vec<C64>) -> Result<Self> {
        let m = samples.len();
        if m < 2 || !m.is_power_of_two() {
            return domain(format!("grid size must be a power of two >= 2, got {m}"));
        }
        Ok(Self { samples })
    }

    pub fn from_fn<F: Fn(C64) -> Result<C64>>(m: usize, f: F) -> Result<Self> {
        let samples = grid(m).into_iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::from_samples(samples)
    }

    pub fn constant(m: usize, c: C64) -> Result<Self> {
        Self::from_samples(vec![c; m])
    }

    /// Builds the function `Σ_k c_k z^k` from Laurent coefficients given in
    /// FFT order (index `k mod M`).
    pub fn from_laurent(coeffs: &[C64]) -> Result<Self> {
        let m = coeffs.len();
        let mut buf: Vec<C64> = coeffs.iter().enumerate().map(|(i, &c)| c * twiddle(freq(i, m), m)).collect();
        FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
        Self::from_samples(buf)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn points(&self) -> Vec<C64> {
        grid(self.len())
    }

    /// Laurent coefficients in FFT order: entry `i` is `c_k` with
    /// `k = i` for `i < M/2` and `k = i − M` otherwise.
    pub fn laurent(&self) -> Vec<C64> {
        let m = self.len();
        let mut buf = self.samples.clone();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        buf.iter().enumerate().map(|(i, &c)| c / (twiddle(freq(i, m), m) * m as f64)).collect()
    }

    /// Zeroth Laurent coefficient, `∮ f dz / (2πi z)`.
    pub fn mean(&self) -> C64 {
        self.samples.iter().sum::<C64>() / self.len() as f64
    }

    /// Largest Laurent coefficient with `|k| ≥ 7M/16`, relative to the
    /// largest coefficient overall (or 1 if that is smaller).
    pub fn tail(&self) -> f64 {
        let m = self.len() as i64;
        let c = self.laurent();
        let peak = c.iter().fold(1.0f64, |a, z| a.max(z.norm()));
        let tail = c
            .iter()
            .enumerate()
            .filter(|(i, _)| 16 * freq(*i, m as usize).abs() >= 7 * m)
            .fold(0.0f64, |a, (_, z)| a.max(z.norm()));
        tail / peak
    }

    pub fn map<F: Fn(C64, C64) -> C64>(&self, f: F) -> Self {
        let samples = self.points().into_iter().zip(&self.samples).map(|(z, &v)| f(z, v)).collect();
        Self { samples }
    }

    pub fn zip_with<F: Fn(C64, C64) -> C64>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        Self { samples: self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { samples: self.samples.iter().map(|&v| v * c).collect() }
    }
}

/// Signed frequency of FFT slot `i`.
fn freq(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

fn twiddle(k: i64, m: usize) -> C64 {
    C64::from_polar(1.0, PI * k as f64 / m as f64)
}

/// The sampling points `e^{iπ(2j+1)/M}`.
pub fn grid(m: usize) -> Vec<C64> {
    (0..m).map(|j| C64::from_polar(1.0, PI * (2 * j + 1) as f64 / m as f64)).collect()
}

/// Convolution with the kernel `K`, acting on Laurent modes as
/// `z^k ↦ scale · q^{|k|}/(1 − q^{|k|}) z^k` for `k ≠ 0` and killing `k = 0`.
/// The open chain uses `scale = 2`, the ring `scale = 1`.
pub fn convolve_scaled(f: &CircleFunction, q: f64, scale: f64) -> CircleFunction {
    let m = f.len();
    if q == 0.0 {
        return CircleFunction { samples: vec![C64::from(0.0); m] };
    }
    let mut c = f.laurent();
    for (i, ci) in c.iter_mut().enumerate() {
        let k = freq(i, m).unsigned_abs() as i32;
        *ci *= if k == 0 { 0.0 } else { scale * q.powi(k) / (1.0 - q.powi(k)) };
    }
    CircleFunction::from_laurent(&c).expect("grid size unchanged")
}

/// The kernel convolution of the open chain.
pub fn convolve_x(f: &CircleFunction, q: f64) -> CircleFunction {
    convolve_scaled(f, q, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::re;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_avoids_real_axis_endpoints() {
        for z in grid(64) {
            assert!((z - 1.0).norm() > 1e-3 && (z + 1.0).norm() > 1e-3);
        }
    }

    #[test]
    fn roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s: Vec<C64> = (0..128).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let f = CircleFunction::from_samples(s.clone()).unwrap();
        let g = CircleFunction::from_laurent(&f.laurent()).unwrap();
        for (a, b) in s.iter().zip(g.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_on_simple_modes() {
        let q = 0.3;
        let c = CircleFunction::constant(64, re(2.5)).unwrap();
        assert!(convolve_x(&c, q).samples().iter().all(|z| z.norm() < 1e-14));
        let f = CircleFunction::from_fn(64, |z| Ok(z + 1.0 / z)).unwrap();
        let g = convolve_x(&f, q);
        let want = 2.0 * q / (1.0 - q);
        for (z, v) in f.points().into_iter().zip(g.samples()) {
            assert!((v - (z + 1.0 / z) * want).norm() < 1e-13);
        }
        assert!(convolve_x(&f, 0.0).samples().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn kernel_matches_direct_quadrature() {
        // K(z) = Σ_{k≥1} q^k/(1−q^k) (z^k + z^{-k}) truncated at 64 terms;
        // X[f](z) = 2 ∮ K(z/w) f(w) dw/(2πi w).
        let q: f64 = 0.45;
        let m = 128;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let modes: Vec<(i32, C64)> = (-6..=6).map(|k| (k, C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))).collect();
        let f = CircleFunction::from_fn(m, |z| Ok(modes.iter().map(|&(k, c)| c * z.powi(k)).sum())).unwrap();
        let kernel = |z: C64| -> C64 {
            (1..=64).map(|k| (z.powi(k) + z.powi(-k)) * (q.powi(k) / (1.0 - q.powi(k)))).sum()
        };
        let pts = f.points();
        let spectral = convolve_x(&f, q);
        for (i, &z) in pts.iter().enumerate().step_by(9) {
            let direct: C64 = pts.iter().zip(f.samples()).map(|(&w, &fw)| kernel(z / w) * fw).sum::<C64>() * (2.0 / m as f64);
            assert!((direct - spectral.samples()[i]).norm() < 1e-10);
        }
    }
}
