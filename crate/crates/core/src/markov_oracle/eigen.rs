use super::DeformedMarkovMatrix;
use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Largest dimension handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 4096;

const POWER_TOL: f64 = 1e-13;
const POWER_MAX_ITER: usize = 200_000;

/// Full spectrum of a dense matrix.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    if m.iter().any(|z| !z.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    m.clone()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Eigen(format!("Schur iteration did not converge (dim {})", m.nrows())))
}

/// Dominant eigenvalue `E(μ)`. Without a hint this is the eigenvalue of
/// largest real part; with a hint it is the eigenvalue closest to the hint,
/// which is how a branch is continued away from `μ = 0`.
pub fn dominant_eigenvalue(m: &DeformedMarkovMatrix, hint: Option<C64>) -> Result<C64> {
    let dim = m.dim();
    if dim > DENSE_LIMIT {
        if hint.is_some() {
            return Err(Error::Eigen(format!("continuation unsupported above dimension {DENSE_LIMIT}")));
        }
        return power_iteration(&m.matrix);
    }
    let ev = eigenvalues(&m.matrix)?;
    match hint {
        Some(h) => nearest(&ev, h).map_err(|detail| Error::Branch { angle: h.arg(), detail }),
        None => rightmost(&ev),
    }
}

/// Eigenvalue closest to `target`, failing when the two closest candidates
/// are indistinguishable by distance yet distinct.
pub(crate) fn nearest(ev: &[C64], target: C64) -> std::result::Result<C64, String> {
    let mut sorted: Vec<(f64, C64)> = ev.iter().map(|&z| ((z - target).norm(), z)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (d1, z1) = sorted[0];
    if let Some(&(d2, z2)) = sorted.get(1) {
        let scale = 1.0 + target.norm();
        let distinct = (z1 - z2).norm() > 1e-9 * scale;
        if distinct && d2 < 2.0 * d1 + 1e-12 * scale {
            return Err(format!("eigenvalues {z1} and {z2} are both close to {target}"));
        }
    }
    Ok(z1)
}

fn rightmost(ev: &[C64]) -> Result<C64> {
    let mut best = ev[0];
    for &z in &ev[1..] {
        if z.re > best.re {
            best = z;
        }
    }
    let scale = 1.0 + best.norm();
    if ev.iter().any(|&z| (z.re - best.re).abs() < 1e-12 * scale && (z - best).norm() > 1e-9 * scale) {
        return Err(Error::Eigen(format!("dominant eigenvalue {best} is not isolated")));
    }
    Ok(best)
}

/// Shifted power iteration on `M + cI`, `c` the largest absolute column sum.
fn power_iteration(m: &CMatrix) -> Result<C64> {
    let n = m.nrows();
    let c = (0..n)
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let shifted = m + CMatrix::identity(n, n) * C64::from(c);
    let mut v = nalgebra::DVector::from_element(n, C64::from(1.0 / (n as f64).sqrt()));
    let mut lambda = C64::from(f64::INFINITY);
    for _ in 0..POWER_MAX_ITER {
        let w = &shifted * &v;
        let next = v.dotc(&w) / v.dotc(&v);
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(C64::from(-c));
        }
        v = w / C64::from(norm);
        if (next - lambda).norm() < POWER_TOL * (1.0 + next.norm()) {
            return Ok(next - c);
        }
        lambda = next;
    }
    Err(Error::Eigen(format!("power iteration did not converge in {POWER_MAX_ITER} steps")))
}
