use super::{occupied, DeformedMarkovMatrix, Geometry, SystemSpec};
use crate::error::{domain, Error, Result};
use crate::{CMatrix, C64};

/// Normalised right null vector of a generator at `μ = 0`.
pub fn stationary_state(m: &DeformedMarkovMatrix) -> Result<Vec<f64>> {
    let a = &m.matrix;
    let n = a.nrows();
    let scale = crate::numerics::max_abs(a).max(1.0);
    for j in 0..n {
        let s: C64 = a.column(j).iter().sum();
        if s.norm() > 1e-12 * scale || a.column(j).iter().any(|z| z.im != 0.0) {
            return domain("stationary_state needs the undeformed (mu = 0) generator");
        }
    }
    // Replace the first balance equation by the normalisation.
    let mut sys = a.clone();
    for j in 0..n {
        sys[(0, j)] = C64::from(1.0);
    }
    let mut rhs = nalgebra::DVector::from_element(n, C64::from(0.0));
    rhs[0] = C64::from(1.0);
    let lu = sys.lu();
    let p = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("stationary kernel is degenerate".into()))?;
    let residual = crate::numerics::max_abs(&CMatrix::from_column_slice(n, 1, (a * &p).as_slice()));
    if !residual.is_finite() || residual > 1e-10 * scale {
        return Err(Error::Singular(format!("stationary kernel is degenerate (residual {residual:e})")));
    }
    Ok(p.iter().map(|z| z.re).collect())
}

/// Mean current through the deformed bond in the stationary state
/// `p` (indexed like the basis of `build_markov(spec)`): the derivative of
/// the generator at `μ = 0` averaged over `p`.
pub fn stationary_current(spec: &SystemSpec, p: &[f64]) -> Result<f64> {
    spec.validate()?;
    let l = spec.l;
    let q = spec.q;
    let basis: Vec<usize> = match spec.geometry {
        Geometry::Open(_) => (0..1usize << l).collect(),
        Geometry::Periodic { particles } => super::sector_basis(l, particles),
    };
    if basis.len() != p.len() {
        return domain(format!("probability vector has length {}, expected {}", p.len(), basis.len()));
    }
    let mut j = 0.0;
    for (&c, &w) in basis.iter().zip(p) {
        let flux = match spec.geometry {
            Geometry::Open(r) => {
                if occupied(c, 1) {
                    -r.gamma
                } else {
                    r.alpha
                }
            }
            Geometry::Periodic { .. } if l >= 2 => match (occupied(c, l), occupied(c, 1)) {
                (true, false) => 1.0,
                (false, true) => -q,
                _ => 0.0,
            },
            Geometry::Periodic { .. } => 0.0,
        };
        j += w * flux;
    }
    Ok(j)
}
