//! Brute-force ground truth: the current-deformed generator of the open or
//! periodic ASEP, its dominant eigenvalue `E(μ)`, Cauchy-extracted cumulants,
//! the stationary state and the XXZ correspondence.
//!
//! Hops to the right carry `e^{+μ}` across a marked bond and hops to the left
//! `e^{−μ}`. In the open chain the marked bond is the one between the left
//! reservoir and site 1; in the periodic chain it is the bond `(L, 1)`.

mod cumulants;
mod eigen;
mod stationary;
mod xxz;

pub use cumulants::{cumulants_oracle, cumulants_oracle_with, CauchyOptions};
pub use eigen::{dominant_eigenvalue, eigenvalues, DENSE_LIMIT};
pub use stationary::{stationary_current, stationary_state};
pub use xxz::{rates_from_xxz, xxz_gauge_markov, xxz_hamiltonian, xxz_map, XXZParameters};

use crate::error::{domain, Error, Result};
use crate::{re, CMatrix, C64};

/// Default guard on the number of sites for dense matrices.
pub const DEFAULT_MAX_SITES: usize = 14;

/// Injection/extraction rates of the two reservoirs: `alpha` (left in),
/// `gamma` (left out), `beta` (right out), `delta` (right in).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryRates {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl BoundaryRates {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Self { alpha, beta, gamma, delta }
    }

    /// Totally asymmetric boundaries (`γ = δ = 0`).
    pub fn tasep(alpha: f64, beta: f64) -> Self {
        Self::new(alpha, beta, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.gamma, self.delta];
        if all.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return domain(format!("rates must be finite and non-negative, got {self:?}"));
        }
        if self.alpha <= 0.0 && self.gamma <= 0.0 {
            return domain("left reservoir inactive (alpha = gamma = 0)");
        }
        if self.beta <= 0.0 && self.delta <= 0.0 {
            return domain("right reservoir inactive (beta = delta = 0)");
        }
        Ok(())
    }
}

/// Boundary conditions of the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Geometry {
    Open(BoundaryRates),
    /// Ring restricted to the sector with `particles` particles.
    Periodic { particles: usize },
}

/// Everything needed to build a deformed generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemSpec {
    pub l: usize,
    pub q: f64,
    pub mu: C64,
    pub geometry: Geometry,
}

impl SystemSpec {
    pub fn open(l: usize, q: f64, mu: C64, rates: BoundaryRates) -> Self {
        Self { l, q, mu, geometry: Geometry::Open(rates) }
    }

    pub fn periodic(l: usize, q: f64, mu: C64, particles: usize) -> Self {
        Self { l, q, mu, geometry: Geometry::Periodic { particles } }
    }

    pub fn with_mu(&self, mu: C64) -> Self {
        Self { mu, ..*self }
    }

    pub fn rates(&self) -> Option<BoundaryRates> {
        match self.geometry {
            Geometry::Open(r) => Some(r),
            Geometry::Periodic { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return domain("L must be at least 1");
        }
        if !(0.0..1.0).contains(&self.q) {
            return domain(format!("q must lie in [0, 1), got {}", self.q));
        }
        if !self.mu.is_finite() {
            return domain("mu must be finite");
        }
        match self.geometry {
            Geometry::Open(r) => r.validate(),
            Geometry::Periodic { particles } if particles > self.l => {
                domain(format!("sector N = {particles} exceeds L = {}", self.l))
            }
            Geometry::Periodic { .. } => Ok(()),
        }
    }
}

/// Dense deformed generator together with the configurations labelling its
/// rows and columns.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformedMarkovMatrix {
    pub matrix: CMatrix,
    pub basis: Vec<usize>,
}

impl DeformedMarkovMatrix {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Multipliers applied to the rates crossing one bond: `forward` for a
/// particle moving to the right, `backward` for one moving to the left.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BondFactors {
    pub forward: C64,
    pub backward: C64,
}

impl BondFactors {
    pub const NEUTRAL: BondFactors = BondFactors { forward: C64::new(1.0, 0.0), backward: C64::new(1.0, 0.0) };

    pub fn from_mu(mu: C64) -> Self {
        Self { forward: mu.exp(), backward: (-mu).exp() }
    }
}

/// Configurations of the periodic sector, increasing as bitmasks.
pub fn sector_basis(l: usize, particles: usize) -> Vec<usize> {
    (0..1usize << l).filter(|c| c.count_ones() as usize == particles).collect()
}

/// Occupation of site `i` (1-based).
#[inline]
pub fn occupied(config: usize, site: usize) -> bool {
    (config >> (site - 1)) & 1 == 1
}

/// Generator of [`SystemSpec`], with the default size guard.
pub fn build_markov(spec: &SystemSpec) -> Result<DeformedMarkovMatrix> {
    build_markov_limited(spec, DEFAULT_MAX_SITES)
}

/// Generator of [`SystemSpec`] with a custom size guard.
pub fn build_markov_limited(spec: &SystemSpec, max_sites: usize) -> Result<DeformedMarkovMatrix> {
    spec.validate()?;
    let nb = bond_count(spec.l, &spec.geometry);
    let mut factors = vec![BondFactors::NEUTRAL; nb];
    let marked = match spec.geometry {
        Geometry::Open(_) => 0,
        Geometry::Periodic { .. } => nb.saturating_sub(1),
    };
    if nb > 0 {
        factors[marked] = BondFactors::from_mu(spec.mu);
    }
    build_with_factors(spec.l, spec.q, &spec.geometry, &factors, max_sites)
}

/// Generator with one fugacity per bond. Open chains take `L + 1` values
/// (`μ_0` left reservoir, `μ_i` bond `(i, i+1)`, `μ_L` right reservoir);
/// periodic chains take `L` values, the last one for bond `(L, 1)`.
pub fn build_markov_weighted(
    l: usize,
    q: f64,
    geometry: &Geometry,
    mus: &[C64],
) -> Result<DeformedMarkovMatrix> {
    let factors: Vec<_> = mus.iter().map(|&m| BondFactors::from_mu(m)).collect();
    build_with_factors(l, q, geometry, &factors, DEFAULT_MAX_SITES)
}

fn bond_count(l: usize, geometry: &Geometry) -> usize {
    match geometry {
        Geometry::Open(_) => l + 1,
        Geometry::Periodic { .. } if l >= 2 => l,
        Geometry::Periodic { .. } => 0,
    }
}

/// Generator with arbitrary multiplicative factors on every bond.
pub fn build_with_factors(
    l: usize,
    q: f64,
    geometry: &Geometry,
    factors: &[BondFactors],
    max_sites: usize,
) -> Result<DeformedMarkovMatrix> {
    SystemSpec { l, q, mu: re(0.0), geometry: *geometry }.validate()?;
    if l > max_sites {
        return Err(Error::TooLarge { l, max: max_sites });
    }
    if factors.len() != bond_count(l, geometry) {
        return domain(format!(
            "expected {} bond factors, got {}",
            bond_count(l, geometry),
            factors.len()
        ));
    }
    let basis: Vec<usize> = match geometry {
        Geometry::Open(_) => (0..1usize << l).collect(),
        Geometry::Periodic { particles } => sector_basis(l, *particles),
    };
    let mut index = vec![usize::MAX; 1 << l];
    for (k, &c) in basis.iter().enumerate() {
        index[c] = k;
    }
    let dim = basis.len();
    let mut m = CMatrix::zeros(dim, dim);
    let mut add = |from: usize, to: usize, rate: f64, factor: C64| {
        if rate == 0.0 {
            return;
        }
        let (i, j) = (index[to], index[from]);
        m[(i, j)] += factor * rate;
        m[(j, j)] -= rate;
    };
    for &c in &basis {
        // bulk and periodic bonds: site s → s+1
        let bulk_bonds: Vec<(usize, usize, usize)> = match geometry {
            Geometry::Open(_) => (1..l).map(|s| (s, s, s + 1)).collect(),
            Geometry::Periodic { .. } if l >= 2 => {
                (1..=l).map(|s| (s - 1, s, if s == l { 1 } else { s + 1 })).collect()
            }
            Geometry::Periodic { .. } => Vec::new(),
        };
        for (bond, s, t) in bulk_bonds {
            let f = factors[bond];
            let (ns, nt) = (occupied(c, s), occupied(c, t));
            let flipped = c ^ (1 << (s - 1)) ^ (1 << (t - 1));
            if ns && !nt {
                add(c, flipped, 1.0, f.forward);
            } else if !ns && nt {
                add(c, flipped, q, f.backward);
            }
        }
        if let Geometry::Open(r) = geometry {
            let left = factors[0];
            let right = factors[l];
            let first = c ^ 1;
            if occupied(c, 1) {
                add(c, first, r.gamma, left.backward);
            } else {
                add(c, first, r.alpha, left.forward);
            }
            let last = c ^ (1 << (l - 1));
            if occupied(c, l) {
                add(c, last, r.beta, right.forward);
            } else {
                add(c, last, r.delta, right.backward);
            }
        }
    }
    Ok(DeformedMarkovMatrix { matrix: m, basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_site_open_by_hand() {
        let mu = 0.37;
        let spec = SystemSpec::open(1, 0.0, re(mu), BoundaryRates::tasep(1.0, 1.0));
        let m = build_markov(&spec).unwrap().matrix;
        let expect = [[-1.0, 1.0], [mu.exp(), -1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[(i, j)] - expect[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn two_site_ring_by_hand() {
        // Configurations 01 (site 1 occupied) and 10 (site 2 occupied).
        // From site 1 a hop to the right crosses bond (1,2) at rate 1 and a
        // hop to the left crosses bond (2,1) at rate q; both land on 10.
        let q = 0.5;
        let spec = SystemSpec::periodic(2, q, re(0.0), 1);
        let m = build_markov(&spec).unwrap();
        assert_eq!(m.basis, vec![1, 2]);
        let total = 1.0 + q;
        assert!((m.matrix[(1, 0)] - total).norm() < 1e-15);
        assert!((m.matrix[(0, 1)] - total).norm() < 1e-15);
        assert!((m.matrix[(0, 0)] + total).norm() < 1e-15);
    }

    #[test]
    fn guards() {
        let spec = SystemSpec::open(15, 0.2, re(0.0), BoundaryRates::tasep(1.0, 1.0));
        assert!(matches!(build_markov(&spec), Err(Error::TooLarge { .. })));
        let spec = SystemSpec::periodic(3, 0.2, re(0.0), 4);
        assert!(build_markov(&spec).is_err());
        let spec = SystemSpec::open(2, 0.2, re(0.0), BoundaryRates::new(0.0, 1.0, 0.0, 0.0));
        assert!(build_markov(&spec).is_err());
    }

    #[test]
    fn sector_is_lexicographic() {
        assert_eq!(sector_basis(4, 2), vec![3, 5, 6, 9, 10, 12]);
    }

    fn rates() -> impl Strategy<Value = BoundaryRates> {
        (0.05f64..2.0, 0.05f64..2.0, 0.0f64..1.0, 0.0f64..1.0)
            .prop_map(|(a, b, g, d)| BoundaryRates::new(a, b, g, d))
    }

    proptest! {
        #[test]
        fn open_columns_sum_to_zero(l in 1usize..6, q in 0.0f64..0.99, r in rates()) {
            let m = build_markov(&SystemSpec::open(l, q, re(0.0), r)).unwrap().matrix;
            for j in 0..m.ncols() {
                let s: C64 = m.column(j).iter().sum();
                prop_assert!(s.norm() < 1e-13);
                for i in 0..m.nrows() {
                    if i != j { prop_assert!(m[(i, j)].re >= 0.0); }
                }
            }
        }

        #[test]
        fn periodic_columns_sum_to_zero(l in 2usize..8, q in 0.0f64..0.99, n in 0usize..8) {
            prop_assume!(n <= l);
            let m = build_markov(&SystemSpec::periodic(l, q, re(0.0), n)).unwrap().matrix;
            for j in 0..m.ncols() {
                let s: C64 = m.column(j).iter().sum();
                prop_assert!(s.norm() < 1e-13);
            }
        }
    }
}
