//! Transfer matrices built from the q-deformed oscillator algebra.
//!
//! The auxiliary space is the Fock space `|n⟩, n ≥ 0`, truncated to `N`
//! levels. The periodic transfer matrix is a trace over it; the open one is
//! closed by boundary vectors. Everything downstream (Q-operators, fused
//! matrices `t^[k]`, the R matrix, the `μ → 0` limits) is evaluated
//! numerically and checked against the generator of [`crate::markov_oracle`].

pub mod aux;
pub mod boundary;
pub mod chain;
pub mod kplus;
pub mod lax;
pub mod limits;
pub mod open;
pub mod periodic;
pub mod rmatrix;
pub mod verify;

pub use aux::{build_aux, AuxOperator, AuxTag, Band, XMatrix, XVariant};
pub use boundary::{boundary_vector, BoundaryVector, RowKind, Side};
pub use kplus::{kplus_coeffs, KMode};
pub use lax::LaxBlock;
pub use limits::{mu_zero_limit_checks, LimitPoint, LimitReport};
pub use open::{open_transfer, pq_build, OpenChain, PQFactorization};
pub use periodic::{periodic_transfer, PeriodicChain, Scaling};
pub use rmatrix::{r_factors, RFactors};
pub use verify::{
    markov_from_t2, verify_commutation, verify_decomposition, verify_exchange, verify_tq_and_fusion,
    ReconstructionPoint,
};

use crate::qspecial::ABParameters;
use crate::{CMatrix, C64};

/// Default tail tolerance of the automatic truncation.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default upper bound on the automatic truncation.
pub const DEFAULT_CAP: usize = 96;
/// Smallest truncation ever used by the automatic policy.
pub const MIN_TRUNCATION: usize = 8;

/// How many auxiliary levels to keep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    /// `N = ⌈ln tol / ln r⌉ + 8`, capped, with `r` the slowest decay ratio.
    Auto { tol: f64, cap: usize },
    Fixed(usize),
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Auto { tol: DEFAULT_TOL, cap: DEFAULT_CAP }
    }
}

impl Truncation {
    /// Number of levels for a series decaying like `ratio^n`.
    pub fn resolve(&self, ratio: f64) -> usize {
        match *self {
            Truncation::Fixed(n) => n,
            Truncation::Auto { tol, cap } => {
                let extra = if ratio <= 0.0 {
                    0
                } else if ratio >= 1.0 {
                    cap
                } else {
                    (tol.ln() / ratio.ln()).ceil() as usize
                };
                (extra + MIN_TRUNCATION).min(cap.max(MIN_TRUNCATION))
            }
        }
    }
}

/// Slowest geometric decay among `q`, the boundary parameters and `e^{−Re μ}`.
pub fn decay_ratio(q: f64, ab: Option<&ABParameters>, mu: C64) -> f64 {
    let b = ab.map_or(0.0, |ab| ab.max_abs());
    q.max(b).max((-mu.re).exp())
}

/// A transfer matrix together with the parameters it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    pub matrix: CMatrix,
    pub basis: Vec<usize>,
    pub x: Option<C64>,
    pub y: Option<C64>,
    pub mu: C64,
    pub k: Option<usize>,
    pub truncation: usize,
}
