//! Numerical toolkit for the current-counting asymmetric simple exclusion
//! process: exact deformed generators, transfer matrices built from a
//! q-deformed oscillator algebra, Q-operators and their functional relations,
//! the matrix-product steady state, and a functional Bethe Ansatz pipeline for
//! the cumulants of the current.
//!
//! Configurations are bitmasks with site 1 in the least significant bit.
//! All matrices are dense `nalgebra::DMatrix<Complex64>` acting on column
//! vectors, so entry `(c', c)` is the (deformed) rate of `c → c'`.

pub mod bethe;
mod error;
pub mod markov_oracle;
pub mod matansatz;
pub mod numerics;
pub mod qspecial;
pub mod transfer;

pub use error::{Error, Result};
pub use markov_oracle::{BoundaryRates, Geometry, SystemSpec};
pub use qspecial::ABParameters;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<C64>;

#[inline]
pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}
