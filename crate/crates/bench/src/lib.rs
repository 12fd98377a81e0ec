//! Shared inputs for the benchmarks.

use manometer_core::{BasisIndex, SystemParams, TruncatedBasis};

/// `lambda = beta = eps` in natural units.
pub fn params(eps: f64) -> SystemParams {
    SystemParams::from_expansion(eps, eps).expect("positive parameters")
}

pub fn ground() -> BasisIndex {
    BasisIndex::new(1, 0).expect("valid index")
}

pub fn basis(n_gas: u32, n_wall: u32) -> TruncatedBasis {
    TruncatedBasis::new(n_gas, n_wall).expect("valid truncation")
}
