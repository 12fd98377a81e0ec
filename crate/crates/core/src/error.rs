use thiserror::Error;

use crate::basis_ops::BasisIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid basis index {0}: box quantum numbers start at 1")]
    InvalidIndex(BasisIndex),

    #[error("{0} outside the truncated basis {1}x{2}")]
    OutsideTruncation(BasisIndex, u32, u32),

    #[error("reference state {0} cannot also be the target")]
    SameState(BasisIndex),

    #[error("perturbed states are built on wall ground states; got {0}")]
    ExcitedWallReference(BasisIndex),

    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    /// Energy denominator of a first-order coefficient vanishes: a box
    /// transition is degenerate with an integer number of wall quanta.
    #[error("resonant denominator {denominator:e} coupling {reference} -> {target}")]
    Resonance {
        reference: BasisIndex,
        target: BasisIndex,
        denominator: f64,
    },

    #[error(
        "thermal truncation: tail weight {tail_weight:e} at {levels} levels exceeds {tolerance:e}"
    )]
    Truncation {
        levels: usize,
        tail_weight: f64,
        tolerance: f64,
    },

    #[error("quadrature did not converge: {coarse:e} vs {fine:e}")]
    NonConvergence { coarse: f64, fine: f64 },

    #[error("basis dimension {dimension} exceeds cap {cap}")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("ambiguous eigenvector selection: max overlap^2 = {overlap_sq}")]
    AmbiguousSelection { overlap_sq: f64 },

    #[error("reduced density has eigenvalue {0:e} below -1e-9")]
    NotPositive(f64),
}
