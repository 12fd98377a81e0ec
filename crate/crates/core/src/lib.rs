//! A particle in a one-dimensional box whose right wall is a harmonically
//! bound quantum object. After a coordinate transformation that fixes the
//! box edge, the coupling becomes a perturbation on the product basis of box
//! and oscillator states. This crate computes the first-order states, wall
//! observables, entanglement and thermal averages, and checks them against
//! exact diagonalization.

pub mod basis_ops;
pub mod entanglement;
pub mod error;
pub mod observables;
pub mod oracle;
pub mod params;
pub mod perturbation;
pub mod thermal;

pub use basis_ops::{BasisIndex, OperatorChannel, TruncatedBasis};
pub use entanglement::{entanglement_report, EntanglementReport, ReducedDensity};
pub use error::{Error, Result};
pub use observables::{observe, ObservableReport};
pub use oracle::{
    assemble_hamiltonian, convergence_sweep, diagonalize_and_select, ConvergenceRow, OracleResult,
    SweepSpec,
};
pub use params::{
    derive_expansion_params, validate_regime, ExpansionParams, Geometry, RegimeReport, SystemParams,
};
pub use perturbation::{build_perturbed_state, ChannelMode, PerturbedState};
pub use thermal::{thermal_report, ThermalReport};
