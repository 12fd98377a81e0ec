//! First-order stationary perturbation theory on the transformed
//! Hamiltonian, for reference states `(j_g, 0)`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use crate::basis_ops::{
    channel_elements, BasisIndex, ChannelTables, OperatorChannel, TruncatedBasis,
};
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Relative tolerance (against the lowest box level) below which an energy
/// denominator counts as resonant.
pub const DEFAULT_RESONANCE_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    /// Only `Wc` and `Wf`, the channels of first order in `{lambda, beta}`.
    #[default]
    Leading,
    /// All seven channels.
    All,
}

impl ChannelMode {
    pub fn includes(self, ch: OperatorChannel) -> bool {
        match self {
            ChannelMode::Leading => ch.is_leading(),
            ChannelMode::All => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientBreakdown {
    /// Indexed by [`OperatorChannel::position`].
    pub channels: [f64; 7],
    pub total: f64,
}

impl CoefficientBreakdown {
    fn from_channels(channels: [f64; 7]) -> Self {
        Self {
            channels,
            total: channels.iter().sum(),
        }
    }

    pub fn channel(&self, ch: OperatorChannel) -> f64 {
        self.channels[ch.position()]
    }
}

pub fn unperturbed_energy(idx: BasisIndex, p: &SystemParams) -> f64 {
    p.gas_level(idx.gas) + p.wall_level(idx.wall)
}

fn checked_denominator(
    reference: BasisIndex,
    target: BasisIndex,
    p: &SystemParams,
    rtol: f64,
) -> Result<f64> {
    let d = unperturbed_energy(reference, p) - unperturbed_energy(target, p);
    if d.abs() < rtol * p.gas_level(1) {
        return Err(Error::Resonance {
            reference,
            target,
            denominator: d,
        });
    }
    Ok(d)
}

/// Channel-resolved coefficient `<target|W|ref> / (E_ref - E_target)`.
pub fn coefficient_generic(
    reference: BasisIndex,
    target: BasisIndex,
    p: &SystemParams,
    basis: TruncatedBasis,
) -> Result<CoefficientBreakdown> {
    coefficient_generic_with_tolerance(reference, target, p, basis, DEFAULT_RESONANCE_RTOL)
}

pub fn coefficient_generic_with_tolerance(
    reference: BasisIndex,
    target: BasisIndex,
    p: &SystemParams,
    basis: TruncatedBasis,
    rtol: f64,
) -> Result<CoefficientBreakdown> {
    basis.check(reference)?;
    basis.check(target)?;
    if reference == target {
        return Err(Error::SameState(reference));
    }
    let d = checked_denominator(reference, target, p, rtol)?;
    let elements = channel_elements(target, reference, p)?;
    Ok(CoefficientBreakdown::from_channels(elements.map(|w| w / d)))
}

/// `Wc` coefficient for reference `(j_g, 0)`:
/// `pi^2 j_g^2 / sqrt(2) * lambda^3 / beta^2`, only for `k_g = j_g`, `k_W = 1`.
pub fn coefficient_closed_form_c(j_g: u32, k_g: u32, k_w: u32, lambda: f64, beta: f64) -> f64 {
    if k_w != 1 || k_g != j_g {
        return 0.0;
    }
    let j = f64::from(j_g);
    PI * PI * j * j / SQRT_2 * lambda.powi(3) / (beta * beta)
}

/// `Wf` coefficient for reference `(j_g, 0)`. Nonzero only for `k_W = 1`.
pub fn coefficient_closed_form_f(
    j_g: u32,
    k_g: u32,
    k_w: u32,
    lambda: f64,
    beta: f64,
) -> Result<f64> {
    if k_w != 1 {
        return Ok(0.0);
    }
    if k_g == j_g {
        return Ok(-lambda / (2.0 * SQRT_2));
    }
    let (j, k) = (f64::from(j_g), f64::from(k_g));
    let diff = j * j - k * k;
    let bracket = PI * PI * diff - 2.0 * (beta / lambda).powi(2);
    // the denominator is bracket/2 in units of hbar^2/(M_g L^2)
    if bracket.abs() < DEFAULT_RESONANCE_RTOL * PI * PI {
        return Err(Error::Resonance {
            reference: BasisIndex { gas: j_g, wall: 0 },
            target: BasisIndex { gas: k_g, wall: 1 },
            denominator: 0.5 * bracket,
        });
    }
    let sign = if (j_g + k_g).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    Ok(-2.0 * SQRT_2 * j * k * sign / (bracket * diff) * beta * beta / lambda)
}

/// First-order state `|ref> + sum C |k>` over the truncated basis.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbedState {
    reference: BasisIndex,
    mode: ChannelMode,
    coefficients: BTreeMap<BasisIndex, CoefficientBreakdown>,
    normalization: f64,
    #[serde(skip)]
    params: SystemParams,
    basis: TruncatedBasis,
}

impl PerturbedState {
    pub fn reference(&self) -> BasisIndex {
        self.reference
    }
    pub fn mode(&self) -> ChannelMode {
        self.mode
    }
    pub fn params(&self) -> &SystemParams {
        &self.params
    }
    pub fn basis(&self) -> TruncatedBasis {
        self.basis
    }

    /// `N = sqrt(1 + sum C^2)`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Nonzero coefficients, keyed by target; the reference is never present.
    pub fn coefficients(&self) -> &BTreeMap<BasisIndex, CoefficientBreakdown> {
        &self.coefficients
    }

    pub fn coefficient(&self, target: BasisIndex) -> f64 {
        self.coefficients.get(&target).map_or(0.0, |c| c.total)
    }

    /// Unnormalized amplitude: 1 on the reference, `C` elsewhere.
    pub fn amplitude(&self, idx: BasisIndex) -> f64 {
        if idx == self.reference {
            1.0
        } else {
            self.coefficient(idx)
        }
    }

    pub fn sum_squares(&self) -> f64 {
        self.coefficients.values().map(|c| c.total * c.total).sum()
    }
}

pub fn build_perturbed_state(
    reference: BasisIndex,
    p: &SystemParams,
    basis: TruncatedBasis,
    mode: ChannelMode,
) -> Result<PerturbedState> {
    build_perturbed_state_with_tolerance(reference, p, basis, mode, DEFAULT_RESONANCE_RTOL)
}

/// Targets whose couplings vanish by selection rules are skipped before the
/// denominator is inspected, so exact degeneracies with uncoupled levels are
/// harmless.
pub fn build_perturbed_state_with_tolerance(
    reference: BasisIndex,
    p: &SystemParams,
    basis: TruncatedBasis,
    mode: ChannelMode,
    rtol: f64,
) -> Result<PerturbedState> {
    basis.check(reference)?;
    if reference.wall != 0 {
        return Err(Error::ExcitedWallReference(reference));
    }
    let tables = ChannelTables::new(p, basis);
    let mut coefficients = BTreeMap::new();
    for target in basis.iter().filter(|&t| t != reference) {
        let mut elements = [0.0; 7];
        for ch in OperatorChannel::ALL
            .into_iter()
            .filter(|&ch| mode.includes(ch))
        {
            elements[ch.position()] = tables.element(ch, target, reference);
        }
        if elements.iter().all(|&w| w == 0.0) {
            continue;
        }
        let d = checked_denominator(reference, target, p, rtol)?;
        coefficients.insert(
            target,
            CoefficientBreakdown::from_channels(elements.map(|w| w / d)),
        );
    }
    let sum_sq: f64 = coefficients.values().map(|c| c.total * c.total).sum();
    Ok(PerturbedState {
        reference,
        mode,
        coefficients,
        normalization: (1.0 + sum_sq).sqrt(),
        params: *p,
        basis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstOrderEnergy {
    pub mode: ChannelMode,
    pub value: f64,
    pub gas_energy: f64,
    /// `value / E^g_{j_g}`
    pub ratio: f64,
}

/// Diagonal element `<ref|W|ref>` restricted to the mode's channels.
pub fn first_order_energy(
    reference: BasisIndex,
    p: &SystemParams,
    mode: ChannelMode,
) -> Result<FirstOrderEnergy> {
    if reference.wall != 0 {
        return Err(Error::ExcitedWallReference(reference));
    }
    let elements = channel_elements(reference, reference, p)?;
    let value: f64 = OperatorChannel::ALL
        .iter()
        .filter(|ch| mode.includes(**ch))
        .map(|ch| elements[ch.position()])
        .sum();
    let gas_energy = p.gas_level(reference.gas);
    Ok(FirstOrderEnergy {
        mode,
        value,
        gas_energy,
        ratio: value / gas_energy,
    })
}

/// Largest `|C|` per channel over all targets of an all-channels state.
pub fn max_abs_by_channel(state: &PerturbedState) -> [f64; 7] {
    let mut out = [0.0f64; 7];
    for c in state.coefficients.values() {
        for (o, v) in out.iter_mut().zip(c.channels) {
            *o = o.max(v.abs());
        }
    }
    out
}
