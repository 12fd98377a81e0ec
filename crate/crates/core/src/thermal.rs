//! Canonical averaging over box levels. Temperatures are in energy units
//! (`k_B = 1`), so the inverse temperature is `1/T` and entropies are in
//! units of `k_B`.
//!
//! Only gas levels along the wall axis are averaged; in 3D the transverse
//! directions do not couple to the wall.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::x_wall_closed_form;
use crate::params::SystemParams;

/// Largest weight allowed on the last retained level.
pub const TAIL_TOLERANCE: f64 = 1e-12;
pub const MAX_LEVELS: usize = 10_000;
pub const DEFAULT_START_LEVELS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalEnsemble {
    /// `1/(k_B T)`; `+inf` at zero temperature.
    pub inv_temperature: f64,
    /// Box quantum numbers `j` of the retained levels.
    pub labels: Vec<u32>,
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
    /// Lowest energy, subtracted before exponentiating.
    pub shift: f64,
    /// `ln sum exp(-theta (E - shift))`
    pub log_partition_shifted: f64,
}

impl ThermalEnsemble {
    /// `ln Z` including the shift.
    pub fn log_partition(&self) -> f64 {
        self.log_partition_shifted - self.inv_temperature * self.shift
    }

    pub fn tail_weight(&self) -> f64 {
        self.weights.last().copied().unwrap_or(0.0)
    }
}

fn check_inv_temperature(theta: f64) -> Result<()> {
    if theta.is_nan() || theta < 0.0 {
        return Err(Error::InvalidParameter {
            name: "inv_temperature",
            value: theta,
            reason: "must be >= 0 (use +inf for zero temperature)",
        });
    }
    Ok(())
}

/// Boltzmann weights `exp(-theta E_i) / Z` over explicit levels labelled
/// `1..=n`.
pub fn boltzmann_weights(levels: &[f64], inv_temperature: f64) -> Result<ThermalEnsemble> {
    let labels = (1..=levels.len() as u32).collect();
    weights_for(labels, levels.to_vec(), inv_temperature)
}

fn weights_for(labels: Vec<u32>, energies: Vec<f64>, theta: f64) -> Result<ThermalEnsemble> {
    check_inv_temperature(theta)?;
    if energies.is_empty() {
        return Err(Error::InvalidParameter {
            name: "levels",
            value: 0.0,
            reason: "need at least one level",
        });
    }
    let shift = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = if theta.is_infinite() {
        energies
            .iter()
            .map(|&e| if e == shift { 1.0 } else { 0.0 })
            .collect()
    } else {
        energies
            .iter()
            .map(|&e| (-theta * (e - shift)).exp())
            .collect()
    };
    let z: f64 = raw.iter().sum();
    Ok(ThermalEnsemble {
        inv_temperature: theta,
        labels,
        weights: raw.iter().map(|w| w / z).collect(),
        energies,
        shift,
        log_partition_shifted: z.ln(),
    })
}

/// Ensemble over box levels `1..=n`, growing `n` geometrically from
/// `start_levels` until the last weight drops below [`TAIL_TOLERANCE`].
pub fn box_ensemble(
    p: &SystemParams,
    inv_temperature: f64,
    start_levels: usize,
) -> Result<ThermalEnsemble> {
    let mut n = start_levels.clamp(2, MAX_LEVELS);
    loop {
        let labels: Vec<u32> = (1..=n as u32).collect();
        let energies = labels.iter().map(|&j| p.gas_level(j)).collect();
        let e = weights_for(labels, energies, inv_temperature)?;
        if e.tail_weight() < TAIL_TOLERANCE {
            return Ok(e);
        }
        if n == MAX_LEVELS {
            return Err(Error::Truncation {
                levels: n,
                tail_weight: e.tail_weight(),
                tolerance: TAIL_TOLERANCE,
            });
        }
        n = (2 * n).min(MAX_LEVELS);
    }
}

/// `-sum w ln w`, with `0 ln 0 = 0`.
pub fn thermal_entropy(e: &ThermalEnsemble) -> f64 {
    e.weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.ln())
        .sum::<f64>()
        .max(0.0)
}

/// `sum w_i E_i`.
pub fn mean_energy(e: &ThermalEnsemble) -> f64 {
    e.weights
        .iter()
        .zip(&e.energies)
        .map(|(w, en)| w * en)
        .sum()
}

/// `-d ln Z / d theta` by central differences on the same levels.
pub fn mean_energy_from_partition(e: &ThermalEnsemble, rel_step: f64) -> Result<f64> {
    let theta = e.inv_temperature;
    let h = rel_step * theta.max(1.0 / e.energies.iter().cloned().fold(0.0, f64::max).max(1e-300));
    let lo = weights_for(e.labels.clone(), e.energies.clone(), (theta - h).max(0.0))?;
    let hi = weights_for(e.labels.clone(), e.energies.clone(), theta + h)?;
    Ok(-(hi.log_partition() - lo.log_partition()) / (hi.inv_temperature - lo.inv_temperature))
}

/// `sum_j w_j <x_W>_j`, using the closed-form per-level displacement.
pub fn thermal_wall_displacement(e: &ThermalEnsemble, p: &SystemParams) -> f64 {
    e.weights
        .iter()
        .zip(&e.labels)
        .map(|(w, &j)| w * x_wall_closed_form(j, p))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalReport {
    pub temperature: f64,
    pub levels: usize,
    pub mean_energy: f64,
    pub entropy: f64,
    pub x_wall: f64,
}

pub fn inv_temperature(temperature: f64) -> Result<f64> {
    if temperature.is_nan() || temperature < 0.0 {
        return Err(Error::InvalidParameter {
            name: "temperature",
            value: temperature,
            reason: "must be >= 0",
        });
    }
    Ok(if temperature == 0.0 {
        f64::INFINITY
    } else {
        1.0 / temperature
    })
}

pub fn thermal_report(p: &SystemParams, temperature: f64) -> Result<ThermalReport> {
    let e = box_ensemble(p, inv_temperature(temperature)?, DEFAULT_START_LEVELS)?;
    Ok(ThermalReport {
        temperature,
        levels: e.weights.len(),
        mean_energy: mean_energy(&e),
        entropy: thermal_entropy(&e),
        x_wall: thermal_wall_displacement(&e, p),
    })
}

pub fn temperature_sweep(p: &SystemParams, temperatures: &[f64]) -> Result<Vec<ThermalReport>> {
    temperatures.iter().map(|&t| thermal_report(p, t)).collect()
}
