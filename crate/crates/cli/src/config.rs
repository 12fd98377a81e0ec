use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use manometer_core::{BasisIndex, ChannelMode, Geometry, SystemParams, TruncatedBasis};
use serde::{Deserialize, Serialize};

/// Either the two expansion parameters, or the physical constants (natural
/// units for anything left out).
#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub lambda: Option<f64>,
    pub beta: Option<f64>,
    pub gas_mass: Option<f64>,
    pub wall_mass: Option<f64>,
    pub box_length: Option<f64>,
    pub spring_constant: Option<f64>,
    pub hbar: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub n_gas: u32,
    pub n_wall: u32,
}

impl Default for BasisConfig {
    fn default() -> Self {
        let b = TruncatedBasis::default();
        Self {
            n_gas: b.n_gas,
            n_wall: b.n_wall,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub max_gas: u32,
    pub max_wall: u32,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            max_gas: 3,
            max_wall: 3,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalConfig {
    /// Explicit temperatures in units of the gas energy; overrides the grid.
    pub temperatures: Option<Vec<f64>>,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self {
            temperatures: None,
            t_min: 0.1,
            t_max: 1000.0,
            points: 20,
        }
    }
}

impl ThermalConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if let Some(t) = &self.temperatures {
            return Ok(t.clone());
        }
        if !(self.t_min > 0.0 && self.t_max > self.t_min) || self.points < 2 {
            bail!("thermal: need 0 < t_min < t_max and points >= 2");
        }
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let n = self.points - 1;
        Ok((0..self.points)
            .map(|i| (a + (b - a) * i as f64 / n as f64).exp())
            .collect())
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
    pub beta_over_lambda: f64,
    /// Also run every point on the doubled basis.
    pub double_basis: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps: vec![10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5)],
            beta_over_lambda: 1.0,
            double_basis: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<PathBuf>,
    pub meta: Option<bool>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub geometry: Geometry,
    pub basis: BasisConfig,
    pub mode: ChannelMode,
    /// Box quantum number of the reference state.
    pub reference: u32,
    /// Transverse quantum numbers in 3D.
    pub transverse: [u32; 2],
    pub max_eps: f64,
    pub spectrum: SpectrumConfig,
    pub thermal: ThermalConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig {
                lambda: Some(1e-3),
                beta: Some(1e-3),
                ..Default::default()
            },
            geometry: Geometry::OneD,
            basis: BasisConfig::default(),
            mode: ChannelMode::Leading,
            reference: 1,
            transverse: [1, 1],
            max_eps: manometer_core::params::DEFAULT_MAX_EPS,
            spectrum: SpectrumConfig::default(),
            thermal: ThermalConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn params(&self) -> Result<SystemParams> {
        let s = &self.system;
        let physical = [
            s.gas_mass,
            s.wall_mass,
            s.box_length,
            s.spring_constant,
            s.hbar,
        ];
        let p = match (s.lambda, s.beta) {
            (Some(lambda), Some(beta)) => {
                if physical.iter().any(Option::is_some) {
                    bail!("system: give either lambda/beta or physical constants, not both");
                }
                SystemParams::from_expansion(lambda, beta).context("system")?
            }
            (None, None) => {
                let (Some(wall_mass), Some(spring)) = (s.wall_mass, s.spring_constant) else {
                    bail!("system: physical form needs wall_mass and spring_constant");
                };
                SystemParams::new(
                    s.gas_mass.unwrap_or(1.0),
                    wall_mass,
                    s.box_length.unwrap_or(1.0),
                    spring,
                    s.hbar.unwrap_or(1.0),
                )
                .context("system")?
            }
            _ => bail!("system: lambda and beta must be given together"),
        };
        p.with_geometry(self.geometry).context("geometry")
    }

    pub fn basis(&self) -> Result<TruncatedBasis> {
        TruncatedBasis::new(self.basis.n_gas, self.basis.n_wall).context("basis")
    }

    pub fn reference_index(&self) -> Result<BasisIndex> {
        BasisIndex::new(self.reference, 0).context("reference")
    }
}
