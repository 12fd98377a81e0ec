//! Physical parameters of the gas-plus-wall system and the two
//! dimensionless expansion parameters derived from them.
//!
//! Everything downstream works in natural units with `hbar = 1` by
//! default. [`SystemParams::from_si`] converts SI inputs once at the
//! boundary, choosing the gas mass and box length as units.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Reduced Planck constant in J s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;

/// Default upper bound on `max(lambda, beta)` for the perturbative regime.
pub const DEFAULT_MAX_EPS: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Geometry {
    #[serde(rename = "1d")]
    OneD,
    /// Box with edges `L1 = box_length`, `L2`, `L3`; only `L1` is bounded by
    /// the movable wall.
    #[serde(rename = "3d")]
    ThreeD { l2: f64, l3: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    gas_mass: f64,
    wall_mass: f64,
    box_length: f64,
    spring_constant: f64,
    hbar: f64,
    geometry: Geometry,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

impl SystemParams {
    pub fn new(
        gas_mass: f64,
        wall_mass: f64,
        box_length: f64,
        spring_constant: f64,
        hbar: f64,
    ) -> Result<Self> {
        Ok(Self {
            gas_mass: positive("gas_mass", gas_mass)?,
            wall_mass: positive("wall_mass", wall_mass)?,
            box_length: positive("box_length", box_length)?,
            spring_constant: positive("spring_constant", spring_constant)?,
            hbar: positive("hbar", hbar)?,
            geometry: Geometry::OneD,
        })
    }

    /// Natural-unit instantiation (`hbar = M_g = L = 1`) realising the given
    /// expansion parameters. The wall frequency then equals `beta^2/lambda^2`
    /// in units of `hbar / (M_g L^2)`.
    pub fn from_expansion(lambda: f64, beta: f64) -> Result<Self> {
        let lambda = positive("lambda", lambda)?;
        let beta = positive("beta", beta)?;
        let wall_mass = 1.0 / (beta * beta);
        let spring_constant = 1.0 / (wall_mass * lambda.powi(4));
        Self::new(1.0, wall_mass, 1.0, spring_constant, 1.0)
    }

    /// Convert SI inputs (kg, m, N/m) to natural units with `hbar = 1`,
    /// mass unit `M_g` and length unit `L`.
    pub fn from_si(
        gas_mass_kg: f64,
        wall_mass_kg: f64,
        box_length_m: f64,
        spring_constant_si: f64,
    ) -> Result<(Self, UnitScales)> {
        let m = positive("gas_mass", gas_mass_kg)?;
        let l = positive("box_length", box_length_m)?;
        let scales = UnitScales {
            mass: m,
            length: l,
            time: m * l * l / HBAR_SI,
            energy: HBAR_SI * HBAR_SI / (m * l * l),
        };
        let spring_unit = scales.energy / (l * l);
        let params = Self::new(
            1.0,
            wall_mass_kg / m,
            1.0,
            spring_constant_si / spring_unit,
            1.0,
        )?;
        Ok((params, scales))
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Result<Self> {
        if let Geometry::ThreeD { l2, l3 } = geometry {
            positive("l2", l2)?;
            positive("l3", l3)?;
        }
        self.geometry = geometry;
        Ok(self)
    }

    /// Same system with a different box length (used for `dE/dL`).
    pub fn with_box_length(mut self, box_length: f64) -> Result<Self> {
        self.box_length = positive("box_length", box_length)?;
        Ok(self)
    }

    pub fn gas_mass(&self) -> f64 {
        self.gas_mass
    }
    pub fn wall_mass(&self) -> f64 {
        self.wall_mass
    }
    pub fn box_length(&self) -> f64 {
        self.box_length
    }
    pub fn spring_constant(&self) -> f64 {
        self.spring_constant
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// `(L1, L2, L3)`; in 1D the transverse edges are reported as 1.
    pub fn dims(&self) -> [f64; 3] {
        match self.geometry {
            Geometry::OneD => [self.box_length, 1.0, 1.0],
            Geometry::ThreeD { l2, l3 } => [self.box_length, l2, l3],
        }
    }

    pub fn volume(&self) -> f64 {
        self.dims().iter().product()
    }

    pub fn oscillator_frequency(&self) -> f64 {
        (self.spring_constant / self.wall_mass).sqrt()
    }

    pub fn oscillator_length(&self) -> f64 {
        (self.hbar / (self.wall_mass * self.oscillator_frequency())).sqrt()
    }

    /// `hbar^2 / (M_g L^2)`, the natural energy scale of the box.
    pub fn gas_energy_unit(&self) -> f64 {
        self.hbar * self.hbar / (self.gas_mass * self.box_length * self.box_length)
    }

    /// Box level `pi^2 hbar^2 j^2 / (2 M_g L^2)`.
    pub fn gas_level(&self, j: u32) -> f64 {
        let j = f64::from(j);
        0.5 * PI * PI * j * j * self.gas_energy_unit()
    }

    /// Oscillator level `hbar omega (n + 1/2)`.
    pub fn wall_level(&self, n: u32) -> f64 {
        self.hbar * self.oscillator_frequency() * (f64::from(n) + 0.5)
    }

    pub fn expansion(&self) -> ExpansionParams {
        derive_expansion_params(self)
    }
}

/// Conversion factors from natural units back to SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitScales {
    pub mass: f64,
    pub length: f64,
    pub time: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionParams {
    pub lambda: f64,
    pub beta: f64,
    pub oscillator_frequency: f64,
    pub oscillator_length: f64,
}

impl ExpansionParams {
    /// `beta^2 / lambda^2`: the wall quantum in units of `hbar^2/(M_g L^2)`.
    pub fn wall_to_gas_ratio(&self) -> f64 {
        (self.beta / self.lambda).powi(2)
    }
}

pub fn derive_expansion_params(p: &SystemParams) -> ExpansionParams {
    let lambda = p.hbar.sqrt() / ((p.wall_mass * p.spring_constant).powf(0.25) * p.box_length);
    let beta = (p.gas_mass / p.wall_mass).sqrt();
    ExpansionParams {
        lambda,
        beta,
        oscillator_frequency: p.oscillator_frequency(),
        oscillator_length: p.oscillator_length(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub ok: bool,
    pub max_eps: f64,
    pub largest: f64,
    pub beta_over_lambda: f64,
    /// Set when lambda and beta differ by more than two decades.
    pub disparate_orders: bool,
}

impl RegimeReport {
    pub fn flagged(&self) -> bool {
        !self.ok || self.disparate_orders
    }
}

pub fn validate_regime(e: &ExpansionParams, max_eps: f64) -> RegimeReport {
    let largest = e.lambda.max(e.beta);
    let ratio = e.beta / e.lambda;
    RegimeReport {
        ok: largest <= max_eps,
        max_eps,
        largest,
        beta_over_lambda: ratio,
        disparate_orders: ratio.log10().abs() > 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_parameters() {
        let p = SystemParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let e = p.expansion();
        assert_eq!(e.lambda, 1.0);
        assert_eq!(e.beta, 1.0);
    }

    #[test]
    fn mass_ratio_gives_beta() {
        let p = SystemParams::new(1e-6, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(p.expansion().beta, 1e-3, max_relative = 1e-15);
    }

    #[test]
    fn heavy_wall_gives_lambda() {
        let p = SystemParams::new(1.0, 1e12, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(p.expansion().lambda, 1e-3, max_relative = 1e-14);
    }

    #[test]
    fn from_expansion_round_trips() {
        let p = SystemParams::from_expansion(1e-3, 2e-3).unwrap();
        let e = p.expansion();
        assert_relative_eq!(e.lambda, 1e-3, max_relative = 1e-13);
        assert_relative_eq!(e.beta, 2e-3, max_relative = 1e-13);
        assert_relative_eq!(
            e.oscillator_length,
            e.lambda * p.box_length(),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            p.hbar() * e.oscillator_frequency / p.gas_energy_unit(),
            e.wall_to_gas_ratio(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn from_si_is_dimensionless_consistent() {
        let (nat, scales) = SystemParams::from_si(9.1e-31, 1e-20, 1e-9, 1e-3).unwrap();
        let si_lambda = HBAR_SI.sqrt() / ((1e-20_f64 * 1e-3).powf(0.25) * 1e-9);
        assert_relative_eq!(nat.expansion().lambda, si_lambda, max_relative = 1e-12);
        assert_relative_eq!(
            nat.expansion().beta,
            (9.1e-31_f64 / 1e-20).sqrt(),
            max_relative = 1e-12
        );
        assert_eq!(scales.length, 1e-9);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(SystemParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, 1.0, f64::NAN).is_err());
        let p = SystemParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(p
            .with_geometry(Geometry::ThreeD { l2: 0.0, l3: 1.0 })
            .is_err());
    }

    #[test]
    fn regime_thresholds() {
        let e = |lambda, beta| ExpansionParams {
            lambda,
            beta,
            oscillator_frequency: 1.0,
            oscillator_length: lambda,
        };
        let r = validate_regime(&e(1e-3, 1e-3), DEFAULT_MAX_EPS);
        assert!(r.ok && !r.disparate_orders);

        let r = validate_regime(&e(0.5, 1e-3), DEFAULT_MAX_EPS);
        assert!(!r.ok && r.disparate_orders);

        let r = validate_regime(&e(1e-3, 1e-4), DEFAULT_MAX_EPS);
        assert!(r.ok && !r.disparate_orders);
        assert_relative_eq!(r.beta_over_lambda, 0.1);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lambda_closed_forms_agree(
                mg in 1e-3f64..1e3, mw in 1e-2f64..1e14, l in 1e-2f64..1e2,
                f in 1e-4f64..1e8, hbar in 0.1f64..10.0,
            ) {
                let p = SystemParams::new(mg, mw, l, f, hbar).unwrap();
                let e = p.expansion();
                let alt = hbar / ((mw * f).sqrt() * l * l);
                prop_assert!((e.lambda * e.lambda / alt - 1.0).abs() < 1e-12);
            }

            #[test]
            fn lambda_scales_inversely_with_length(
                mw in 1.0f64..1e12, f in 1e-2f64..1e6, s in 0.1f64..10.0,
            ) {
                let p = SystemParams::new(1.0, mw, 1.0, f, 1.0).unwrap();
                let q = p.with_box_length(s).unwrap();
                let r = q.expansion().lambda * s / p.expansion().lambda;
                prop_assert!((r - 1.0).abs() < 1e-14);
            }

            #[test]
            fn beta_invariant_under_common_mass_scale(
                mg in 1e-3f64..1e3, mw in 1e-2f64..1e6, c in 1e-3f64..1e3,
            ) {
                let a = SystemParams::new(mg, mw, 1.0, 1.0, 1.0).unwrap().expansion().beta;
                let b = SystemParams::new(c * mg, c * mw, 1.0, 1.0, 1.0).unwrap().expansion().beta;
                prop_assert!((a / b - 1.0).abs() < 1e-14);
            }
        }
    }
}
