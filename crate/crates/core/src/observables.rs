//! Wall displacement, wall variance and the force/pressure identities.
//!
//! State-based values are evaluated in transformed coordinates, where the
//! functional determinant of the coordinate change contributes the extra
//! `y_W^2/L` and `y_W^3/L` terms.

use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::PI;

use crate::basis_ops::{
    oscillator_element_with_length, BasisIndex, OperatorChannel, OscillatorOperator,
};
use crate::entanglement::{reduce_to_wall, ReducedDensity};
use crate::error::Result;
use crate::params::{Geometry, SystemParams};
use crate::perturbation::PerturbedState;

/// Central-difference step as a fraction of the box length.
pub const FD_STEP: f64 = 1e-6;

/// `pi^2 hbar^2 j^2 / (M_g L^3 f_W)`.
pub fn x_wall_closed_form(j_g: u32, p: &SystemParams) -> f64 {
    let j = f64::from(j_g);
    let l = p.box_length();
    PI * PI * p.hbar() * p.hbar() * j * j / (p.gas_mass() * l.powi(3) * p.spring_constant())
}

/// Same quantity written as `pi^2 j^2 L lambda^4 / beta^2`.
pub fn x_wall_closed_form_dimensionless(j_g: u32, lambda: f64, beta: f64, length: f64) -> f64 {
    let j = f64::from(j_g);
    PI * PI * j * j * length * lambda.powi(4) / (beta * beta)
}

/// Wall displacement from a first-order state, split into its parts:
/// `total = zero_point_remnant + measure_shift + coupling`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallDisplacement {
    pub total: f64,
    /// `<0|y_W^2|0>/L`, present even without coupling.
    pub zero_point_remnant: f64,
    /// Cross terms carried by the mixed-derivative channels `Wf`, `Wh` on the
    /// gas-diagonal; at leading order this cancels the remnant exactly.
    pub measure_shift: f64,
    /// Cross terms driven by the gas level (all other channels).
    pub coupling: f64,
}

fn weighted_position(m: u32, n: u32, ell: f64, l: f64) -> f64 {
    oscillator_element_with_length(OscillatorOperator::Position(1), m, n, ell)
        + oscillator_element_with_length(OscillatorOperator::Position(2), m, n, ell) / l
}

/// `<0|(y^2/L + y)[|0> + 2 sum_k C_{j,k} |k>]` on the wall factor, keeping
/// terms linear in the coefficients.
pub fn x_wall_from_state(s: &PerturbedState) -> WallDisplacement {
    let p = s.params();
    let ell = p.oscillator_length();
    let l = p.box_length();
    let j = s.reference().gas;
    let remnant = weighted_position(0, 0, ell, l);
    let mut measure_shift = 0.0;
    let mut coupling = 0.0;
    for (target, c) in s.coefficients().range(
        BasisIndex { gas: j, wall: 1 }..=BasisIndex {
            gas: j,
            wall: u32::MAX,
        },
    ) {
        let w = 2.0 * weighted_position(0, target.wall, ell, l);
        for ch in OperatorChannel::ALL {
            let term = w * c.channel(ch);
            match ch {
                OperatorChannel::Wf | OperatorChannel::Wh => measure_shift += term,
                _ => coupling += term,
            }
        }
    }
    WallDisplacement {
        total: remnant + measure_shift + coupling,
        zero_point_remnant: remnant,
        measure_shift,
        coupling,
    }
}

/// Four-term small-coupling expansion of `(Delta x_W)^2`.
pub fn variance_closed_form(j_g: u32, lambda: f64, beta: f64, length: f64) -> f64 {
    let j2 = f64::from(j_g).powi(2);
    let l2 = length * length;
    1.5 * PI * PI * j2 * lambda.powi(6) / (beta * beta) * l2 + 0.5 * l2 * lambda * lambda
        - 0.75 * lambda.powi(4) * l2
        - PI.powi(4) * j2 * j2 * lambda.powi(8) / beta.powi(4) * l2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallMoments {
    /// `Tr rho^W (y + y^2/L)`
    pub mean: f64,
    /// `Tr rho^W (y^2 + y^3/L)`
    pub second: f64,
    pub variance: f64,
}

fn wall_operator(dim: usize, ell: f64, l: f64, lower: u8) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |m, n| {
        let (m, n) = (m as u32, n as u32);
        oscillator_element_with_length(OscillatorOperator::Position(lower), m, n, ell)
            + oscillator_element_with_length(OscillatorOperator::Position(lower + 1), m, n, ell) / l
    })
}

/// Moments of the wall position from the full reduced density of the
/// normalized state.
pub fn wall_moments(rd: &ReducedDensity, p: &SystemParams) -> WallMoments {
    let ell = p.oscillator_length();
    let l = p.box_length();
    let mean = rd.expectation(&wall_operator(rd.dim(), ell, l, 1));
    let second = rd.expectation(&wall_operator(rd.dim(), ell, l, 2));
    WallMoments {
        mean,
        second,
        variance: second - mean * mean,
    }
}

pub fn variance_from_state(s: &PerturbedState) -> WallMoments {
    wall_moments(&reduce_to_wall(s), s.params())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceIdentity {
    /// `pi^2 hbar^2 j^2 / (M_g L^3)`
    pub spectral_analytic: f64,
    /// `-dE/dL` by central differences
    pub spectral_fd: f64,
    /// `f_W <x_W>`
    pub spring: f64,
    pub rel_gap: f64,
    pub fd_rel_gap: f64,
}

pub fn force_identity_check(j_g: u32, p: &SystemParams) -> Result<ForceIdentity> {
    let j = f64::from(j_g);
    let l = p.box_length();
    let analytic = PI * PI * p.hbar() * p.hbar() * j * j / (p.gas_mass() * l.powi(3));
    let h = FD_STEP * l;
    let e_plus = p.with_box_length(l + h)?.gas_level(j_g);
    let e_minus = p.with_box_length(l - h)?.gas_level(j_g);
    let fd = -(e_plus - e_minus) / (2.0 * h);
    let spring = p.spring_constant() * x_wall_closed_form(j_g, p);
    Ok(ForceIdentity {
        spectral_analytic: analytic,
        spectral_fd: fd,
        spring,
        rel_gap: (spring - analytic).abs() / analytic,
        fd_rel_gap: (fd - analytic).abs() / analytic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PressureIdentity {
    /// `-dE/dV = (pi^2 hbar^2 / M_g) j1^2 L2^2 L3^2 / V^3`
    pub classical: f64,
    /// `f_W <x_W> / (L2 L3)` with `L = V/(L2 L3)`
    pub from_wall: f64,
    pub rel_gap: f64,
}

pub fn pressure_3d(j: [u32; 3], dims: [f64; 3], p: &SystemParams) -> Result<PressureIdentity> {
    let [l1, l2, l3] = dims;
    let edge = p
        .with_box_length(l1)?
        .with_geometry(Geometry::ThreeD { l2, l3 })?;
    let v = edge.volume();
    let j1 = f64::from(j[0]);
    let classical =
        PI * PI * p.hbar() * p.hbar() / p.gas_mass() * j1 * j1 * (l2 * l3).powi(2) / v.powi(3);
    let along_wall = p.with_box_length(v / (l2 * l3))?;
    let from_wall = p.spring_constant() * x_wall_closed_form(j[0], &along_wall) / (l2 * l3);
    Ok(PressureIdentity {
        classical,
        from_wall,
        rel_gap: (from_wall - classical).abs() / classical,
    })
}

/// 3D box energy `pi^2 hbar^2/(2 M_g) sum_i j_i^2 / L_i^2`, per axis.
pub fn box_energy_3d(j: [u32; 3], dims: [f64; 3], p: &SystemParams) -> [f64; 3] {
    let c = PI * PI * p.hbar() * p.hbar() / (2.0 * p.gas_mass());
    [0, 1, 2].map(|i| c * f64::from(j[i]).powi(2) / dims[i].powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservableReport {
    pub gas_level: u32,
    pub x_wall_closed: f64,
    pub x_wall_state: WallDisplacement,
    pub x_wall_rel_gap: f64,
    pub variance_closed: f64,
    pub variance_state: WallMoments,
    pub variance_rel_gap: f64,
    /// `sqrt(variance) / <x_W>` from the closed forms.
    pub spread_ratio: f64,
    pub force: ForceIdentity,
    pub pressure: Option<PressureIdentity>,
}

/// Evaluate every observable for the state's reference level. In 3D the
/// transverse quantum numbers are `transverse`.
pub fn observe(s: &PerturbedState, transverse: [u32; 2]) -> Result<ObservableReport> {
    let p = s.params();
    let e = p.expansion();
    let j = s.reference().gas;
    let x_closed = x_wall_closed_form(j, p);
    let x_state = x_wall_from_state(s);
    let var_closed = variance_closed_form(j, e.lambda, e.beta, p.box_length());
    let var_state = variance_from_state(s);
    let pressure = match p.geometry() {
        Geometry::OneD => None,
        Geometry::ThreeD { .. } => {
            Some(pressure_3d([j, transverse[0], transverse[1]], p.dims(), p)?)
        }
    };
    Ok(ObservableReport {
        gas_level: j,
        x_wall_closed: x_closed,
        x_wall_state: x_state,
        x_wall_rel_gap: (x_state.coupling - x_closed).abs() / x_closed,
        variance_closed: var_closed,
        variance_state: var_state,
        variance_rel_gap: (var_state.variance - var_closed).abs() / var_closed,
        spread_ratio: var_closed.sqrt() / x_closed,
        force: force_identity_check(j, p)?,
        pressure,
    })
}
