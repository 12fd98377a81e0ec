//! Numerical-integration cross-check of the closed-form matrix elements.
//!
//! Box factors are integrated with Gauss-Legendre on `[0, 1]`; wall factors
//! with Gauss-Legendre on `[-10, 10]` oscillator lengths using explicitly
//! evaluated Hermite functions. Each integral is done at two resolutions and
//! the pair must agree before a value is reported.

use std::collections::hash_map::{Entry, HashMap};
use std::f64::consts::{PI, SQRT_2};

use super::{
    box_elements::BoxOperator, oscillator::OscillatorOperator, BasisIndex, OperatorChannel,
    TruncatedBasis,
};
use crate::error::{Error, Result};
use crate::params::SystemParams;

pub const DEFAULT_BOX_POINTS: usize = 2048;
pub const DEFAULT_WALL_POINTS: usize = 2048;
const WALL_HALF_WIDTH: f64 = 10.0;
const CONVERGENCE_RTOL: f64 = 1e-8;
const CONVERGENCE_ATOL: f64 = 1e-12;

/// Gauss-Legendre nodes and weights on `[lo, hi]`.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 0 { 0.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

/// Normalized Hermite functions `psi_0..=psi_nmax` and their derivatives at `xi`.
fn hermite_functions(nmax: usize, xi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut psi = vec![0.0; nmax + 1];
    psi[0] = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    if nmax >= 1 {
        psi[1] = SQRT_2 * xi * psi[0];
    }
    for n in 1..nmax {
        let nf = n as f64;
        psi[n + 1] =
            (2.0 / (nf + 1.0)).sqrt() * xi * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
    }
    // H_n' = 2n H_{n-1}
    let dpsi = (0..=nmax)
        .map(|n| {
            let lower = if n > 0 {
                (2.0 * n as f64).sqrt() * psi[n - 1]
            } else {
                0.0
            };
            -xi * psi[n] + lower
        })
        .collect();
    (psi, dpsi)
}

#[derive(Debug, Clone)]
struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new(n: usize, lo: f64, hi: f64) -> Self {
        let (nodes, weights) = gauss_legendre(n, lo, hi);
        Self { nodes, weights }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureCheck {
    pub analytic: f64,
    pub numeric: f64,
    pub abs_diff: f64,
}

/// Holds precomputed rules at the configured and doubled resolutions.
#[derive(Debug, Clone)]
pub struct QuadratureOracle {
    box_rules: [Rule; 2],
    wall_rules: [Rule; 2],
}

impl Default for QuadratureOracle {
    fn default() -> Self {
        Self::new(DEFAULT_BOX_POINTS, DEFAULT_WALL_POINTS)
    }
}

fn converged(coarse: f64, fine: f64) -> Result<f64> {
    if (coarse - fine).abs() > CONVERGENCE_RTOL * fine.abs() + CONVERGENCE_ATOL {
        Err(Error::NonConvergence { coarse, fine })
    } else {
        Ok(fine)
    }
}

impl QuadratureOracle {
    pub fn new(box_points: usize, wall_points: usize) -> Self {
        Self {
            box_rules: [
                Rule::new(box_points, 0.0, 1.0),
                Rule::new(2 * box_points, 0.0, 1.0),
            ],
            wall_rules: [
                Rule::new(wall_points, -WALL_HALF_WIDTH, WALL_HALF_WIDTH),
                Rule::new(2 * wall_points, -WALL_HALF_WIDTH, WALL_HALF_WIDTH),
            ],
        }
    }

    fn box_unit_integral(rule: &Rule, op: BoxOperator, bra: u32, ket: u32) -> f64 {
        let (kb, kk) = (f64::from(bra) * PI, f64::from(ket) * PI);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&u, &w)| {
                let left = SQRT_2 * (kb * u).sin();
                let phi = SQRT_2 * (kk * u).sin();
                let dphi = SQRT_2 * kk * (kk * u).cos();
                let d2phi = -kk * kk * phi;
                let right = match op {
                    BoxOperator::PositionMoment(n) => u.powi(i32::from(n)) * phi,
                    BoxOperator::Derivative => dphi,
                    BoxOperator::SecondDerivative => d2phi,
                    BoxOperator::PositionDerivative => u * dphi,
                    BoxOperator::PositionSquaredSecondDerivative => u * u * d2phi,
                };
                w * left * right
            })
            .sum()
    }

    /// Numerical `<bra|O|ket>` for a box of length `length`.
    pub fn box_element(&self, op: BoxOperator, bra: u32, ket: u32, length: f64) -> Result<f64> {
        let scale = match op {
            BoxOperator::PositionMoment(n) => length.powi(i32::from(n)),
            BoxOperator::Derivative => 1.0 / length,
            BoxOperator::SecondDerivative => 1.0 / (length * length),
            BoxOperator::PositionDerivative | BoxOperator::PositionSquaredSecondDerivative => 1.0,
        };
        let coarse = Self::box_unit_integral(&self.box_rules[0], op, bra, ket);
        let fine = Self::box_unit_integral(&self.box_rules[1], op, bra, ket);
        Ok(scale * converged(coarse, fine)?)
    }

    fn wall_unit_integral(rule: &Rule, op: OscillatorOperator, bra: u32, ket: u32) -> f64 {
        let nmax = bra.max(ket) as usize;
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&xi, &w)| {
                let (psi, dpsi) = hermite_functions(nmax, xi);
                let right = match op {
                    OscillatorOperator::Identity => psi[ket as usize],
                    OscillatorOperator::Position(p) => xi.powi(i32::from(p)) * psi[ket as usize],
                    OscillatorOperator::Derivative => dpsi[ket as usize],
                    OscillatorOperator::PositionDerivative => xi * dpsi[ket as usize],
                };
                w * psi[bra as usize] * right
            })
            .sum()
    }

    /// Numerical `<bra|O|ket>` for an oscillator of length scale `length`.
    pub fn wall_element(
        &self,
        op: OscillatorOperator,
        bra: u32,
        ket: u32,
        length: f64,
    ) -> Result<f64> {
        let scale = match op {
            OscillatorOperator::Identity | OscillatorOperator::PositionDerivative => 1.0,
            OscillatorOperator::Position(p) => length.powi(i32::from(p)),
            OscillatorOperator::Derivative => 1.0 / length,
        };
        let coarse = Self::wall_unit_integral(&self.wall_rules[0], op, bra, ket);
        let fine = Self::wall_unit_integral(&self.wall_rules[1], op, bra, ket);
        Ok(scale * converged(coarse, fine)?)
    }

    /// Compare a channel element against its numerically integrated value.
    pub fn check(
        &self,
        ch: OperatorChannel,
        bra: BasisIndex,
        ket: BasisIndex,
        p: &SystemParams,
    ) -> Result<QuadratureCheck> {
        let analytic = super::channel_matrix_element(ch, bra, ket, p)?;
        let numeric = ch.prefactor(p)
            * self.box_element(ch.box_operator(), bra.gas, ket.gas, p.box_length())?
            * self.wall_element(
                ch.wall_operator(),
                bra.wall,
                ket.wall,
                p.oscillator_length(),
            )?;
        Ok(QuadratureCheck {
            analytic,
            numeric,
            abs_diff: (analytic - numeric).abs(),
        })
    }

    /// Check every channel over all bra/ket pairs of `block`. Each box and
    /// wall factor is integrated once.
    pub fn check_block(&self, p: &SystemParams, block: TruncatedBasis) -> Result<BlockCheck> {
        let mut boxes: HashMap<(BoxOperator, u32, u32), f64> = HashMap::new();
        let mut walls: HashMap<(OscillatorOperator, u32, u32), f64> = HashMap::new();
        let mut out = BlockCheck {
            elements: 0,
            max_abs_diff: 0.0,
            worst: None,
        };
        for ch in OperatorChannel::ALL {
            for bra in block.iter() {
                for ket in block.iter() {
                    let b = match boxes.entry((ch.box_operator(), bra.gas, ket.gas)) {
                        Entry::Occupied(e) => *e.get(),
                        Entry::Vacant(e) => *e.insert(self.box_element(
                            ch.box_operator(),
                            bra.gas,
                            ket.gas,
                            p.box_length(),
                        )?),
                    };
                    let w = match walls.entry((ch.wall_operator(), bra.wall, ket.wall)) {
                        Entry::Occupied(e) => *e.get(),
                        Entry::Vacant(e) => *e.insert(self.wall_element(
                            ch.wall_operator(),
                            bra.wall,
                            ket.wall,
                            p.oscillator_length(),
                        )?),
                    };
                    let analytic = super::channel_matrix_element(ch, bra, ket, p)?;
                    let diff = (analytic - ch.prefactor(p) * b * w).abs();
                    out.elements += 1;
                    if out.worst.is_none() || diff > out.max_abs_diff {
                        out.max_abs_diff = diff;
                        out.worst = Some((ch, bra, ket));
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCheck {
    pub elements: usize,
    pub max_abs_diff: f64,
    pub worst: Option<(OperatorChannel, BasisIndex, BasisIndex)>,
}
