//! Harmonic-oscillator matrix elements from ladder-operator algebra.
//!
//! With oscillator length `l = sqrt(hbar/(M omega))`,
//! `y = l/sqrt(2) (a + a^dag)` and `d/dy = (a - a^dag)/(sqrt(2) l)`.

use std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OscillatorOperator {
    Identity,
    /// `y^p`, `p` in `1..=3`.
    Position(u8),
    Derivative,
    /// `y d/dy`
    PositionDerivative,
}

#[derive(Clone, Copy)]
enum Ladder {
    Lower,
    Raise,
}

/// Amplitudes over number states, grown on demand.
fn apply(ladder: Ladder, ket: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; ket.len() + 1];
    for (n, &c) in ket.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        match ladder {
            Ladder::Lower if n > 0 => out[n - 1] += (n as f64).sqrt() * c,
            Ladder::Lower => {}
            Ladder::Raise => out[n + 1] += ((n + 1) as f64).sqrt() * c,
        }
    }
    out
}

/// `(a + sign * a^dag)` applied to `ket`.
fn quadrature(sign: f64, ket: &[f64]) -> Vec<f64> {
    let lo = apply(Ladder::Lower, ket);
    let hi = apply(Ladder::Raise, ket);
    lo.iter().zip(&hi).map(|(a, b)| a + sign * b).collect()
}

/// Dimensionless element in units where the oscillator length is 1.
pub(crate) fn unit_element(op: OscillatorOperator, bra: u32, ket: u32) -> f64 {
    let mut v = vec![0.0; ket as usize + 1];
    v[ket as usize] = 1.0;
    let (vec, scale) = match op {
        OscillatorOperator::Identity => (v, 1.0),
        OscillatorOperator::Position(p) => {
            let mut v = v;
            for _ in 0..p {
                v = quadrature(1.0, &v);
            }
            (v, SQRT_2.powi(-i32::from(p)))
        }
        OscillatorOperator::Derivative => (quadrature(-1.0, &v), 1.0 / SQRT_2),
        OscillatorOperator::PositionDerivative => (quadrature(1.0, &quadrature(-1.0, &v)), 0.5),
    };
    scale * vec.get(bra as usize).copied().unwrap_or(0.0)
}

fn length_power(op: OscillatorOperator) -> i32 {
    match op {
        OscillatorOperator::Identity | OscillatorOperator::PositionDerivative => 0,
        OscillatorOperator::Position(p) => i32::from(p),
        OscillatorOperator::Derivative => -1,
    }
}

/// `<bra| O |ket>` for an oscillator of given length scale.
pub fn oscillator_element_with_length(
    op: OscillatorOperator,
    bra: u32,
    ket: u32,
    length: f64,
) -> f64 {
    length.powi(length_power(op)) * unit_element(op, bra, ket)
}

/// `<bra| O |ket>` for an oscillator of mass `wall_mass` and angular
/// frequency `frequency`.
pub fn oscillator_matrix_element(
    op: OscillatorOperator,
    bra: u32,
    ket: u32,
    wall_mass: f64,
    frequency: f64,
    hbar: f64,
) -> f64 {
    let length = (hbar / (wall_mass * frequency)).sqrt();
    oscillator_element_with_length(op, bra, ket, length)
}
