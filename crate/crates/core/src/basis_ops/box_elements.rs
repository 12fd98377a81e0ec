//! Closed-form matrix elements between box eigenfunctions
//! `sqrt(2/L) sin(j pi y / L)` on `[0, L]`.
//!
//! Everything reduces to the cosine moments `int_0^1 u^n cos(m pi u) du`,
//! which obey a two-term recursion once `sin(m pi) = 0` is used.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Operators acting on the gas coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoxOperator {
    /// `y^n`, `n` in `0..=3`.
    PositionMoment(u8),
    Derivative,
    SecondDerivative,
    /// `y d/dy`
    PositionDerivative,
    /// `y^2 d^2/dy^2`
    PositionSquaredSecondDerivative,
}

impl BoxOperator {
    pub const MAX_MOMENT: u8 = 3;
}

/// `int_0^1 u^n cos(m pi u) du` for integer `m`.
pub(crate) fn cos_moment(n: u32, m: i64) -> f64 {
    if m == 0 {
        return 1.0 / f64::from(n + 1);
    }
    let a = m as f64 * PI;
    let s = if m % 2 == 0 { 1.0 } else { -1.0 };
    // c_n = -(n/a) s_{n-1},  s_n = -s/a + (n/a) c_{n-1}
    let mut c = 0.0;
    let mut sn = (1.0 - s) / a;
    for k in 1..=n {
        let kf = f64::from(k);
        let c_next = -(kf / a) * sn;
        sn = -s / a + (kf / a) * c;
        c = c_next;
    }
    c
}

/// `<k| u^n |j>` on the unit box.
pub(crate) fn unit_moment(n: u32, k: u32, j: u32) -> f64 {
    let (k, j) = (i64::from(k), i64::from(j));
    cos_moment(n, k - j) - cos_moment(n, k + j)
}

/// `<k| u d/du |j>`: `-1/2` on the diagonal, `(-1)^(j+k) 2jk/(j^2-k^2)` off it.
/// Independent of the box length.
pub(crate) fn unit_position_derivative(k: u32, j: u32) -> f64 {
    if k == j {
        return -0.5;
    }
    let (kf, jf) = (f64::from(k), f64::from(j));
    let sign = if (j + k).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * 2.0 * jf * kf / (jf * jf - kf * kf)
}

/// `<k| d/du |j>`: zero unless `j + k` is odd, then `4jk/(k^2-j^2)`.
pub(crate) fn unit_derivative(k: u32, j: u32) -> f64 {
    if (j + k).is_multiple_of(2) {
        return 0.0;
    }
    let (kf, jf) = (f64::from(k), f64::from(j));
    4.0 * jf * kf / (kf * kf - jf * jf)
}

fn wavenumber_sq(j: u32) -> f64 {
    let jf = f64::from(j);
    (jf * PI).powi(2)
}

/// `<bra| O |ket>` between box states of a box of length `length`.
pub fn box_matrix_element(op: BoxOperator, bra: u32, ket: u32, length: f64) -> Result<f64> {
    if bra == 0 || ket == 0 {
        return Err(Error::UnsupportedOperator(format!(
            "box index must be >= 1 (got {bra}, {ket})"
        )));
    }
    let v = match op {
        BoxOperator::PositionMoment(n) if n <= BoxOperator::MAX_MOMENT => {
            length.powi(i32::from(n)) * unit_moment(u32::from(n), bra, ket)
        }
        BoxOperator::PositionMoment(n) => {
            return Err(Error::UnsupportedOperator(format!("position moment y^{n}")))
        }
        BoxOperator::Derivative => unit_derivative(bra, ket) / length,
        BoxOperator::SecondDerivative => {
            if bra == ket {
                -wavenumber_sq(ket) / (length * length)
            } else {
                0.0
            }
        }
        BoxOperator::PositionDerivative => unit_position_derivative(bra, ket),
        BoxOperator::PositionSquaredSecondDerivative => {
            -wavenumber_sq(ket) * unit_moment(2, bra, ket)
        }
    };
    Ok(v)
}
