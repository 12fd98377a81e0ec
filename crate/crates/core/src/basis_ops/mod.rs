//! Matrix elements of the transformed-Hamiltonian perturbation in the
//! unperturbed product basis `|j_g> (x) |j_W>`.
//!
//! The perturbation splits into seven channels, each a product of a box
//! operator, a wall operator and a constant prefactor:
//!
//! | channel | prefactor              | box       | wall      |
//! |---------|------------------------|-----------|-----------|
//! | `Wa`    | `-hbar^2/(2 M_W L^2)`  | `y^2 d^2` | `1`       |
//! | `Wb`    | `-hbar^2/(M_W L^2)`    | `y d`     | `1`       |
//! | `Wc`    | `hbar^2/(M_g L)`       | `d^2`     | `y`       |
//! | `Wd`    | `hbar^2/(M_W L^3)`     | `y^2 d^2` | `y`       |
//! | `We`    | `2 hbar^2/(M_W L^3)`   | `y d`     | `y`       |
//! | `Wf`    | `hbar^2/(M_W L)`       | `y d`     | `d`       |
//! | `Wh`    | `-hbar^2/(M_W L^2)`    | `y d`     | `y d`     |
//!
//! Functions stand to the left of derivatives in every term.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::params::SystemParams;

mod box_elements;
mod oscillator;
pub mod quadrature;

pub use box_elements::{box_matrix_element, BoxOperator};
pub use oscillator::{
    oscillator_element_with_length, oscillator_matrix_element, OscillatorOperator,
};
pub use quadrature::{QuadratureCheck, QuadratureOracle};

/// Product-basis label: box quantum number `gas >= 1`, oscillator
/// quantum number `wall >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisIndex {
    pub gas: u32,
    pub wall: u32,
}

impl BasisIndex {
    pub fn new(gas: u32, wall: u32) -> Result<Self> {
        let idx = Self { gas, wall };
        if gas == 0 {
            return Err(Error::InvalidIndex(idx));
        }
        Ok(idx)
    }

    /// Gas level `j` with the wall in its ground state.
    pub fn ground_wall(gas: u32) -> Result<Self> {
        Self::new(gas, 0)
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.gas, self.wall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedBasis {
    pub n_gas: u32,
    pub n_wall: u32,
}

impl Default for TruncatedBasis {
    fn default() -> Self {
        Self {
            n_gas: 40,
            n_wall: 8,
        }
    }
}

impl TruncatedBasis {
    pub fn new(n_gas: u32, n_wall: u32) -> Result<Self> {
        for (name, v) in [("n_gas", n_gas), ("n_wall", n_wall)] {
            if v < 2 {
                return Err(Error::InvalidParameter {
                    name,
                    value: f64::from(v),
                    reason: "truncation needs at least two states",
                });
            }
        }
        Ok(Self { n_gas, n_wall })
    }

    pub fn dim(&self) -> usize {
        self.n_gas as usize * self.n_wall as usize
    }

    pub fn contains(&self, idx: BasisIndex) -> bool {
        idx.gas >= 1 && idx.gas <= self.n_gas && idx.wall < self.n_wall
    }

    pub fn check(&self, idx: BasisIndex) -> Result<()> {
        if idx.gas == 0 {
            return Err(Error::InvalidIndex(idx));
        }
        if !self.contains(idx) {
            return Err(Error::OutsideTruncation(idx, self.n_gas, self.n_wall));
        }
        Ok(())
    }

    /// Row-major position: gas index outer, wall index inner.
    pub fn flat(&self, idx: BasisIndex) -> usize {
        (idx.gas as usize - 1) * self.n_wall as usize + idx.wall as usize
    }

    pub fn index(&self, flat: usize) -> BasisIndex {
        let n_wall = self.n_wall as usize;
        BasisIndex {
            gas: (flat / n_wall) as u32 + 1,
            wall: (flat % n_wall) as u32,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = BasisIndex> + '_ {
        (0..self.dim()).map(|i| self.index(i))
    }

    pub fn doubled(&self) -> Self {
        Self {
            n_gas: 2 * self.n_gas,
            n_wall: 2 * self.n_wall,
        }
    }
}

/// The seven perturbation terms of the transformed Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorChannel {
    Wa,
    Wb,
    Wc,
    Wd,
    We,
    Wf,
    Wh,
}

impl OperatorChannel {
    pub const ALL: [OperatorChannel; 7] = [
        OperatorChannel::Wa,
        OperatorChannel::Wb,
        OperatorChannel::Wc,
        OperatorChannel::Wd,
        OperatorChannel::We,
        OperatorChannel::Wf,
        OperatorChannel::Wh,
    ];

    /// Channels that survive at first order in `{lambda, beta}`.
    pub const LEADING: [OperatorChannel; 2] = [OperatorChannel::Wc, OperatorChannel::Wf];

    pub fn position(self) -> usize {
        self as usize
    }

    pub fn short_name(self) -> &'static str {
        match self {
            OperatorChannel::Wa => "a",
            OperatorChannel::Wb => "b",
            OperatorChannel::Wc => "c",
            OperatorChannel::Wd => "d",
            OperatorChannel::We => "e",
            OperatorChannel::Wf => "f",
            OperatorChannel::Wh => "h",
        }
    }

    pub fn is_leading(self) -> bool {
        matches!(self, OperatorChannel::Wc | OperatorChannel::Wf)
    }

    pub fn box_operator(self) -> BoxOperator {
        match self {
            OperatorChannel::Wa | OperatorChannel::Wd => {
                BoxOperator::PositionSquaredSecondDerivative
            }
            OperatorChannel::Wc => BoxOperator::SecondDerivative,
            OperatorChannel::Wb
            | OperatorChannel::We
            | OperatorChannel::Wf
            | OperatorChannel::Wh => BoxOperator::PositionDerivative,
        }
    }

    pub fn wall_operator(self) -> OscillatorOperator {
        match self {
            OperatorChannel::Wa | OperatorChannel::Wb => OscillatorOperator::Identity,
            OperatorChannel::Wc | OperatorChannel::Wd | OperatorChannel::We => {
                OscillatorOperator::Position(1)
            }
            OperatorChannel::Wf => OscillatorOperator::Derivative,
            OperatorChannel::Wh => OscillatorOperator::PositionDerivative,
        }
    }

    /// Allowed values of `|delta j_W|` for nonzero elements.
    pub fn wall_steps(self) -> &'static [u32] {
        match self.wall_operator() {
            OscillatorOperator::Identity => &[0],
            OscillatorOperator::PositionDerivative => &[0, 2],
            _ => &[1],
        }
    }

    pub fn prefactor(self, p: &SystemParams) -> f64 {
        let h2 = p.hbar() * p.hbar();
        let (mw, mg, l) = (p.wall_mass(), p.gas_mass(), p.box_length());
        match self {
            OperatorChannel::Wa => -h2 / (2.0 * mw * l * l),
            OperatorChannel::Wb => -h2 / (mw * l * l),
            OperatorChannel::Wc => h2 / (mg * l),
            OperatorChannel::Wd => h2 / (mw * l * l * l),
            OperatorChannel::We => 2.0 * h2 / (mw * l * l * l),
            OperatorChannel::Wf => h2 / (mw * l),
            OperatorChannel::Wh => -h2 / (mw * l * l),
        }
    }
}

impl fmt::Display for OperatorChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W{}", self.short_name())
    }
}

/// `<bra| W_ch |ket>` in the unperturbed basis.
pub fn channel_matrix_element(
    ch: OperatorChannel,
    bra: BasisIndex,
    ket: BasisIndex,
    p: &SystemParams,
) -> Result<f64> {
    for idx in [bra, ket] {
        if idx.gas == 0 {
            return Err(Error::InvalidIndex(idx));
        }
    }
    let wall = oscillator_element_with_length(
        ch.wall_operator(),
        bra.wall,
        ket.wall,
        p.oscillator_length(),
    );
    if wall == 0.0 {
        return Ok(0.0);
    }
    let gas = box_matrix_element(ch.box_operator(), bra.gas, ket.gas, p.box_length())?;
    Ok(ch.prefactor(p) * gas * wall)
}

/// All seven channel elements for one bra/ket pair, indexed by
/// [`OperatorChannel::position`].
pub fn channel_elements(bra: BasisIndex, ket: BasisIndex, p: &SystemParams) -> Result<[f64; 7]> {
    let mut out = [0.0; 7];
    for ch in OperatorChannel::ALL {
        out[ch.position()] = channel_matrix_element(ch, bra, ket, p)?;
    }
    Ok(out)
}

/// Per-factor tables over a truncated basis, used when whole matrices are
/// needed.
#[derive(Debug, Clone)]
pub struct ChannelTables {
    basis: TruncatedBasis,
    prefactors: [f64; 7],
    box_y2d2: Vec<f64>,
    box_yd: Vec<f64>,
    box_d2: Vec<f64>,
    wall: [Vec<f64>; 4],
}

fn wall_slot(op: OscillatorOperator) -> usize {
    match op {
        OscillatorOperator::Identity => 0,
        OscillatorOperator::Position(_) => 1,
        OscillatorOperator::Derivative => 2,
        OscillatorOperator::PositionDerivative => 3,
    }
}

impl ChannelTables {
    pub fn new(p: &SystemParams, basis: TruncatedBasis) -> Self {
        let ng = basis.n_gas as usize;
        let nw = basis.n_wall as usize;
        let l = p.box_length();
        let box_table = |op| {
            let mut t = vec![0.0; ng * ng];
            for k in 0..ng {
                for j in 0..ng {
                    t[k * ng + j] = box_matrix_element(op, k as u32 + 1, j as u32 + 1, l)
                        .expect("box indices start at 1");
                }
            }
            t
        };
        let ell = p.oscillator_length();
        let wall_table = |op| {
            let mut t = vec![0.0; nw * nw];
            for m in 0..nw {
                for n in 0..nw {
                    t[m * nw + n] = oscillator_element_with_length(op, m as u32, n as u32, ell);
                }
            }
            t
        };
        Self {
            basis,
            prefactors: OperatorChannel::ALL.map(|ch| ch.prefactor(p)),
            box_y2d2: box_table(BoxOperator::PositionSquaredSecondDerivative),
            box_yd: box_table(BoxOperator::PositionDerivative),
            box_d2: box_table(BoxOperator::SecondDerivative),
            wall: [
                wall_table(OscillatorOperator::Identity),
                wall_table(OscillatorOperator::Position(1)),
                wall_table(OscillatorOperator::Derivative),
                wall_table(OscillatorOperator::PositionDerivative),
            ],
        }
    }

    pub fn basis(&self) -> TruncatedBasis {
        self.basis
    }

    /// Same value as [`channel_matrix_element`] for indices inside the basis.
    pub fn element(&self, ch: OperatorChannel, bra: BasisIndex, ket: BasisIndex) -> f64 {
        let ng = self.basis.n_gas as usize;
        let nw = self.basis.n_wall as usize;
        let w =
            self.wall[wall_slot(ch.wall_operator())][bra.wall as usize * nw + ket.wall as usize];
        if w == 0.0 {
            return 0.0;
        }
        let gi = (bra.gas as usize - 1) * ng + ket.gas as usize - 1;
        let g = match ch.box_operator() {
            BoxOperator::PositionSquaredSecondDerivative => self.box_y2d2[gi],
            BoxOperator::SecondDerivative => self.box_d2[gi],
            _ => self.box_yd[gi],
        };
        self.prefactors[ch.position()] * g * w
    }
}
