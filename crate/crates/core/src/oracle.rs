//! Exact diagonalization of the transformed Hamiltonian on a truncated
//! product basis, as an independent check of the perturbative results.
//!
//! The seven perturbation channels are not symmetric in the flat
//! `dy_g dy_W` measure. The assembled matrix is symmetrized as
//! `(H + H^T)/2`, which to the retained order is the same as moving to the
//! flat-measure wavefunction `sqrt(1 + y_W/L) psi`. The asymmetry is kept
//! as a diagnostic.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::basis_ops::{
    oscillator_element_with_length, BasisIndex, ChannelTables, OperatorChannel, OscillatorOperator,
    TruncatedBasis,
};
use crate::error::{Error, Result};
use crate::observables::x_wall_closed_form;
use crate::params::SystemParams;
use crate::perturbation::{build_perturbed_state, unperturbed_energy, ChannelMode, PerturbedState};

pub const DEFAULT_DIMENSION_CAP: usize = 2000;

#[derive(Debug, Clone)]
pub struct AssembledHamiltonian {
    pub basis: TruncatedBasis,
    /// Symmetrized matrix.
    pub matrix: DMatrix<f64>,
    /// `||H - H^T||_F / 2`, the norm of the discarded antisymmetric part.
    pub symmetrization_residual: f64,
    /// Frobenius norm of the (unsymmetrized) perturbation.
    pub coupling_norm: f64,
}

pub fn assemble_hamiltonian(
    p: &SystemParams,
    basis: TruncatedBasis,
) -> Result<AssembledHamiltonian> {
    assemble_with(p, basis, &OperatorChannel::ALL, DEFAULT_DIMENSION_CAP)
}

pub fn assemble_with(
    p: &SystemParams,
    basis: TruncatedBasis,
    channels: &[OperatorChannel],
    cap: usize,
) -> Result<AssembledHamiltonian> {
    let dim = basis.dim();
    if dim > cap {
        return Err(Error::DimensionCap {
            dimension: dim,
            cap,
        });
    }
    let tables = ChannelTables::new(p, basis);
    let coupling = DMatrix::from_fn(dim, dim, |r, c| {
        let (bra, ket) = (basis.index(r), basis.index(c));
        channels
            .iter()
            .map(|&ch| tables.element(ch, bra, ket))
            .sum::<f64>()
    });
    let antisym = (&coupling - coupling.transpose()).norm() / 2.0;
    let mut matrix = (&coupling + coupling.transpose()) * 0.5;
    for i in 0..dim {
        matrix[(i, i)] += unperturbed_energy(basis.index(i), p);
    }
    Ok(AssembledHamiltonian {
        basis,
        matrix,
        symmetrization_residual: antisym,
        coupling_norm: coupling.norm(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub reference: BasisIndex,
    pub basis: TruncatedBasis,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub selected: usize,
    pub selected_energy: f64,
    pub unperturbed_energy: f64,
    /// Unit-norm coefficients over the basis, phase fixed so the reference
    /// amplitude is positive.
    pub eigenvector: Vec<f64>,
    pub overlap: f64,
    pub symmetrization_residual: f64,
    pub trace: f64,
}

impl OracleResult {
    pub fn amplitude(&self, idx: BasisIndex) -> f64 {
        if self.basis.contains(idx) {
            self.eigenvector[self.basis.flat(idx)]
        } else {
            0.0
        }
    }

    /// Amplitude relative to the reference, comparable to a first-order
    /// coefficient.
    pub fn relative_amplitude(&self, idx: BasisIndex) -> f64 {
        self.amplitude(idx) / self.overlap
    }

    pub fn relative_shift(&self) -> f64 {
        (self.selected_energy - self.unperturbed_energy) / self.unperturbed_energy
    }
}

/// Full eigendecomposition; the eigenvector with the largest overlap on
/// `reference` is selected.
pub fn diagonalize_and_select(
    h: &AssembledHamiltonian,
    p: &SystemParams,
    reference: BasisIndex,
) -> Result<OracleResult> {
    h.basis.check(reference)?;
    let eig = SymmetricEigen::new(h.matrix.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let r = h.basis.flat(reference);
    let (pos, &col) = order
        .iter()
        .enumerate()
        .max_by(|(_, &a), (_, &b)| {
            eig.eigenvectors[(r, a)]
                .abs()
                .total_cmp(&eig.eigenvectors[(r, b)].abs())
        })
        .expect("nonempty basis");
    let raw = eig.eigenvectors.column(col);
    let sign = raw[r].signum();
    let eigenvector: Vec<f64> = raw.iter().map(|v| sign * v).collect();
    let overlap = eigenvector[r];
    if overlap * overlap <= 0.5 {
        return Err(Error::AmbiguousSelection {
            overlap_sq: overlap * overlap,
        });
    }
    Ok(OracleResult {
        reference,
        basis: h.basis,
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        selected: pos,
        selected_energy: eig.eigenvalues[col],
        unperturbed_energy: unperturbed_energy(reference, p),
        eigenvector,
        overlap,
        symmetrization_residual: h.symmetrization_residual,
        trace: h.matrix.trace(),
    })
}

/// Wall moments with the measure weight: `<y + y^2/L>/<1 + y/L>`, split
/// into the zero-point remnant `<0|y^2|0>/L` and the coupling part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleDisplacement {
    pub total: f64,
    pub zero_point_remnant: f64,
    pub coupling: f64,
    pub variance: f64,
}

fn wall_expectation(r: &OracleResult, op: impl Fn(u32, u32) -> f64) -> f64 {
    let nw = r.basis.n_wall as usize;
    let mut acc = 0.0;
    for gas in r.eigenvector.chunks(nw) {
        for (m, &a) in gas.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (n, &b) in gas.iter().enumerate() {
                acc += a * b * op(m as u32, n as u32);
            }
        }
    }
    acc
}

pub fn oracle_x_wall(r: &OracleResult, p: &SystemParams) -> OracleDisplacement {
    let ell = p.oscillator_length();
    let l = p.box_length();
    let y =
        |k: u8, m, n| oscillator_element_with_length(OscillatorOperator::Position(k), m, n, ell);
    let weight = wall_expectation(r, |m, n| if m == n { 1.0 } else { 0.0 } + y(1, m, n) / l);
    let first = wall_expectation(r, |m, n| y(1, m, n) + y(2, m, n) / l) / weight;
    let second = wall_expectation(r, |m, n| y(2, m, n) + y(3, m, n) / l) / weight;
    let remnant = y(2, 0, 0) / l;
    OracleDisplacement {
        total: first,
        zero_point_remnant: remnant,
        coupling: first - remnant,
        variance: second - first * first,
    }
}

/// First-order coefficient mapped to the flat-measure wavefunction the
/// symmetrized oracle returns: `C_{k,m} + delta_{k,j} <m|y_W|0> / (2L)`.
pub fn flat_measure_coefficient(s: &PerturbedState, idx: BasisIndex) -> f64 {
    let p = s.params();
    let shift = if idx.gas == s.reference().gas {
        oscillator_element_with_length(
            OscillatorOperator::Position(1),
            idx.wall,
            0,
            p.oscillator_length(),
        ) / (2.0 * p.box_length())
    } else {
        0.0
    };
    s.coefficient(idx) + shift
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub lambda: f64,
    pub beta: f64,
    pub n_gas: u32,
    pub n_wall: u32,
    pub observable: String,
    pub pt_value: f64,
    pub oracle_value: f64,
    pub rel_error: f64,
    /// Set when the row could not be evaluated.
    pub flag: Option<String>,
}

impl ConvergenceRow {
    pub fn failed(&self) -> bool {
        self.flag.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub reference: BasisIndex,
    /// `lambda` values; `beta = beta_over_lambda * lambda`.
    pub eps: Vec<f64>,
    pub beta_over_lambda: f64,
    pub bases: Vec<TruncatedBasis>,
}

pub const OBS_X_WALL: &str = "x_wall";
pub const OBS_DIAG_COEFF: &str = "coefficient_same_level";
pub const OBS_OFF_COEFF: &str = "coefficient_next_level";
pub const OBS_ENERGY: &str = "energy_shift";

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sweep_point(spec: &SweepSpec, eps: f64, basis: TruncatedBasis) -> Vec<ConvergenceRow> {
    let lambda = eps;
    let beta = spec.beta_over_lambda * eps;
    let row = |observable: &str,
               pt_value: f64,
               oracle_value: f64,
               rel_error: f64,
               flag: Option<String>| {
        ConvergenceRow {
            eps,
            lambda,
            beta,
            n_gas: basis.n_gas,
            n_wall: basis.n_wall,
            observable: observable.to_string(),
            pt_value,
            oracle_value,
            rel_error,
            flag,
        }
    };
    let observables = [OBS_X_WALL, OBS_DIAG_COEFF, OBS_OFF_COEFF, OBS_ENERGY];
    let evaluated = (|| -> Result<Vec<ConvergenceRow>> {
        let p = SystemParams::from_expansion(lambda, beta)?;
        let state = build_perturbed_state(spec.reference, &p, basis, ChannelMode::Leading)?;
        let h = assemble_hamiltonian(&p, basis)?;
        let r = diagonalize_and_select(&h, &p, spec.reference)?;
        let j = spec.reference.gas;
        let x_pt = x_wall_closed_form(j, &p);
        let x_or = oracle_x_wall(&r, &p).coupling;
        let same = BasisIndex { gas: j, wall: 1 };
        let next = BasisIndex {
            gas: j + 1,
            wall: 1,
        };
        let c_same = flat_measure_coefficient(&state, same);
        let c_next = flat_measure_coefficient(&state, next);
        let (o_same, o_next) = (r.relative_amplitude(same), r.relative_amplitude(next));
        Ok(vec![
            row(OBS_X_WALL, x_pt, x_or, rel(x_or, x_pt), None),
            row(OBS_DIAG_COEFF, c_same, o_same, rel(o_same, c_same), None),
            row(OBS_OFF_COEFF, c_next, o_next, rel(o_next, c_next), None),
            row(
                OBS_ENERGY,
                r.unperturbed_energy,
                r.selected_energy,
                r.relative_shift().abs(),
                None,
            ),
        ])
    })();
    evaluated.unwrap_or_else(|e| {
        observables
            .iter()
            .map(|o| row(o, f64::NAN, f64::NAN, f64::NAN, Some(e.to_string())))
            .collect()
    })
}

/// One row per observable for every `(eps, basis)` pair. Points run in
/// parallel on the current rayon pool; failures are flagged, not raised.
pub fn convergence_sweep(spec: &SweepSpec) -> Vec<ConvergenceRow> {
    let points: Vec<(f64, TruncatedBasis)> = spec
        .eps
        .iter()
        .flat_map(|&e| spec.bases.iter().map(move |&b| (e, b)))
        .collect();
    points
        .par_iter()
        .map(|&(e, b)| sweep_point(spec, e, b))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Slope of `rel_error` against `eps` for one observable and basis, over
/// the rows that were evaluated.
pub fn sweep_slope(
    rows: &[ConvergenceRow],
    observable: &str,
    basis: TruncatedBasis,
) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| {
            r.observable == observable
                && r.n_gas == basis.n_gas
                && r.n_wall == basis.n_wall
                && !r.failed()
        })
        .map(|r| (r.eps, r.rel_error))
        .collect();
    (pts.len() >= 2).then(|| loglog_slope(&pts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ground() -> BasisIndex {
        BasisIndex::new(1, 0).unwrap()
    }

    #[test]
    fn uncoupled_matrix_is_diagonal() {
        let p = SystemParams::from_expansion(1e-2, 1e-2).unwrap();
        let basis = TruncatedBasis::new(6, 4).unwrap();
        let h = assemble_with(&p, basis, &[], DEFAULT_DIMENSION_CAP).unwrap();
        for r in 0..basis.dim() {
            for c in 0..basis.dim() {
                if r != c {
                    assert_eq!(h.matrix[(r, c)], 0.0);
                }
            }
        }
        let e0 = h.matrix[(basis.flat(ground()), basis.flat(ground()))];
        assert_relative_eq!(
            e0,
            std::f64::consts::PI.powi(2) / 2.0 + 0.5,
            max_relative = 1e-14
        );
        let res = diagonalize_and_select(&h, &p, ground()).unwrap();
        assert_eq!(res.overlap, 1.0);
        assert!(res
            .eigenvector
            .iter()
            .enumerate()
            .all(|(i, &v)| i == 0 || v == 0.0));
        let x = oracle_x_wall(&res, &p);
        assert_relative_eq!(x.total, 0.5e-4, max_relative = 1e-12);
        assert_eq!(x.coupling, 0.0);
    }

    #[test]
    fn dimension_cap_enforced() {
        let p = SystemParams::from_expansion(1e-2, 1e-2).unwrap();
        let r = assemble_with(
            &p,
            TruncatedBasis::new(100, 30).unwrap(),
            &OperatorChannel::ALL,
            DEFAULT_DIMENSION_CAP,
        );
        assert!(matches!(r, Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn trace_equals_eigenvalue_sum() {
        let p = SystemParams::from_expansion(1e-2, 1e-2).unwrap();
        let h = assemble_hamiltonian(&p, TruncatedBasis::new(20, 6).unwrap()).unwrap();
        let r = diagonalize_and_select(&h, &p, ground()).unwrap();
        let sum: f64 = r.eigenvalues.iter().sum();
        assert!((sum - r.trace).abs() < 1e-9 * r.trace.abs());
        assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn oracle_displacement_matches_closed_form() {
        let p = SystemParams::from_expansion(1e-2, 1e-2).unwrap();
        let h = assemble_hamiltonian(&p, TruncatedBasis::default()).unwrap();
        let x1 = {
            let r = diagonalize_and_select(&h, &p, ground()).unwrap();
            oracle_x_wall(&r, &p).coupling
        };
        let closed = x_wall_closed_form(1, &p);
        assert!((x1 / closed - 1.0).abs() < 0.05, "{x1} vs {closed}");
        let r2 = diagonalize_and_select(&h, &p, BasisIndex::new(2, 0).unwrap()).unwrap();
        let x2 = oracle_x_wall(&r2, &p).coupling;
        assert!((x2 / x1 / 4.0 - 1.0).abs() < 0.05, "{}", x2 / x1);
    }

    #[test]
    fn oracle_amplitudes_match_first_order_coefficients() {
        let basis = TruncatedBasis::default();
        // The same-level amplitude grows like j^2, so j = 3 needs a smaller eps.
        for (j, eps) in [(1, 1e-2), (2, 1e-2), (3, 1e-3)] {
            let p = SystemParams::from_expansion(eps, eps).unwrap();
            let h = assemble_hamiltonian(&p, basis).unwrap();
            let reference = BasisIndex::new(j, 0).unwrap();
            let r = diagonalize_and_select(&h, &p, reference).unwrap();
            let s = build_perturbed_state(reference, &p, basis, ChannelMode::Leading).unwrap();
            for k in 1..=6 {
                let idx = BasisIndex::new(k, 1).unwrap();
                let pt = flat_measure_coefficient(&s, idx);
                let or = r.relative_amplitude(idx);
                assert!(rel(or, pt) < 0.1, "j={j} k={k}: {or} vs {pt}");
            }
        }
    }

    #[test]
    fn symmetrization_residual_is_small_and_flat_at_fixed_ratio() {
        let rel: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&e| {
                let p = SystemParams::from_expansion(e, e).unwrap();
                let h = assemble_hamiltonian(&p, TruncatedBasis::default()).unwrap();
                (e, h.symmetrization_residual / h.coupling_norm)
            })
            .collect();
        assert!(rel.iter().all(|&(_, r)| r < 1e-4));
        assert!(loglog_slope(&rel).abs() < 0.05);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1e-3, 1e-2, 1e-1]
            .iter()
            .map(|&x| (x, 3.0 * x * x))
            .collect();
        assert_relative_eq!(loglog_slope(&pts), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn resonant_row_is_flagged_not_fatal() {
        let spec = SweepSpec {
            reference: BasisIndex::new(2, 0).unwrap(),
            eps: vec![1e-2, 1e-3],
            beta_over_lambda: (1.5f64).sqrt() * std::f64::consts::PI,
            bases: vec![TruncatedBasis::new(10, 4).unwrap()],
        };
        let rows = convergence_sweep(&spec);
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.failed()));
        assert!(rows[0].flag.as_deref().unwrap().contains("resonant"));
    }
}
