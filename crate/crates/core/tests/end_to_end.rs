use std::f64::consts::PI;

use approx::assert_relative_eq;
use manometer_core::oracle::{flat_measure_coefficient, oracle_x_wall};
use manometer_core::*;

fn ground(j: u32) -> BasisIndex {
    BasisIndex::new(j, 0).unwrap()
}

#[test]
fn typical_regime_report() {
    let p = SystemParams::from_expansion(1e-3, 1e-3).unwrap();
    assert!(!validate_regime(&derive_expansion_params(&p), params::DEFAULT_MAX_EPS).flagged());
    let s = build_perturbed_state(
        ground(1),
        &p,
        TruncatedBasis::default(),
        ChannelMode::Leading,
    )
    .unwrap();
    let obs = observe(&s, [1, 1]).unwrap();
    assert_relative_eq!(obs.x_wall_closed, PI * PI * 1e-6, max_relative = 1e-12);
    assert!(obs.x_wall_rel_gap < 1e-10);
    assert_relative_eq!(obs.variance_closed, 4.99917e-7, max_relative = 1e-5);
    let ent = entanglement_report(&s).unwrap();
    assert!((5e-9..1.2e-8).contains(&ent.purity_deficit));
    assert!(ent.entropy > 0.0 && ent.entropy < 1e-6);
}

#[test]
fn oracle_and_perturbation_agree_at_small_coupling() {
    let p = SystemParams::from_expansion(1e-3, 1e-3).unwrap();
    let basis = TruncatedBasis::new(24, 6).unwrap();
    let h = assemble_hamiltonian(&p, basis).unwrap();
    for j in 1..=3 {
        let r = diagonalize_and_select(&h, &p, ground(j)).unwrap();
        let s = build_perturbed_state(ground(j), &p, basis, ChannelMode::Leading).unwrap();
        let x = oracle_x_wall(&r, &p);
        assert_relative_eq!(
            x.coupling,
            observables::x_wall_closed_form(j, &p),
            max_relative = 1e-3
        );
        for k in 1..=6 {
            let idx = BasisIndex::new(k, 1).unwrap();
            assert_relative_eq!(
                r.relative_amplitude(idx),
                flat_measure_coefficient(&s, idx),
                max_relative = 2e-2
            );
        }
    }
}

#[test]
fn resonant_reference_is_reported() {
    let lambda = 1e-3;
    let p = SystemParams::from_expansion(lambda, lambda * PI * 1.5f64.sqrt()).unwrap();
    let err = build_perturbed_state(
        ground(2),
        &p,
        TruncatedBasis::default(),
        ChannelMode::Leading,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Resonance { .. }), "{err}");
    assert!(build_perturbed_state(
        ground(1),
        &p,
        TruncatedBasis::default(),
        ChannelMode::Leading
    )
    .is_ok());
}

#[test]
fn thermal_sweep_tends_to_ground_level() {
    let p = SystemParams::from_expansion(1e-3, 1e-3).unwrap();
    let cold = thermal_report(&p, 0.0).unwrap();
    assert_eq!(cold.entropy, 0.0);
    assert_relative_eq!(
        cold.x_wall,
        observables::x_wall_closed_form(1, &p),
        max_relative = 1e-12
    );
    let hot = thermal_report(&p, 1e3).unwrap();
    assert!(hot.x_wall > cold.x_wall && hot.entropy > 1.0);
}
