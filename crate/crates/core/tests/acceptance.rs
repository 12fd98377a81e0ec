use std::process::ExitCode;
use std::time::Instant;

use manometer_core::basis_ops::quadrature::QuadratureOracle;
use manometer_core::entanglement::{purity_deficit, reduce_to_wall};
use manometer_core::observables::{
    force_identity_check, pressure_3d, variance_closed_form, variance_from_state,
    x_wall_closed_form, x_wall_from_state,
};
use manometer_core::oracle::{loglog_slope, sweep_slope, OBS_X_WALL};
use manometer_core::perturbation::{
    coefficient_closed_form_c, coefficient_closed_form_f, coefficient_generic, first_order_energy,
    max_abs_by_channel,
};
use manometer_core::thermal::{
    boltzmann_weights, box_ensemble, temperature_sweep, thermal_entropy, DEFAULT_START_LEVELS,
};
use manometer_core::*;
use rand::{Rng, SeedableRng};

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn require(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn ground(j: u32) -> BasisIndex {
    BasisIndex::new(j, 0).unwrap()
}

fn state(j: u32, eps: f64, mode: ChannelMode) -> Result<PerturbedState> {
    let p = SystemParams::from_expansion(eps, eps)?;
    build_perturbed_state(ground(j), &p, TruncatedBasis::default(), mode)
}

fn purity() -> Outcome {
    let s = state(1, 1e-3, ChannelMode::Leading).map_err(err)?;
    let d = purity_deficit(&reduce_to_wall(&s));
    require((5e-9..=1.2e-8).contains(&d), format!("deficit {d:.4e}"))
}

fn wall_displacement() -> Outcome {
    let mut worst = 0.0f64;
    for j in 1..=3 {
        let s = state(j, 1e-3, ChannelMode::Leading).map_err(err)?;
        let closed = x_wall_closed_form(j, s.params());
        worst = worst.max((x_wall_from_state(&s).coupling - closed).abs() / closed);
    }
    require(worst <= 1e-4, format!("max rel gap {worst:.3e}"))
}

fn force_identity() -> Outcome {
    let mut exact = 0.0f64;
    let mut fd = 0.0f64;
    for eps in [1e-2, 1e-3] {
        let p = SystemParams::from_expansion(eps, eps).map_err(err)?;
        for j in 1..=10 {
            let f = force_identity_check(j, &p).map_err(err)?;
            exact = exact.max(f.rel_gap);
            fd = fd.max(f.fd_rel_gap);
        }
    }
    require(
        exact <= 1e-12 && fd <= 1e-8,
        format!("exact {exact:.2e}, finite difference {fd:.2e}"),
    )
}

fn first_order() -> Outcome {
    let beta = 1e-3;
    let p = SystemParams::from_expansion(1e-3, beta).map_err(err)?;
    let mut lead = 0.0f64;
    let mut ratio = 0.0f64;
    for j in 1..=5 {
        lead = lead.max(
            first_order_energy(ground(j), &p, ChannelMode::Leading)
                .map_err(err)?
                .value
                .abs(),
        );
        ratio = ratio.max(
            first_order_energy(ground(j), &p, ChannelMode::All)
                .map_err(err)?
                .ratio
                .abs(),
        );
    }
    require(
        lead <= 1e-12 && ratio <= 10.0 * beta * beta,
        format!(
            "leading {lead:.2e}, all-channels ratio {ratio:.3e} (bound {:.1e})",
            10.0 * beta * beta
        ),
    )
}

fn closed_forms() -> Outcome {
    let basis = TruncatedBasis::new(10, 4).unwrap();
    let mut worst = 0.0f64;
    let mut compared = 0;
    for eps in [1e-2, 1e-3] {
        let p = SystemParams::from_expansion(eps, eps).map_err(err)?;
        for j in 1..=5 {
            for k in 1..=10 {
                let target = BasisIndex::new(k, 1).unwrap();
                let generic = match coefficient_generic(ground(j), target, &p, basis) {
                    Ok(g) => g,
                    Err(Error::Resonance { .. }) => continue,
                    Err(e) => return Err(err(e)),
                };
                let c = coefficient_closed_form_c(j, k, 1, eps, eps);
                let f = coefficient_closed_form_f(j, k, 1, eps, eps).map_err(err)?;
                for (g, cf) in [
                    (generic.channel(OperatorChannel::Wc), c),
                    (generic.channel(OperatorChannel::Wf), f),
                ] {
                    if cf != 0.0 || g != 0.0 {
                        worst = worst.max((g - cf).abs() / cf.abs());
                        compared += 1;
                    }
                }
            }
        }
    }
    require(
        worst <= 1e-10,
        format!("{compared} coefficients, max rel diff {worst:.2e}"),
    )
}

fn order_scaling() -> Outcome {
    let eps = [1e-2, 1e-3, 1e-4];
    let mut maxima = Vec::new();
    for &e in &eps {
        maxima.push(max_abs_by_channel(
            &state(1, e, ChannelMode::All).map_err(err)?,
        ));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for ch in OperatorChannel::ALL {
        let pts: Vec<(f64, f64)> = eps
            .iter()
            .zip(&maxima)
            .map(|(&e, m)| (e, m[ch.position()]))
            .collect();
        let slope = loglog_slope(&pts);
        ok &= if ch.is_leading() {
            (slope - 1.0).abs() <= 0.1
        } else {
            slope >= 1.8
        };
        parts.push(format!("{ch} {slope:.3}"));
    }
    require(ok, parts.join(", "))
}

fn oracle_convergence() -> Outcome {
    let basis = TruncatedBasis::default();
    let doubled = basis.doubled();
    let spec = SweepSpec {
        reference: ground(1),
        eps: vec![10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5)],
        beta_over_lambda: 1.0,
        bases: vec![basis, doubled],
    };
    let rows = convergence_sweep(&spec);
    let x: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.observable == OBS_X_WALL).collect();
    if let Some(r) = x.iter().find(|r| r.failed()) {
        return Err(format!(
            "row eps={} failed: {}",
            r.eps,
            r.flag.as_deref().unwrap_or_default()
        ));
    }
    let at = |eps: f64, b: TruncatedBasis| {
        x.iter()
            .find(|r| (r.eps - eps).abs() < 1e-15 && r.n_gas == b.n_gas && r.n_wall == b.n_wall)
            .expect("row present")
    };
    let gap = at(1e-2, basis).rel_error;
    let slope = sweep_slope(&rows, OBS_X_WALL, basis).unwrap_or(f64::NAN);
    let drift = spec
        .eps
        .iter()
        .map(|&e| {
            let (a, b) = (at(e, basis).oracle_value, at(e, doubled).oracle_value);
            (a - b).abs() / b.abs()
        })
        .fold(0.0, f64::max);
    require(
        gap <= 0.05 && (slope - 2.0).abs() <= 0.3 && drift < 1e-8,
        format!("gap {gap:.3e}, slope {slope:.3}, basis drift {drift:.2e}"),
    )
}

fn variance() -> Outcome {
    let eps = 1e-3;
    let s = state(1, eps, ChannelMode::Leading).map_err(err)?;
    let closed = variance_closed_form(1, eps, eps, 1.0);
    let from_state = variance_from_state(&s).variance;
    let gap = (from_state - closed).abs() / closed;
    let p = s.params();
    let ratios: Vec<f64> = (1..=5)
        .map(|j| variance_closed_form(j, eps, eps, 1.0).sqrt() / x_wall_closed_form(j, p))
        .collect();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    require(
        gap <= 1e-3 && ratios[0] > 1.0 && decreasing,
        format!(
            "variance {from_state:.5e} vs {closed:.5e} (gap {gap:.2e}), spread ratios {ratios:.3?}"
        ),
    )
}

fn pressure() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let eps = 10f64.powf(rng.gen_range(-4.0..-2.0));
        let beta = eps * rng.gen_range(0.5..2.0);
        let p = SystemParams::from_expansion(eps, beta).map_err(err)?;
        let j = [
            rng.gen_range(1..=10),
            rng.gen_range(1..=10),
            rng.gen_range(1..=10),
        ];
        let dims = [
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
        ];
        worst = worst.max(pressure_3d(j, dims, &p).map_err(err)?.rel_gap);
    }
    require(worst <= 1e-12, format!("100 sets, max rel gap {worst:.2e}"))
}

fn thermal() -> Outcome {
    let p = SystemParams::from_expansion(1e-3, 1e-3).map_err(err)?;
    let temps: Vec<f64> = (0..20)
        .map(|i| 0.1 * 10f64.powf(4.0 * f64::from(i) / 19.0))
        .collect();
    let rows = temperature_sweep(&p, &temps).map_err(err)?;
    let mut sum_err = 0.0f64;
    for &t in &temps {
        let e = box_ensemble(&p, 1.0 / t, DEFAULT_START_LEVELS).map_err(err)?;
        sum_err = sum_err.max((e.weights.iter().sum::<f64>() - 1.0).abs());
    }
    let cold = thermal_entropy(
        &boltzmann_weights(&[p.gas_level(1), p.gas_level(2)], 1.0 / 1e-3).map_err(err)?,
    );
    let zero = temperature_sweep(&p, &[0.0]).map_err(err)?[0].entropy;
    let nonneg = rows.iter().all(|r| r.entropy >= 0.0);
    let mono = rows.windows(2).all(|w| {
        w[1].mean_energy >= w[0].mean_energy
            && w[1].entropy >= w[0].entropy
            && w[1].x_wall >= w[0].x_wall
    });
    require(
        sum_err <= 1e-12 && nonneg && cold <= 1e-10 && zero <= 1e-10 && mono,
        format!(
            "weight sum err {sum_err:.1e}, S(T=1e-3) {cold:.1e}, S(0) {zero:.1e}, monotone {mono}"
        ),
    )
}

fn quadrature() -> Outcome {
    let p = SystemParams::new(1.0, 1.0, 1.0, 1.0, 1.0).map_err(err)?;
    let block = QuadratureOracle::default()
        .check_block(&p, TruncatedBasis::new(10, 6).unwrap())
        .map_err(err)?;
    let (n, worst) = (block.elements, block.max_abs_diff);
    require(
        worst <= 1e-10,
        format!("{n} elements, max abs diff {worst:.2e}"),
    )
}

fn main() -> ExitCode {
    let checks: [Criterion; 11] = [
        ("purity deficit", purity),
        ("wall displacement", wall_displacement),
        ("force identity", force_identity),
        ("first-order energy", first_order),
        ("coefficient closed forms", closed_forms),
        ("order scaling", order_scaling),
        ("oracle convergence", oracle_convergence),
        ("variance", variance),
        ("3d pressure", pressure),
        ("thermal", thermal),
        ("quadrature", quadrature),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{secs:.2}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d} [{secs:.2}s]", i + 1)
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
