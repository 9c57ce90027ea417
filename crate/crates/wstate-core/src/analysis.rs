//! Closed-form quantities and derived observables: dark states, the adiabatic
//! gap, fidelities, per-mode emission rates and probabilities, and the
//! mode-number scaling checks.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dynamics::{
    basis_density, basis_state, evolve_lindblad, evolve_schrodinger, uniform_samples,
    DensityTrajectory, IntegratorSettings, Trajectory, DEFAULT_SAMPLES,
};
use crate::error::{Error, Result};
use crate::model::{
    mode_index, sink_index, PulseSpec, SystemParams, WStateWeights, E_INDEX, U_INDEX,
};

/// Detuning difference below which two-photon resonance is considered exact.
pub const RESONANCE_TOL: f64 = 1e-12;

/// Amplitude floor below which ratio checks skip a sample: 0/0 at early times
/// says nothing about the scaling law.
pub const RATIO_FLOOR: f64 = 1e-8;

fn require_resonance(params: &SystemParams) -> Result<()> {
    if !params.is_two_photon_resonant(RESONANCE_TOL) {
        return Err(Error::ResonanceViolated {
            delta1: params.delta1(),
            delta2: params.delta2(),
        });
    }
    Ok(())
}

fn require_coupled(params: &SystemParams) -> Result<f64> {
    let a = params.coupling_norm();
    if a <= 0.0 {
        return Err(Error::InvalidParams {
            field: "couplings",
            reason: "dark state undefined for all-zero couplings".into(),
        });
    }
    Ok(a)
}

/// The instantaneous dark state `(2A|u,0…0⟩ − Ω|g,W_N⟩)/√(4A² + Ω²)` over
/// the closed basis, with W-state weights g_i/A.
///
/// Exists only under two-photon resonance Δ₁ = Δ₂ and with at least one
/// nonzero coupling. At Ω = 0 this is exactly |u,0…0⟩.
///
/// ```
/// use wstate_core::{build_hamiltonian, dark_state, SystemParams};
///
/// let params = SystemParams::closed(vec![0.02, 0.03, 0.04], 0.0, 0.0)?;
/// let psi = dark_state(&params, 0.5)?;
/// // Zero-energy eigenvector: H·Ψ₀ vanishes.
/// let h = build_hamiltonian(&params, 0.5, false);
/// let residual: f64 = h.dot(&psi).iter().map(|v| v.norm_sqr()).sum();
/// assert!(residual.sqrt() < 1e-12);
/// # Ok::<(), wstate_core::Error>(())
/// ```
pub fn dark_state(params: &SystemParams, omega: f64) -> Result<Array1<C64>> {
    require_resonance(params)?;
    let a = require_coupled(params)?;
    let norm = (4.0 * a * a + omega * omega).sqrt();
    let mut psi = Array1::<C64>::zeros(params.closed_dim());
    psi[U_INDEX] = C64::new(2.0 * a / norm, 0.0);
    for (k, &g) in params.couplings().iter().enumerate() {
        psi[mode_index(k + 1)] = C64::new(-omega * g / (a * norm), 0.0);
    }
    Ok(psi)
}

/// The zero-energy dark-state family for arbitrary W-state weights:
/// (1/𝒩)·[2(Σ A_i g_i)|u,0…0⟩ − ΩA|g,W⟩] with 𝒩 = √(4(Σ A_i g_i)² + Ω²A²).
///
/// Weights proportional to the couplings reproduce [`dark_state`]. Degenerate
/// at Ω = 0 with weights orthogonal to the couplings (𝒩 = 0), which is
/// rejected.
pub fn dark_state_family(
    params: &SystemParams,
    omega: f64,
    weights: &WStateWeights,
) -> Result<Array1<C64>> {
    require_resonance(params)?;
    require_coupled(params)?;
    if weights.len() != params.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: params.n_modes(),
            actual: weights.len(),
        });
    }
    let overlap: f64 = weights
        .weights()
        .iter()
        .zip(params.couplings())
        .map(|(a, g)| a * g)
        .sum();
    let a_norm = weights.norm();
    let norm = (4.0 * overlap * overlap + omega * omega * a_norm * a_norm).sqrt();
    if norm <= 0.0 {
        return Err(Error::InvalidParams {
            field: "weights",
            reason: "dark state degenerate: Ω = 0 and weights orthogonal to couplings".into(),
        });
    }
    let mut psi = Array1::<C64>::zeros(params.closed_dim());
    psi[U_INDEX] = C64::new(2.0 * overlap / norm, 0.0);
    for (k, &w) in weights.weights().iter().enumerate() {
        psi[mode_index(k + 1)] = C64::new(-omega * w / norm, 0.0);
    }
    Ok(psi)
}

/// The energy gap limiting the adiabatic speed:
/// ½(Δ₁ − √(4A² + Ω² + Δ₁²)), the distance from the dark state to the lower
/// bright branch (negative by convention).
pub fn adiabatic_gap(params: &SystemParams, omega: f64) -> f64 {
    let a = params.coupling_norm();
    let delta1 = params.delta1();
    0.5 * (delta1 - (4.0 * a * a + omega * omega + delta1 * delta1).sqrt())
}

/// Fidelity the adiabatic transfer ideally reaches at the pulse peak:
/// Ω₀²/(4A² + Ω₀²). Depends on the couplings only through A, so any two
/// coupling lists with equal Σg² give the same value.
pub fn ideal_final_fidelity(params: &SystemParams, omega0: f64) -> f64 {
    let a = params.coupling_norm();
    let o2 = omega0 * omega0;
    if o2 == 0.0 {
        return 0.0;
    }
    o2 / (4.0 * a * a + o2)
}

/// |⟨target|state⟩|².
pub fn fidelity(state: &Array1<C64>, target: &Array1<C64>) -> Result<f64> {
    if state.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: target.len(),
            actual: state.len(),
        });
    }
    let overlap: C64 = target
        .iter()
        .zip(state.iter())
        .map(|(t, s)| t.conj() * s)
        .sum();
    Ok(overlap.norm_sqr())
}

/// |⟨ψ(t)|Ψ₀(Ω(t))⟩|² at every sample of a closed-system run, with the dark
/// state evaluated at the instantaneous drive amplitude.
pub fn adiabatic_fidelity_series(
    traj: &Trajectory,
    params: &SystemParams,
    pulse: &PulseSpec,
) -> Result<Vec<f64>> {
    require_resonance(params)?;
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, state)| {
            let dark = dark_state(params, pulse.value(t))?;
            fidelity(state, &dark)
        })
        .collect()
}

/// Per-mode emission rates and probabilities of an open-system run.
#[derive(Clone, Debug, Serialize)]
pub struct EmissionReport {
    /// Sample times in ns.
    pub times: Vec<f64>,
    /// κ_i·ρ_{Mode(i),Mode(i)}(t) in 1/ns, indexed \[mode]\[time].
    pub per_mode_rates: Vec<Vec<f64>>,
    /// P_i(t) = ∫₀ᵗ κ_i ρ_ii dt′ by trapezoidal quadrature on the sample
    /// grid; monotone non-decreasing, indexed \[mode]\[time].
    pub per_mode_probabilities: Vec<Vec<f64>>,
    /// Σ_i P_i at the final sample.
    pub total_probability: f64,
    /// Sink population not accounted for by the resonator channels: the
    /// probability routed through qutrit decay γ into |g,0…0⟩. Approximate
    /// under [`crate::model::DecayModel::Combined`], where the coherent sum
    /// mixes the channels.
    pub qutrit_loss: f64,
}

/// Emission rates κ_i·ρ_ii(t) and their cumulative integrals for an
/// open-system trajectory.
pub fn emission_report(dtraj: &DensityTrajectory, params: &SystemParams) -> EmissionReport {
    let n = params.n_modes();
    let len = dtraj.len();
    let mut per_mode_rates = Vec::with_capacity(n);
    let mut per_mode_probabilities = Vec::with_capacity(n);
    for (k, &kappa) in params.kappas().iter().enumerate() {
        let idx = mode_index(k + 1);
        let rates: Vec<f64> = dtraj
            .rhos
            .iter()
            .map(|rho| kappa * rho[[idx, idx]].re.max(0.0))
            .collect();
        let mut cum = Vec::with_capacity(len);
        let mut acc = 0.0;
        cum.push(0.0);
        for j in 1..len {
            let dt = dtraj.times[j] - dtraj.times[j - 1];
            acc += 0.5 * dt * (rates[j] + rates[j - 1]);
            cum.push(acc);
        }
        per_mode_rates.push(rates);
        per_mode_probabilities.push(cum);
    }
    let total_probability = per_mode_probabilities
        .iter()
        .map(|p| *p.last().unwrap_or(&0.0))
        .sum();
    let sink = sink_index(n);
    let sink_population = dtraj.final_rho()[[sink, sink]].re;
    EmissionReport {
        times: dtraj.times.clone(),
        per_mode_rates,
        per_mode_probabilities,
        total_probability,
        qutrit_loss: sink_population - total_probability,
    }
}

/// Suprema over sampled times of the deviations the mode-number scaling
/// theorem says are zero.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InvarianceReport {
    /// sup_t of the |u⟩-amplitude (closed) or population (open) difference
    /// between the two systems.
    pub max_cu_deviation: f64,
    /// Same for the |e⟩ component.
    pub max_ce_deviation: f64,
    /// sup_t over mode pairs of the within- and cross-system ratio deviations
    /// from the coupling ratios (amplitudes vs g_i/g_j closed, populations vs
    /// g_i²/g_j² open), skipping samples whose denominator is below 1e-8.
    pub max_ratio_deviation: f64,
    /// sup_t of the total mode-population difference (closed) or total
    /// emission-rate difference (open) between the two systems.
    pub max_total_rate_deviation: f64,
}

impl InvarianceReport {
    /// Largest of the four deviations.
    pub fn max_deviation(&self) -> f64 {
        self.max_cu_deviation
            .max(self.max_ce_deviation)
            .max(self.max_ratio_deviation)
            .max(self.max_total_rate_deviation)
    }
}

fn check_scaling_preconditions(
    params_a: &SystemParams,
    params_b: &SystemParams,
    require_uniform_kappa: bool,
) -> Result<()> {
    let sum_a: f64 = params_a.couplings().iter().map(|g| g * g).sum();
    let sum_b: f64 = params_b.couplings().iter().map(|g| g * g).sum();
    if (sum_a - sum_b).abs() > 1e-12 {
        return Err(Error::ScalingCondition(format!(
            "Σg² must match: {sum_a} vs {sum_b}"
        )));
    }
    if params_a.delta1() != params_b.delta1()
        || params_a.delta2() != params_b.delta2()
        || params_a.gamma() != params_b.gamma()
        || params_a.gamma_phi() != params_b.gamma_phi()
    {
        return Err(Error::ScalingCondition(
            "non-coupling parameters must be identical".into(),
        ));
    }
    if require_uniform_kappa {
        let mut all = params_a.kappas().iter().chain(params_b.kappas());
        let first = *all.next().expect("validated: at least one mode");
        if all.any(|k| *k != first) {
            return Err(Error::ScalingCondition(
                "all leakage rates must equal one common κ".into(),
            ));
        }
    }
    Ok(())
}

/// Run the closed-system evolution from |u,0…0⟩ for two systems with equal
/// Σg² and report how far the amplitudes deviate from the scaling-theorem
/// solutions: c_u and c_e agree across systems, c_i/c_j = g_i/g_j within each
/// system, and c′_{i′}/c_i = g′_{i′}/g_i across systems.
pub fn check_schrodinger_scaling(
    params_a: &SystemParams,
    params_b: &SystemParams,
    pulse: &PulseSpec,
    t_span: (f64, f64),
    settings: &IntegratorSettings,
) -> Result<InvarianceReport> {
    check_scaling_preconditions(params_a, params_b, false)?;
    let samples = uniform_samples(t_span, DEFAULT_SAMPLES);
    let run = |params: &SystemParams| {
        evolve_schrodinger(
            params,
            pulse,
            &basis_state(params.closed_dim(), U_INDEX),
            t_span,
            &samples,
            settings,
        )
    };
    let traj_a = run(params_a)?;
    let traj_b = run(params_b)?;

    let mut report = InvarianceReport {
        max_cu_deviation: 0.0,
        max_ce_deviation: 0.0,
        max_ratio_deviation: 0.0,
        max_total_rate_deviation: 0.0,
    };
    let g_a = params_a.couplings();
    let g_b = params_b.couplings();
    for (sa, sb) in traj_a.states.iter().zip(&traj_b.states) {
        report.max_cu_deviation = report
            .max_cu_deviation
            .max((sa[U_INDEX] - sb[U_INDEX]).norm());
        report.max_ce_deviation = report
            .max_ce_deviation
            .max((sa[E_INDEX] - sb[E_INDEX]).norm());

        for (state, g) in [(sa, g_a), (sb, g_b)] {
            for j in 0..g.len() {
                let cj = state[mode_index(j + 1)];
                if cj.norm() <= RATIO_FLOOR || g[j] == 0.0 {
                    continue;
                }
                for i in 0..g.len() {
                    if i == j {
                        continue;
                    }
                    let ci = state[mode_index(i + 1)];
                    let dev = (ci / cj - C64::new(g[i] / g[j], 0.0)).norm();
                    report.max_ratio_deviation = report.max_ratio_deviation.max(dev);
                }
            }
        }
        for (i, &gi) in g_a.iter().enumerate() {
            let ci = sa[mode_index(i + 1)];
            if ci.norm() <= RATIO_FLOOR || gi == 0.0 {
                continue;
            }
            for (ip, &gip) in g_b.iter().enumerate() {
                let cip = sb[mode_index(ip + 1)];
                let dev = (cip / ci - C64::new(gip / gi, 0.0)).norm();
                report.max_ratio_deviation = report.max_ratio_deviation.max(dev);
            }
        }

        let total_a: f64 = (0..g_a.len())
            .map(|i| sa[mode_index(i + 1)].norm_sqr())
            .sum();
        let total_b: f64 = (0..g_b.len())
            .map(|i| sb[mode_index(i + 1)].norm_sqr())
            .sum();
        report.max_total_rate_deviation = report
            .max_total_rate_deviation
            .max((total_a - total_b).abs());
    }
    Ok(report)
}

/// Open-system analog of [`check_schrodinger_scaling`]: both systems start in
/// |u,0…0⟩⟨u,0…0| and must share one uniform κ; reports the deviation of the
/// total emission rate κΣρ_ii across systems and of the per-mode population
/// ratios from g_i²/g_j².
pub fn check_lindblad_scaling(
    params_a: &SystemParams,
    params_b: &SystemParams,
    pulse: &PulseSpec,
    t_span: (f64, f64),
    settings: &IntegratorSettings,
) -> Result<InvarianceReport> {
    check_scaling_preconditions(params_a, params_b, true)?;
    let kappa = params_a.kappas()[0];
    let samples = uniform_samples(t_span, DEFAULT_SAMPLES);
    let run = |params: &SystemParams| {
        evolve_lindblad(
            params,
            pulse,
            &basis_density(params.open_dim(), U_INDEX),
            t_span,
            &samples,
            settings,
        )
    };
    let traj_a = run(params_a)?;
    let traj_b = run(params_b)?;

    let mut report = InvarianceReport {
        max_cu_deviation: 0.0,
        max_ce_deviation: 0.0,
        max_ratio_deviation: 0.0,
        max_total_rate_deviation: 0.0,
    };
    let g_a = params_a.couplings();
    let g_b = params_b.couplings();
    for (ra, rb) in traj_a.rhos.iter().zip(&traj_b.rhos) {
        report.max_cu_deviation = report
            .max_cu_deviation
            .max((ra[[U_INDEX, U_INDEX]].re - rb[[U_INDEX, U_INDEX]].re).abs());
        report.max_ce_deviation = report
            .max_ce_deviation
            .max((ra[[E_INDEX, E_INDEX]].re - rb[[E_INDEX, E_INDEX]].re).abs());

        for (rho, g) in [(ra, g_a), (rb, g_b)] {
            for j in 0..g.len() {
                let pj = rho[[mode_index(j + 1), mode_index(j + 1)]].re;
                if pj <= RATIO_FLOOR || g[j] == 0.0 {
                    continue;
                }
                for i in 0..g.len() {
                    if i == j {
                        continue;
                    }
                    let pi = rho[[mode_index(i + 1), mode_index(i + 1)]].re;
                    let dev = (pi / pj - (g[i] * g[i]) / (g[j] * g[j])).abs();
                    report.max_ratio_deviation = report.max_ratio_deviation.max(dev);
                }
            }
        }
        for (i, &gi) in g_a.iter().enumerate() {
            let pi = ra[[mode_index(i + 1), mode_index(i + 1)]].re;
            if pi <= RATIO_FLOOR || gi == 0.0 {
                continue;
            }
            for (ip, &gip) in g_b.iter().enumerate() {
                let pip = rb[[mode_index(ip + 1), mode_index(ip + 1)]].re;
                let dev = (pip / pi - (gip * gip) / (gi * gi)).abs();
                report.max_ratio_deviation = report.max_ratio_deviation.max(dev);
            }
        }

        let total_a: f64 = (0..g_a.len())
            .map(|i| kappa * ra[[mode_index(i + 1), mode_index(i + 1)]].re)
            .sum();
        let total_b: f64 = (0..g_b.len())
            .map(|i| kappa * rb[[mode_index(i + 1), mode_index(i + 1)]].re)
            .sum();
        report.max_total_rate_deviation = report
            .max_total_rate_deviation
            .max((total_a - total_b).abs());
    }
    Ok(report)
}
