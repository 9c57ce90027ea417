//! Physical model of the driven qutrit–multiresonator system: the
//! single-excitation basis, pump-pulse shapes, the interaction-picture
//! Hamiltonian for arbitrary mode number, the dissipation jump operators, and
//! target W states.
//!
//! All frequencies and rates are angular frequencies in 1/ns, all times in
//! ns (see [`crate::units`]).

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Position of |u, 0…0⟩ in the basis order.
pub const U_INDEX: usize = 0;
/// Position of |e, 0…0⟩ in the basis order.
pub const E_INDEX: usize = 1;

/// Position of the one-photon state of mode `i` (1-based) in the basis order.
pub fn mode_index(i: usize) -> usize {
    1 + i
}

/// Position of the sink state |g, 0…0⟩ for a system with `n_modes` modes.
pub fn sink_index(n_modes: usize) -> usize {
    n_modes + 2
}

/// Index into the single-excitation basis.
///
/// The order is fixed as (U, E, Mode(1)…Mode(N), Sink) for all serialization.
/// The closed-system basis has dimension N+2 (no sink); the open-system basis
/// appends the sink for dimension N+3. `Sink` is |g, 0…0⟩, reached after a
/// photon leaks into a transmission line or after the qutrit decays to |g⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisIndex {
    /// |u, 0…0⟩ — qutrit in the lower drive level, resonators empty.
    U,
    /// |e, 0…0⟩ — qutrit excited, resonators empty.
    E,
    /// |g, 0…1ᵢ…0⟩ — one photon in resonator `i` (1-based).
    Mode(usize),
    /// |g, 0…0⟩ — the absorbing state of the open system.
    Sink,
}

impl BasisIndex {
    /// Position of this basis state in the fixed order for `n_modes` modes.
    ///
    /// Panics if a `Mode` index lies outside 1…N.
    pub fn position(self, n_modes: usize) -> usize {
        match self {
            BasisIndex::U => U_INDEX,
            BasisIndex::E => E_INDEX,
            BasisIndex::Mode(i) => {
                assert!(
                    (1..=n_modes).contains(&i),
                    "mode index {i} out of range 1..={n_modes}"
                );
                mode_index(i)
            }
            BasisIndex::Sink => sink_index(n_modes),
        }
    }

    /// Basis state at `position`, or `None` when out of range.
    pub fn from_position(position: usize, n_modes: usize, include_sink: bool) -> Option<Self> {
        match position {
            0 => Some(BasisIndex::U),
            1 => Some(BasisIndex::E),
            p if p < n_modes + 2 => Some(BasisIndex::Mode(p - 1)),
            p if include_sink && p == n_modes + 2 => Some(BasisIndex::Sink),
            _ => None,
        }
    }
}

/// How qutrit decay out of |e⟩ enters the jump operators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// Two incoherent channels √γ|u,0…0⟩⟨e,0…0| and √γ|g,0…0⟩⟨e,0…0|: the
    /// standard reading of equal decay rates to |u⟩ and |g⟩. Default.
    #[default]
    Split,
    /// One operator √γ(|u,0…0⟩ + |g,0…0⟩)⟨e,0…0| — a coherent sum of the two
    /// channels. Populations evolve identically to [`DecayModel::Split`]; the
    /// two variants differ only in coherences that never feed back into the
    /// populations.
    Combined,
}

/// Static configuration of the qutrit–multiresonator system.
///
/// Immutable after construction; every field is validated by [`SystemParams::new`],
/// so downstream builders never see an invalid configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemParams {
    n_modes: usize,
    #[serde(rename = "couplings_per_ns")]
    couplings: Vec<f64>,
    #[serde(rename = "delta1_per_ns")]
    delta1: f64,
    #[serde(rename = "delta2_per_ns")]
    delta2: f64,
    #[serde(rename = "gamma_per_ns")]
    gamma: f64,
    #[serde(rename = "gamma_phi_per_ns")]
    gamma_phi: f64,
    #[serde(rename = "kappas_per_ns")]
    kappas: Vec<f64>,
    decay_model: DecayModel,
}

impl SystemParams {
    /// Build a validated parameter set.
    ///
    /// `couplings` are the qutrit–resonator couplings g_i, `delta1`/`delta2`
    /// the pump and resonator detunings, `gamma` the qutrit decay rate per
    /// channel, `gamma_phi` the dephasing rate, and `kappas` the per-mode
    /// leakage rates. All in 1/ns.
    pub fn new(
        couplings: Vec<f64>,
        delta1: f64,
        delta2: f64,
        gamma: f64,
        gamma_phi: f64,
        kappas: Vec<f64>,
        decay_model: DecayModel,
    ) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::InvalidParams {
                field: "couplings",
                reason: "at least one mode is required".into(),
            });
        }
        if couplings.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidParams {
                field: "couplings",
                reason: "couplings must be finite and non-negative".into(),
            });
        }
        if kappas.len() != couplings.len() {
            return Err(Error::InvalidParams {
                field: "kappas",
                reason: format!(
                    "expected {} leakage rates, got {}",
                    couplings.len(),
                    kappas.len()
                ),
            });
        }
        if kappas.iter().any(|k| !k.is_finite() || *k < 0.0) {
            return Err(Error::InvalidParams {
                field: "kappas",
                reason: "leakage rates must be finite and non-negative".into(),
            });
        }
        for (field, value) in [("delta1", delta1), ("delta2", delta2)] {
            if !value.is_finite() {
                return Err(Error::InvalidParams {
                    field,
                    reason: "detuning must be finite".into(),
                });
            }
        }
        for (field, value) in [("gamma", gamma), ("gamma_phi", gamma_phi)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParams {
                    field,
                    reason: "rate must be finite and non-negative".into(),
                });
            }
        }
        Ok(SystemParams {
            n_modes: couplings.len(),
            couplings,
            delta1,
            delta2,
            gamma,
            gamma_phi,
            kappas,
            decay_model,
        })
    }

    /// A lossless system: all rates zero, for closed-system runs.
    pub fn closed(couplings: Vec<f64>, delta1: f64, delta2: f64) -> Result<Self> {
        let n = couplings.len();
        SystemParams::new(
            couplings,
            delta1,
            delta2,
            0.0,
            0.0,
            vec![0.0; n],
            DecayModel::default(),
        )
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn delta1(&self) -> f64 {
        self.delta1
    }

    pub fn delta2(&self) -> f64 {
        self.delta2
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_phi(&self) -> f64 {
        self.gamma_phi
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    pub fn decay_model(&self) -> DecayModel {
        self.decay_model
    }

    /// Total coupling A = √(Σ g_i²). Zero when every coupling is zero; the
    /// dark-state operations reject that case.
    pub fn coupling_norm(&self) -> f64 {
        self.couplings.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// Dimension of the closed-system basis (no sink).
    pub fn closed_dim(&self) -> usize {
        self.n_modes + 2
    }

    /// Dimension of the open-system basis (with sink).
    pub fn open_dim(&self) -> usize {
        self.n_modes + 3
    }

    /// True when the detunings satisfy two-photon resonance within `tol`.
    pub fn is_two_photon_resonant(&self, tol: f64) -> bool {
        (self.delta1 - self.delta2).abs() <= tol
    }

    /// Copy with different couplings (same mode count required).
    pub fn with_couplings(&self, couplings: Vec<f64>) -> Result<Self> {
        if couplings.len() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                actual: couplings.len(),
            });
        }
        SystemParams::new(
            couplings,
            self.delta1,
            self.delta2,
            self.gamma,
            self.gamma_phi,
            self.kappas.clone(),
            self.decay_model,
        )
    }

    /// Copy with different detunings.
    pub fn with_detunings(&self, delta1: f64, delta2: f64) -> Result<Self> {
        SystemParams::new(
            self.couplings.clone(),
            delta1,
            delta2,
            self.gamma,
            self.gamma_phi,
            self.kappas.clone(),
            self.decay_model,
        )
    }

    /// Copy with every mode's leakage rate set to `kappa`.
    pub fn with_uniform_kappa(&self, kappa: f64) -> Result<Self> {
        SystemParams::new(
            self.couplings.clone(),
            self.delta1,
            self.delta2,
            self.gamma,
            self.gamma_phi,
            vec![kappa; self.n_modes],
            self.decay_model,
        )
    }

    /// Copy with a different decay model.
    pub fn with_decay_model(&self, decay_model: DecayModel) -> Self {
        SystemParams {
            decay_model,
            ..self.clone()
        }
    }
}

/// Time-dependent pump Rabi frequency Ω(t).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseSpec {
    /// Ω(t) = Ω₀·exp[−(t−τ)²/T₀²]. `omega0` is the peak amplitude in 1/ns,
    /// `tau` the center and `t0` the 1/e half-width in ns. Evaluated for all
    /// t without truncation.
    Gaussian { omega0: f64, tau: f64, t0: f64 },
    /// Ω(t) = Ω_max·(1 − t/t_f) for t ≤ t_f and zero afterwards.
    LinearRamp { omega_max: f64, t_f: f64 },
    /// Ω(t) = Ω for all t.
    Constant { omega: f64 },
    /// Linear interpolation between (t, Ω) knots; held at the endpoint values
    /// outside the knot range.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl PulseSpec {
    /// Check the shape parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            PulseSpec::Gaussian { omega0, tau, t0 } => {
                if !omega0.is_finite() || *omega0 < 0.0 {
                    return Err(Error::InvalidParams {
                        field: "pulse.omega0",
                        reason: "peak amplitude must be finite and non-negative".into(),
                    });
                }
                if !tau.is_finite() {
                    return Err(Error::InvalidParams {
                        field: "pulse.tau",
                        reason: "pulse center must be finite".into(),
                    });
                }
                if !t0.is_finite() || *t0 <= 0.0 {
                    return Err(Error::InvalidParams {
                        field: "pulse.t0",
                        reason: "pulse width must be positive".into(),
                    });
                }
            }
            PulseSpec::LinearRamp { omega_max, t_f } => {
                if !omega_max.is_finite() || *omega_max < 0.0 {
                    return Err(Error::InvalidParams {
                        field: "pulse.omega_max",
                        reason: "ramp amplitude must be finite and non-negative".into(),
                    });
                }
                if !t_f.is_finite() || *t_f <= 0.0 {
                    return Err(Error::InvalidParams {
                        field: "pulse.t_f",
                        reason: "ramp duration must be positive".into(),
                    });
                }
            }
            PulseSpec::Constant { omega } => {
                if !omega.is_finite() || *omega < 0.0 {
                    return Err(Error::InvalidParams {
                        field: "pulse.omega",
                        reason: "amplitude must be finite and non-negative".into(),
                    });
                }
            }
            PulseSpec::PiecewiseLinear { knots } => {
                if knots.is_empty() {
                    return Err(Error::InvalidParams {
                        field: "pulse.knots",
                        reason: "at least one knot is required".into(),
                    });
                }
                for pair in knots.windows(2) {
                    if pair[1].0 <= pair[0].0 {
                        return Err(Error::InvalidParams {
                            field: "pulse.knots",
                            reason: "knot times must be strictly increasing".into(),
                        });
                    }
                }
                if knots.iter().any(|(t, w)| !t.is_finite() || !w.is_finite() || *w < 0.0) {
                    return Err(Error::InvalidParams {
                        field: "pulse.knots",
                        reason: "knot values must be finite with Ω ≥ 0".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Ω(t) in 1/ns. Total on every valid pulse; never negative.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            PulseSpec::Gaussian { omega0, tau, t0 } => {
                let x = (t - tau) / t0;
                omega0 * (-x * x).exp()
            }
            PulseSpec::LinearRamp { omega_max, t_f } => {
                if t > *t_f {
                    0.0
                } else {
                    (omega_max * (1.0 - t / t_f)).max(0.0)
                }
            }
            PulseSpec::Constant { omega } => *omega,
            PulseSpec::PiecewiseLinear { knots } => {
                let first = knots.first().expect("validated: non-empty");
                let last = knots.last().expect("validated: non-empty");
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let hi = knots.partition_point(|(tk, _)| *tk < t);
                let (t0, w0) = knots[hi - 1];
                let (t1, w1) = knots[hi];
                w0 + (w1 - w0) * (t - t0) / (t1 - t0)
            }
        }
    }

}

/// Non-negative W-state weights A_i, not all zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WStateWeights {
    weights: Vec<f64>,
}

impl WStateWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParams {
                field: "weights",
                reason: "at least one weight is required".into(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParams {
                field: "weights",
                reason: "weights must be finite and non-negative".into(),
            });
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidParams {
                field: "weights",
                reason: "weights must not all be zero".into(),
            });
        }
        Ok(WStateWeights { weights })
    }

    /// Weights proportional to the couplings g_i — the W state the adiabatic
    /// passage produces.
    pub fn from_couplings(params: &SystemParams) -> Self {
        WStateWeights {
            weights: params.couplings().to_vec(),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Norm A = √(Σ A_i²).
    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// The interaction-picture Hamiltonian at drive amplitude `omega`, over the
/// fixed basis order.
///
/// Matrix elements: `H[U,E] = Ω/2` (the drive enters through half the Rabi
/// frequency), `H[E,E] = Δ₁`, `H[E,Mode(i)] = g_i`, `H[Mode(i),Mode(i)] =
/// Δ₁−Δ₂`, everything else zero. With `include_sink` the sink row and column are
/// present and identically zero: the sink has no coherent dynamics and its
/// interaction-picture energy only enters coherences that never feed back
/// into populations.
///
/// All entries are real, so the matrix equals its conjugate transpose
/// exactly. Invalid parameter sets are unrepresentable ([`SystemParams::new`]
/// validates), so this is a total function.
pub fn build_hamiltonian(params: &SystemParams, omega: f64, include_sink: bool) -> Array2<C64> {
    let n = params.n_modes();
    let dim = if include_sink {
        params.open_dim()
    } else {
        params.closed_dim()
    };
    let mut h = Array2::<C64>::zeros((dim, dim));
    let re = |x: f64| C64::new(x, 0.0);
    h[[U_INDEX, E_INDEX]] = re(0.5 * omega);
    h[[E_INDEX, U_INDEX]] = re(0.5 * omega);
    h[[E_INDEX, E_INDEX]] = re(params.delta1());
    let mode_detuning = re(params.delta1() - params.delta2());
    for (k, &g) in params.couplings().iter().enumerate() {
        let m = mode_index(k + 1);
        h[[E_INDEX, m]] = re(g);
        h[[m, E_INDEX]] = re(g);
        h[[m, m]] = mode_detuning;
    }
    debug_assert_eq!(n + 2 + usize::from(include_sink), dim);
    h
}

/// Jump operators of the Lindblad master equation, over the open-system
/// basis (dimension N+3).
///
/// Returns the N mode-leakage operators L_i = √κ_i |Sink⟩⟨Mode(i)|, the
/// qutrit-decay operator(s) selected by [`SystemParams::decay_model`], and
/// the dephasing operator √γ_φ |E⟩⟨E|, in that order. Operators for zero
/// rates are returned as zero matrices so the list layout is stable.
pub fn build_jump_operators(params: &SystemParams) -> Vec<Array2<C64>> {
    let n = params.n_modes();
    let dim = params.open_dim();
    let sink = sink_index(n);
    let re = |x: f64| C64::new(x, 0.0);
    let mut ops = Vec::with_capacity(n + 3);
    for (k, &kappa) in params.kappas().iter().enumerate() {
        let mut l = Array2::<C64>::zeros((dim, dim));
        l[[sink, mode_index(k + 1)]] = re(kappa.sqrt());
        ops.push(l);
    }
    let root_gamma = re(params.gamma().sqrt());
    match params.decay_model() {
        DecayModel::Split => {
            let mut l_u = Array2::<C64>::zeros((dim, dim));
            l_u[[U_INDEX, E_INDEX]] = root_gamma;
            ops.push(l_u);
            let mut l_g = Array2::<C64>::zeros((dim, dim));
            l_g[[sink, E_INDEX]] = root_gamma;
            ops.push(l_g);
        }
        DecayModel::Combined => {
            let mut l = Array2::<C64>::zeros((dim, dim));
            l[[U_INDEX, E_INDEX]] = root_gamma;
            l[[sink, E_INDEX]] = root_gamma;
            ops.push(l);
        }
    }
    let mut l_phi = Array2::<C64>::zeros((dim, dim));
    l_phi[[E_INDEX, E_INDEX]] = re(params.gamma_phi().sqrt());
    ops.push(l_phi);
    ops
}

/// The normalized W state with the given weights, as a state vector over the
/// fixed basis order: amplitude A_i/A on Mode(i), zero on U, E (and Sink when
/// `include_sink`).
pub fn target_w_state(weights: &WStateWeights, include_sink: bool) -> Array1<C64> {
    let n = weights.len();
    let dim = n + 2 + usize::from(include_sink);
    let norm = weights.norm();
    let mut psi = Array1::<C64>::zeros(dim);
    for (k, &w) in weights.weights().iter().enumerate() {
        psi[mode_index(k + 1)] = C64::new(w / norm, 0.0);
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params_three_equal(g: f64) -> SystemParams {
        SystemParams::closed(vec![g; 3], 0.0, 0.0).unwrap()
    }

    #[test]
    fn basis_positions_follow_fixed_order() {
        assert_eq!(BasisIndex::U.position(3), 0);
        assert_eq!(BasisIndex::E.position(3), 1);
        assert_eq!(BasisIndex::Mode(1).position(3), 2);
        assert_eq!(BasisIndex::Mode(3).position(3), 4);
        assert_eq!(BasisIndex::Sink.position(3), 5);
        assert_eq!(BasisIndex::from_position(4, 3, false), Some(BasisIndex::Mode(3)));
        assert_eq!(BasisIndex::from_position(5, 3, false), None);
        assert_eq!(BasisIndex::from_position(5, 3, true), Some(BasisIndex::Sink));
    }

    #[test]
    fn params_validation_names_fields() {
        let err = SystemParams::closed(vec![], 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParams { field: "couplings", .. }));
        let err = SystemParams::closed(vec![-0.1, 0.2], 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParams { field: "couplings", .. }));
        let err = SystemParams::new(vec![1.0], 0.0, 0.0, -0.1, 0.0, vec![0.0], DecayModel::Split)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidParams { field: "gamma", .. }));
        let err = SystemParams::new(vec![1.0], 0.0, 0.0, 0.0, 0.0, vec![0.0, 0.0], DecayModel::Split)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidParams { field: "kappas", .. }));
    }

    #[test]
    fn gaussian_peaks_at_center() {
        let pulse = PulseSpec::Gaussian {
            omega0: 3.0,
            tau: 1000.0,
            t0: 360.0,
        };
        assert_eq!(pulse.value(1000.0), 3.0);
    }

    #[test]
    fn linear_ramp_vanishes_at_endpoint_and_beyond() {
        let pulse = PulseSpec::LinearRamp {
            omega_max: 2.0,
            t_f: 45.0,
        };
        assert_eq!(pulse.value(45.0), 0.0);
        assert_eq!(pulse.value(50.0), 0.0);
        assert_abs_diff_eq!(pulse.value(0.0), 2.0);
        assert_abs_diff_eq!(pulse.value(22.5), 1.0);
    }

    #[test]
    fn gaussian_tail_matches_direct_evaluation() {
        // Ω(0) for the (τ=1000 ns, T₀=360 ns) pulse: Ω₀·exp[−(1000/360)²].
        let omega0 = 0.7;
        let pulse = PulseSpec::Gaussian {
            omega0,
            tau: 1000.0,
            t0: 360.0,
        };
        let expected = omega0 * (-(1000.0f64 / 360.0).powi(2)).exp();
        assert_abs_diff_eq!(pulse.value(0.0), expected, epsilon = 1e-15 * omega0);
        // ≈ 4.4e-4 · Ω₀: the untruncated tail is negligible.
        assert!((pulse.value(0.0) / omega0 - 4.45e-4).abs() < 1e-5);
    }

    #[test]
    fn piecewise_linear_interpolates_and_holds_endpoints() {
        let pulse = PulseSpec::PiecewiseLinear {
            knots: vec![(0.0, 1.0), (10.0, 3.0), (20.0, 0.0)],
        };
        pulse.validate().unwrap();
        assert_abs_diff_eq!(pulse.value(5.0), 2.0);
        assert_abs_diff_eq!(pulse.value(15.0), 1.5);
        assert_eq!(pulse.value(-1.0), 1.0);
        assert_eq!(pulse.value(25.0), 0.0);
    }

    #[test]
    fn pulse_validation_rejects_bad_shapes() {
        assert!(PulseSpec::Gaussian { omega0: 1.0, tau: 0.0, t0: 0.0 }
            .validate()
            .is_err());
        assert!(PulseSpec::LinearRamp { omega_max: -1.0, t_f: 1.0 }
            .validate()
            .is_err());
        assert!(PulseSpec::PiecewiseLinear { knots: vec![(0.0, 1.0), (0.0, 2.0)] }
            .validate()
            .is_err());
        assert!(PulseSpec::PiecewiseLinear { knots: vec![] }.validate().is_err());
    }

    #[test]
    fn hamiltonian_entries_and_zero_case() {
        let params = SystemParams::closed(vec![0.1, 0.2, 0.3], 0.4, 0.25).unwrap();
        let h = build_hamiltonian(&params, 0.6, false);
        assert_eq!(h.dim(), (5, 5));
        assert_abs_diff_eq!(h[[0, 1]].re, 0.3);
        assert_abs_diff_eq!(h[[1, 1]].re, 0.4);
        assert_abs_diff_eq!(h[[1, 3]].re, 0.2);
        assert_abs_diff_eq!(h[[3, 3]].re, 0.15);
        assert_eq!(h[[0, 0]], C64::new(0.0, 0.0));
        assert_eq!(h[[2, 3]], C64::new(0.0, 0.0));
    }

    #[test]
    fn hamiltonian_zero_drive_zero_couplings_is_zero_matrix() {
        let h0 = build_hamiltonian(&params_three_equal(0.0), 0.0, false);
        assert!(h0.iter().all(|v| *v == C64::new(0.0, 0.0)));
        // With couplings back on, only the coupling entries appear.
        let h = build_hamiltonian(&params_three_equal(0.5), 0.0, false);
        assert_eq!(h[[U_INDEX, E_INDEX]], C64::new(0.0, 0.0));
        assert_abs_diff_eq!(h[[E_INDEX, 2]].re, 0.5);
    }

    #[test]
    fn hamiltonian_sink_row_and_column_are_zero() {
        let params = SystemParams::closed(vec![0.1, 0.2], 0.3, 0.3).unwrap();
        let h = build_hamiltonian(&params, 1.0, true);
        assert_eq!(h.dim(), (5, 5));
        let sink = sink_index(2);
        for k in 0..5 {
            assert_eq!(h[[sink, k]], C64::new(0.0, 0.0));
            assert_eq!(h[[k, sink]], C64::new(0.0, 0.0));
        }
    }

    proptest! {
        #[test]
        fn hamiltonian_is_exactly_hermitian(
            n in 1usize..8,
            seed in any::<u64>(),
            delta1 in -2.0f64..2.0,
            delta2 in -2.0f64..2.0,
            omega in 0.0f64..5.0,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let couplings: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let params = SystemParams::closed(couplings, delta1, delta2).unwrap();
            for include_sink in [false, true] {
                let h = build_hamiltonian(&params, omega, include_sink);
                for i in 0..h.nrows() {
                    for j in 0..h.ncols() {
                        prop_assert_eq!(h[[i, j]], h[[j, i]].conj());
                    }
                }
            }
        }

        #[test]
        fn target_w_state_invariant_under_positive_rescaling(
            n in 1usize..8,
            seed in any::<u64>(),
            scale in 1e-3f64..1e3,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let ws: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let a = WStateWeights::new(ws.clone()).unwrap();
            let b = WStateWeights::new(ws.iter().map(|w| w * scale).collect()).unwrap();
            let va = target_w_state(&a, false);
            let vb = target_w_state(&b, false);
            for (x, y) in va.iter().zip(vb.iter()) {
                prop_assert!((x - y).norm() <= 1e-15);
            }
        }
    }

    #[test]
    fn jump_operators_match_rates_and_models() {
        let kappa = 0.8;
        let params = SystemParams::new(
            vec![0.1; 3],
            0.0,
            0.0,
            0.0,
            0.0,
            vec![kappa; 3],
            DecayModel::Split,
        )
        .unwrap();
        let ops = build_jump_operators(&params);
        // γ = γ_φ = 0: exactly the three leakage operators are nonzero, each
        // with the single entry √κ.
        let nonzero: Vec<_> = ops
            .iter()
            .filter(|l| l.iter().any(|v| v.norm() > 0.0))
            .collect();
        assert_eq!(nonzero.len(), 3);
        for (k, l) in nonzero.iter().enumerate() {
            assert_abs_diff_eq!(l[[sink_index(3), mode_index(k + 1)]].re, kappa.sqrt());
            assert_eq!(l.iter().filter(|v| v.norm() > 0.0).count(), 1);
        }
    }

    #[test]
    fn decay_models_share_the_same_total_rate() {
        let gamma = 0.3;
        let gamma_phi = 0.05;
        let build = |model| {
            SystemParams::new(vec![0.1], 0.0, 0.0, gamma, gamma_phi, vec![0.0], model).unwrap()
        };
        let sum_ldl = |params: &SystemParams| {
            let dim = params.open_dim();
            let mut acc = Array2::<C64>::zeros((dim, dim));
            for l in build_jump_operators(params) {
                let ld = l.t().mapv(|v| v.conj());
                acc = acc + ld.dot(&l);
            }
            acc
        };
        let combined = sum_ldl(&build(DecayModel::Combined));
        let split = sum_ldl(&build(DecayModel::Split));
        // Σ L†L restricted to |E⟩⟨E| carries 2γ + γ_φ, and the two decay
        // models agree entrywise.
        assert_abs_diff_eq!(
            combined[[E_INDEX, E_INDEX]].re,
            2.0 * gamma + gamma_phi,
            epsilon = 1e-15
        );
        for (a, b) in combined.iter().zip(split.iter()) {
            assert!((a - b).norm() <= 1e-15);
        }
    }

    #[test]
    fn target_w_state_examples() {
        // Prototype state: equal weights.
        let w = target_w_state(&WStateWeights::new(vec![1.0, 1.0, 1.0]).unwrap(), false);
        let amp = 1.0 / 3f64.sqrt();
        for i in 1..=3 {
            assert_abs_diff_eq!(w[mode_index(i)].re, amp, epsilon = 1e-15);
        }
        assert_eq!(w[U_INDEX], C64::new(0.0, 0.0));

        // Weighted state (1, 1, √2) → (1/2)(|100⟩ + |010⟩ + √2|001⟩).
        let w = target_w_state(
            &WStateWeights::new(vec![1.0, 1.0, 2f64.sqrt()]).unwrap(),
            false,
        );
        assert_abs_diff_eq!(w[mode_index(1)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w[mode_index(3)].re, 2f64.sqrt() / 2.0, epsilon = 1e-15);

        // Two modes give a Bell state.
        let w = target_w_state(&WStateWeights::new(vec![1.0, 1.0]).unwrap(), false);
        assert_abs_diff_eq!(w[mode_index(1)].re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);

        // Unit norm within 1e-12.
        let norm: f64 = w.iter().map(|v| v.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn all_zero_weights_rejected() {
        assert!(WStateWeights::new(vec![0.0, 0.0]).is_err());
        assert!(WStateWeights::new(vec![]).is_err());
        assert!(WStateWeights::new(vec![1.0, -0.5]).is_err());
    }
}
