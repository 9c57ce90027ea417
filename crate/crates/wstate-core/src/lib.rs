//! Simulator for a driven qutrit coupled to N spatially separated resonators:
//! adiabatic generation of arbitrary single-photon N-mode W states inside the
//! resonators (closed-system Schrödinger dynamics along a dark state) and
//! their on-demand emission into transmission lines through resonator
//! dissipation (open-system Lindblad dynamics).
//!
//! The crate is organized around four layers:
//!
//! - [`model`] — system parameters, pump-pulse shapes, the single-excitation
//!   basis, the interaction-picture Hamiltonian, jump operators, target
//!   W states;
//! - [`dynamics`] — Schrödinger and Lindblad integration plus an exact
//!   piecewise-propagator oracle;
//! - [`analysis`] — dark states, the adiabatic gap, fidelities, emission
//!   rates and probabilities, and the mode-number scaling checks;
//! - [`experiments`] — the scenario catalog, 2-D parameter sweeps, and pulse
//!   calibration by grid search.
//!
//! Internally all frequencies and rates are ordinary frequencies in 1/ns and
//! all times are in ns; see [`units`] for the conversions used at
//! configuration boundaries.
//!
//! ```
//! use wstate_core::{
//!     basis_state, evolve_schrodinger, fidelity, target_w_state, uniform_samples,
//!     IntegratorSettings, PulseSpec, SystemParams, WStateWeights,
//! };
//!
//! // Two modes with a 3:4 coupling ratio; resonant drive, lossless.
//! let params = SystemParams::closed(vec![0.03, 0.04], 0.0, 0.0)?;
//! let pulse = PulseSpec::Gaussian { omega0: 0.7, tau: 400.0, t0: 150.0 };
//! let span = (0.0, 400.0);
//! let samples = uniform_samples(span, 401);
//! let initial = basis_state(params.closed_dim(), 0);
//! let traj = evolve_schrodinger(
//!     &params, &pulse, &initial, span, &samples, &IntegratorSettings::default(),
//! )?;
//!
//! // The transfer lands on the W state whose weights are the couplings.
//! let target = target_w_state(&WStateWeights::from_couplings(&params), false);
//! let f = fidelity(traj.final_state(), &target)?;
//! assert!(f > 0.97);
//! # Ok::<(), wstate_core::Error>(())
//! ```

pub mod analysis;
pub mod dynamics;
mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod units;

pub use analysis::{
    adiabatic_fidelity_series, adiabatic_gap, check_lindblad_scaling, check_schrodinger_scaling,
    dark_state, dark_state_family, emission_report, fidelity, ideal_final_fidelity,
    EmissionReport, InvarianceReport,
};
pub use dynamics::{
    basis_density, basis_state, evolve_lindblad, evolve_schrodinger, liouvillian_matrix,
    propagate_density_oracle, propagate_state_oracle, uniform_samples, DensityTrajectory,
    IntegratorSettings, Method, Trajectory, DEFAULT_SAMPLES,
};
pub use error::{Error, Result};
pub use experiments::{
    calibrate_pulse, calibration_spec, catalog, fig6_mode_set, fig6a_scenario, fig6b_scenario,
    run_fig6_family, run_scenario, scenario, sweep2d, sweep_spec, uniform_axis, AxisSpec,
    Calibration, EvolutionMode, Objective, RampBounds, RunBundle, RunOutcome, Scenario,
    ScenarioId, SweepAxis, SweepGrid, SweepSpec,
};
pub use model::{
    build_hamiltonian, build_jump_operators, target_w_state, BasisIndex, DecayModel, PulseSpec,
    SystemParams, WStateWeights,
};
