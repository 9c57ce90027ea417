//! 2-D parameter sweeps over scenario templates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::IntegratorSettings;
use crate::error::{Error, Result};
use crate::experiments::{run_scenario, RunOutcome, Scenario};
use crate::model::PulseSpec;
use crate::units::{mhz_to_per_ns, two_g_mhz_to_per_ns};

/// Which scenario parameter an axis varies. Axis values are quoted in the
/// configuration convention (MHz), converted on application.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Every coupling set to the axis value, read as 2g/2π in MHz.
    CouplingAll,
    /// Pulse amplitude (ramp Ω_max, Gaussian Ω₀, or constant Ω), read as
    /// Ω/2π in MHz.
    OmegaMax,
    /// Pump detuning Δ₁/2π in MHz.
    Delta1,
    /// Resonator detuning Δ₂/2π in MHz.
    Delta2,
}

impl SweepAxis {
    /// Column name used in serialized sweep output.
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::CouplingAll => "two_g_over_2pi_MHz",
            SweepAxis::OmegaMax => "omega_max_over_2pi_MHz",
            SweepAxis::Delta1 => "delta1_over_2pi_MHz",
            SweepAxis::Delta2 => "delta2_over_2pi_MHz",
        }
    }

    pub fn unit(self) -> &'static str {
        "MHz"
    }

    fn apply(self, scenario: &Scenario, value_mhz: f64) -> Result<Scenario> {
        let mut out = scenario.clone();
        match self {
            SweepAxis::CouplingAll => {
                let g = two_g_mhz_to_per_ns(value_mhz);
                out.params = out.params.with_couplings(vec![g; out.params.n_modes()])?;
            }
            SweepAxis::OmegaMax => {
                let omega = mhz_to_per_ns(value_mhz);
                out.pulse = match out.pulse {
                    PulseSpec::LinearRamp { t_f, .. } => PulseSpec::LinearRamp {
                        omega_max: omega,
                        t_f,
                    },
                    PulseSpec::Gaussian { tau, t0, .. } => PulseSpec::Gaussian {
                        omega0: omega,
                        tau,
                        t0,
                    },
                    PulseSpec::Constant { .. } => PulseSpec::Constant { omega },
                    PulseSpec::PiecewiseLinear { .. } => {
                        return Err(Error::InvalidParams {
                            field: "axis",
                            reason: "omega_max axis cannot rescale a piecewise-linear pulse"
                                .into(),
                        })
                    }
                };
            }
            SweepAxis::Delta1 => {
                let d = mhz_to_per_ns(value_mhz);
                out.params = out.params.with_detunings(d, out.params.delta2())?;
            }
            SweepAxis::Delta2 => {
                let d = mhz_to_per_ns(value_mhz);
                out.params = out.params.with_detunings(out.params.delta1(), d)?;
            }
        }
        Ok(out)
    }
}

/// One sweep axis: the varied parameter and its grid values (in the axis
/// unit).
#[derive(Clone, Debug, Serialize)]
pub struct AxisSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// What a sweep cell is scored by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Total emission probability at the scenario horizon (open scenarios).
    EmissionProbability,
    /// |⟨ψ(t₁)|g,W⟩|² against the scenario target (closed scenarios).
    FinalFidelity,
}

/// Result of a 2-D sweep: the objective at every grid cell plus the argmax.
#[derive(Clone, Debug, Serialize)]
pub struct SweepGrid {
    pub axis1: AxisSpec,
    pub axis2: AxisSpec,
    pub objective: Objective,
    /// `values[i][j]` is the objective at (axis1\[i], axis2\[j]); `None`
    /// records a per-cell failure.
    pub values: Vec<Vec<Option<f64>>>,
    /// Indices and value of the maximizing cell; ties break toward smaller
    /// axis values, axis1 first. `None` only if every cell failed.
    pub argmax: Option<(usize, usize, f64)>,
}

impl SweepGrid {
    /// Axis values at the argmax cell.
    pub fn argmax_values(&self) -> Option<(f64, f64, f64)> {
        self.argmax
            .map(|(i, j, v)| (self.axis1.values[i], self.axis2.values[j], v))
    }
}

fn objective_of(outcome: &RunOutcome, objective: Objective) -> Result<f64> {
    match (objective, outcome) {
        (Objective::EmissionProbability, RunOutcome::Open { emission, .. }) => {
            Ok(emission.total_probability)
        }
        (Objective::FinalFidelity, RunOutcome::Closed { final_fidelity, .. }) => {
            Ok(*final_fidelity)
        }
        (Objective::EmissionProbability, RunOutcome::Closed { .. }) => {
            Err(Error::InvalidParams {
                field: "objective",
                reason: "emission probability needs an open-system template".into(),
            })
        }
        (Objective::FinalFidelity, RunOutcome::Open { .. }) => Err(Error::InvalidParams {
            field: "objective",
            reason: "final fidelity needs a closed-system template".into(),
        }),
    }
}

/// Evaluate `objective` on every (axis1, axis2) grid cell of the template.
///
/// Cells run independently (in parallel across `workers` threads; 0 uses the
/// global pool) and deterministically; per-cell failures become `None`
/// entries rather than failing the sweep. The objective/mode combination is
/// checked up front on the template itself.
pub fn sweep2d(
    template: &Scenario,
    axis1: &AxisSpec,
    axis2: &AxisSpec,
    objective: Objective,
    settings: &IntegratorSettings,
    workers: usize,
) -> Result<SweepGrid> {
    if axis1.values.is_empty() || axis2.values.is_empty() {
        return Err(Error::EmptyDomain("sweep axes must be non-empty"));
    }
    template.validate()?;
    match (objective, template.mode) {
        (Objective::EmissionProbability, crate::experiments::EvolutionMode::Open)
        | (Objective::FinalFidelity, crate::experiments::EvolutionMode::Closed) => {}
        _ => {
            return Err(Error::InvalidParams {
                field: "objective",
                reason: "objective does not match the template's evolution mode".into(),
            })
        }
    }

    let cells: Vec<(usize, usize)> = (0..axis1.values.len())
        .flat_map(|i| (0..axis2.values.len()).map(move |j| (i, j)))
        .collect();
    let evaluate = |&(i, j): &(usize, usize)| -> Option<f64> {
        let cell = axis1
            .axis
            .apply(template, axis1.values[i])
            .and_then(|s| axis2.axis.apply(&s, axis2.values[j]));
        let scenario = match cell {
            Ok(s) => s,
            Err(_) => return None,
        };
        run_scenario(&scenario, settings)
            .ok()
            .and_then(|bundle| objective_of(&bundle.outcome, objective).ok())
    };
    let flat: Vec<Option<f64>> = if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParams {
                field: "workers",
                reason: e.to_string(),
            })?;
        pool.install(|| cells.par_iter().map(evaluate).collect())
    } else {
        cells.par_iter().map(evaluate).collect()
    };

    let n2 = axis2.values.len();
    let values: Vec<Vec<Option<f64>>> = flat.chunks(n2).map(|row| row.to_vec()).collect();

    let mut argmax: Option<(usize, usize, f64)> = None;
    for (i, row) in values.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let Some(v) = *cell else { continue };
            let better = match argmax {
                None => true,
                Some((bi, bj, bv)) => {
                    v > bv
                        || (v == bv
                            && (axis1.values[i], axis2.values[j])
                                < (axis1.values[bi], axis2.values[bj]))
                }
            };
            if better {
                argmax = Some((i, j, v));
            }
        }
    }

    Ok(SweepGrid {
        axis1: axis1.clone(),
        axis2: axis2.clone(),
        objective,
        values,
        argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{scenario, uniform_axis, ScenarioId};

    fn short_template() -> Scenario {
        let mut s = scenario(ScenarioId::Fig5K200).unwrap();
        s.t_span = (0.0, 10.0);
        s.samples = 101;
        s
    }

    #[test]
    fn one_by_one_grid_equals_run_scenario() {
        let template = short_template();
        let axis1 = uniform_axis(SweepAxis::CouplingAll, 100.0, 100.0, 1);
        let axis2 = uniform_axis(SweepAxis::OmegaMax, 190.0, 190.0, 1);
        let settings = IntegratorSettings::default();
        let grid = sweep2d(
            &template,
            &axis1,
            &axis2,
            Objective::EmissionProbability,
            &settings,
            1,
        )
        .unwrap();
        let direct = run_scenario(&template, &settings).unwrap();
        let (_, _, v) = grid.argmax.unwrap();
        assert_eq!(v.to_bits(), direct.outcome.objective().to_bits());
    }

    #[test]
    fn ties_break_toward_smaller_axis_values() {
        // Degenerate axes make every cell identical; the tie must resolve to
        // the smallest axis values.
        let template = short_template();
        let axis1 = uniform_axis(SweepAxis::Delta1, 0.0, 0.0, 2);
        let axis2 = uniform_axis(SweepAxis::Delta2, 0.0, 0.0, 2);
        let out = sweep2d(
            &template,
            &axis1,
            &axis2,
            Objective::EmissionProbability,
            &IntegratorSettings::default(),
            1,
        )
        .unwrap();
        assert_eq!(out.argmax.unwrap().0, 0);
        assert_eq!(out.argmax.unwrap().1, 0);
    }

    #[test]
    fn failing_cells_become_missing_values() {
        // A negative coupling value is rejected by the parameter validator;
        // the cell records as missing and the argmax skips it.
        let template = short_template();
        let axis1 = AxisSpec {
            axis: SweepAxis::CouplingAll,
            values: vec![-50.0, 100.0],
        };
        let axis2 = uniform_axis(SweepAxis::Delta1, 0.0, 0.0, 1);
        let grid = sweep2d(
            &template,
            &axis1,
            &axis2,
            Objective::EmissionProbability,
            &IntegratorSettings::default(),
            1,
        )
        .unwrap();
        assert_eq!(grid.values[0][0], None);
        assert!(grid.values[1][0].is_some());
        assert_eq!(grid.argmax.unwrap().0, 1);
    }

    #[test]
    fn objective_mode_mismatch_rejected() {
        let template = short_template();
        let axis = uniform_axis(SweepAxis::Delta1, 0.0, 0.0, 1);
        let err = sweep2d(
            &template,
            &axis,
            &axis.clone(),
            Objective::FinalFidelity,
            &IntegratorSettings::default(),
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParams { field: "objective", .. }));
    }

    #[test]
    fn empty_axis_rejected() {
        let template = short_template();
        let empty = AxisSpec {
            axis: SweepAxis::Delta1,
            values: vec![],
        };
        let full = uniform_axis(SweepAxis::Delta2, 0.0, 0.0, 1);
        assert!(matches!(
            sweep2d(
                &template,
                &empty,
                &full,
                Objective::EmissionProbability,
                &IntegratorSettings::default(),
                1,
            ),
            Err(Error::EmptyDomain(_))
        ));
    }
}
