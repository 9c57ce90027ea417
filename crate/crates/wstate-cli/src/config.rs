//! Strict JSON run configuration and its resolution to a scenario.
//!
//! All frequencies are quoted in the `f/2π MHz` convention (couplings may use
//! the doubled `2g/2π` style instead) and convert to the internal 1/ns rates
//! on resolution; unknown keys are rejected everywhere.

use serde::{Deserialize, Serialize};

use wstate_core::units::{mhz_to_per_ns, two_g_mhz_to_per_ns};
use wstate_core::{
    DecayModel, EvolutionMode, IntegratorSettings, Method, PulseSpec, Scenario, ScenarioId,
    SystemParams, WStateWeights, DEFAULT_SAMPLES,
};

/// A configuration or resolution failure; maps to exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Top-level run configuration: either a catalog scenario reference or an
/// inline system/pulse definition, plus runtime knobs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<EvolutionMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_span_ns: Option<(f64, f64)>,
    /// W-state weights the run is scored against; defaults to the couplings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// System parameters in the MHz quoting convention. Exactly one of the two
/// coupling conventions must be present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "g_over_2pi_MHz", default, skip_serializing_if = "Option::is_none")]
    pub g_over_2pi_mhz: Option<Vec<f64>>,
    #[serde(
        rename = "two_g_over_2pi_MHz",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub two_g_over_2pi_mhz: Option<Vec<f64>>,
    #[serde(rename = "delta1_over_2pi_MHz", default)]
    pub delta1_over_2pi_mhz: f64,
    #[serde(rename = "delta2_over_2pi_MHz", default)]
    pub delta2_over_2pi_mhz: f64,
    #[serde(rename = "gamma_over_2pi_MHz", default)]
    pub gamma_over_2pi_mhz: f64,
    #[serde(rename = "gamma_phi_over_2pi_MHz", default)]
    pub gamma_phi_over_2pi_mhz: f64,
    /// Per-mode leakage rates; defaults to all zero.
    #[serde(rename = "kappa_over_2pi_MHz", default, skip_serializing_if = "Option::is_none")]
    pub kappa_over_2pi_mhz: Option<Vec<f64>>,
    #[serde(default)]
    pub decay_model: DecayModel,
}

/// Pulse shapes in the MHz quoting convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseConfig {
    Gaussian {
        #[serde(rename = "omega0_over_2pi_MHz")]
        omega0_over_2pi_mhz: f64,
        tau_ns: f64,
        t0_ns: f64,
    },
    LinearRamp {
        #[serde(rename = "omega_max_over_2pi_MHz")]
        omega_max_over_2pi_mhz: f64,
        t_f_ns: f64,
    },
    Constant {
        #[serde(rename = "omega_over_2pi_MHz")]
        omega_over_2pi_mhz: f64,
    },
    PiecewiseLinear {
        /// (t in ns, Ω/2π in MHz) knots.
        knots: Vec<(f64, f64)>,
    },
}

impl PulseConfig {
    pub fn to_pulse(&self) -> PulseSpec {
        match self {
            PulseConfig::Gaussian {
                omega0_over_2pi_mhz,
                tau_ns,
                t0_ns,
            } => PulseSpec::Gaussian {
                omega0: mhz_to_per_ns(*omega0_over_2pi_mhz),
                tau: *tau_ns,
                t0: *t0_ns,
            },
            PulseConfig::LinearRamp {
                omega_max_over_2pi_mhz,
                t_f_ns,
            } => PulseSpec::LinearRamp {
                omega_max: mhz_to_per_ns(*omega_max_over_2pi_mhz),
                t_f: *t_f_ns,
            },
            PulseConfig::Constant { omega_over_2pi_mhz } => PulseSpec::Constant {
                omega: mhz_to_per_ns(*omega_over_2pi_mhz),
            },
            PulseConfig::PiecewiseLinear { knots } => PulseSpec::PiecewiseLinear {
                knots: knots
                    .iter()
                    .map(|(t, f)| (*t, mhz_to_per_ns(*f)))
                    .collect(),
            },
        }
    }
}

/// Integrator overrides; anything absent keeps its default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
}

impl IntegratorConfig {
    pub fn to_settings(&self) -> IntegratorSettings {
        let mut settings = IntegratorSettings::default();
        if let Some(rtol) = self.rtol {
            settings.rtol = rtol;
        }
        if let Some(atol) = self.atol {
            settings.atol = atol;
        }
        if let Some(max_step) = self.max_step_ns {
            settings.max_step = max_step;
        }
        if let Some(method) = self.method {
            settings.method = method;
        }
        settings
    }
}

/// A fully resolved run.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub scenario: Scenario,
    pub settings: IntegratorSettings,
    pub workers: Option<usize>,
}

/// Parse the strict JSON configuration text. Syntax errors carry the line
/// and column; semantic errors name the offending field.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    serde_json::from_str(text)
        .map_err(|e| ConfigError(format!("config syntax error at line {}, column {}: {e}", e.line(), e.column())))
}

/// Resolve a parsed configuration into a runnable scenario plus settings.
pub fn resolve(config: &RunConfig) -> Result<Resolved, ConfigError> {
    let settings = config
        .integrator
        .as_ref()
        .map(IntegratorConfig::to_settings)
        .unwrap_or_default();
    settings
        .validate()
        .map_err(|e| ConfigError(format!("field `integrator`: {e}")))?;

    let scenario = match (&config.scenario, &config.system) {
        (Some(_), Some(_)) => {
            return err("field `scenario` excludes an inline `system` definition")
        }
        (Some(id), None) => {
            for (present, name) in [
                (config.pulse.is_some(), "pulse"),
                (config.mode.is_some(), "mode"),
                (config.t_span_ns.is_some(), "t_span_ns"),
                (config.target_weights.is_some(), "target_weights"),
            ] {
                if present {
                    return err(format!("field `scenario` excludes inline field `{name}`"));
                }
            }
            let id: ScenarioId = id
                .parse()
                .map_err(|e| ConfigError(format!("field `scenario`: {e}")))?;
            let mut scenario = wstate_core::scenario(id).ok_or_else(|| {
                ConfigError(format!(
                    "field `scenario`: `{id}` is not directly runnable (use the sweep command)"
                ))
            })?;
            if let Some(samples) = config.samples {
                scenario.samples = samples;
            }
            scenario
        }
        (None, Some(system)) => resolve_inline(config, system)?,
        (None, None) => return err("one of `scenario` or `system` is required"),
    };
    scenario
        .validate()
        .map_err(|e| ConfigError(e.to_string()))?;
    Ok(Resolved {
        scenario,
        settings,
        workers: config.workers,
    })
}

fn resolve_inline(config: &RunConfig, system: &SystemConfig) -> Result<Scenario, ConfigError> {
    let couplings: Vec<f64> = match (&system.g_over_2pi_mhz, &system.two_g_over_2pi_mhz) {
        (Some(_), Some(_)) => {
            return err(
                "unit-convention ambiguity: `g_over_2pi_MHz` and `two_g_over_2pi_MHz` are both present",
            )
        }
        (Some(g), None) => g.iter().map(|f| mhz_to_per_ns(*f)).collect(),
        (None, Some(two_g)) => two_g.iter().map(|f| two_g_mhz_to_per_ns(*f)).collect(),
        (None, None) => {
            return err("field `couplings`: one of `g_over_2pi_MHz` or `two_g_over_2pi_MHz` is required")
        }
    };
    if couplings.is_empty() {
        return err("field `couplings`: at least one mode is required");
    }
    let kappas = system
        .kappa_over_2pi_mhz
        .as_ref()
        .map(|ks| ks.iter().map(|f| mhz_to_per_ns(*f)).collect())
        .unwrap_or_else(|| vec![0.0; couplings.len()]);
    let params = SystemParams::new(
        couplings,
        mhz_to_per_ns(system.delta1_over_2pi_mhz),
        mhz_to_per_ns(system.delta2_over_2pi_mhz),
        mhz_to_per_ns(system.gamma_over_2pi_mhz),
        mhz_to_per_ns(system.gamma_phi_over_2pi_mhz),
        kappas,
        system.decay_model,
    )
    .map_err(|e| ConfigError(e.to_string()))?;

    let pulse = config
        .pulse
        .as_ref()
        .ok_or_else(|| ConfigError("field `pulse` is required for inline definitions".into()))?
        .to_pulse();
    let mode = config
        .mode
        .ok_or_else(|| ConfigError("field `mode` is required for inline definitions".into()))?;
    let t_span = config
        .t_span_ns
        .ok_or_else(|| ConfigError("field `t_span_ns` is required for inline definitions".into()))?;
    let target = match &config.target_weights {
        Some(w) => WStateWeights::new(w.clone()).map_err(|e| ConfigError(e.to_string()))?,
        None => {
            if params.coupling_norm() <= 0.0 {
                return err(
                    "field `target_weights` is required when every coupling is zero",
                );
            }
            WStateWeights::from_couplings(&params)
        }
    };
    Ok(Scenario {
        id: ScenarioId::Custom,
        params,
        pulse,
        t_span,
        mode,
        target,
        samples: config.samples.unwrap_or(DEFAULT_SAMPLES),
    })
}
