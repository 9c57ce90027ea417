//! `wstate` — command-line front end for the qutrit–multiresonator W-state
//! simulator: runs catalog or configured scenarios, parameter sweeps, pulse
//! calibrations, and mode-number invariance checks, and writes plot-ready
//! CSV/JSON plus a `meta.json` echo of every resolved parameter.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use wstate_core::units::per_ns_to_mhz;
use wstate_core::{
    calibrate_pulse, calibration_spec, catalog, check_lindblad_scaling,
    check_schrodinger_scaling, fig6_mode_set, fig6a_scenario, fig6b_scenario, run_fig6_family,
    run_scenario, scenario, sweep2d, sweep_spec, uniform_axis, AxisSpec, EvolutionMode,
    IntegratorSettings, PulseSpec, RunOutcome, ScenarioId,
};

mod config;
mod output;

use config::{parse_config, resolve, ConfigError, Resolved};
use output::{
    emission_table, populations_table_closed, populations_table_open, sweep_table, Meta,
    OutputFormat, ParamsMhzEcho,
};

/// Exit codes: 0 success, 1 configuration error, 2 numerical failure.
enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn from_core(e: wstate_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }

    fn io(context: &str, e: std::io::Error) -> Self {
        CliError::Config(format!("{context}: {e}"))
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Numerical(msg) => f.write_str(msg),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "wstate",
    version,
    about = "Simulate adiabatic generation and dissipative emission of single-photon N-mode W states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a closed-system generation scenario and write populations plus a
    /// fidelity summary.
    Simulate(RunArgs),
    /// Run an open-system emission scenario and write populations, per-mode
    /// emission rates and probabilities, plus a summary.
    Emit(RunArgs),
    /// Evaluate a predefined 2-D parameter sweep.
    Sweep(SweepArgs),
    /// Grid-search the drive ramp of a calibrated scenario.
    Calibrate(CalibrateArgs),
    /// Mode-number invariance: run a fig6 family across M and the scaling
    /// checks between its members.
    Invariance(InvarianceArgs),
    /// Print every catalog scenario with its resolved parameters as JSON.
    Catalog,
    /// Print the scenario ids, one per line.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Catalog scenario id (see `wstate list`).
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Strict-JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if absent).
    #[arg(long)]
    out: PathBuf,
    /// Relative tolerance override.
    #[arg(long)]
    rtol: Option<f64>,
    /// Absolute tolerance override.
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Mode count M for the fig6 families.
    #[arg(long)]
    modes: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// `fig5e_sweep` or `fig5f_sweep`.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Worker threads (0 = all cores); WSTATE_WORKERS sets the default.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Grid points per axis.
    #[arg(long, default_value_t = 31)]
    resolution: usize,
}

#[derive(Args)]
struct CalibrateArgs {
    /// A scenario with a calibration spec: fig4_proto, fig4_weighted,
    /// fig5_k400, fig5_k500, or fig6b_emission.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Maximum simulations to spend; defaults to the frozen spec's budget.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct InvarianceArgs {
    /// `fig6a_fidelity` or `fig6b_emission`; both when omitted.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Run every M from 1 to 20 instead of the short set.
    #[arg(long)]
    full: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => run_command(args, EvolutionMode::Closed),
        Command::Emit(args) => run_command(args, EvolutionMode::Open),
        Command::Sweep(args) => sweep_command(args),
        Command::Calibrate(args) => calibrate_command(args),
        Command::Invariance(args) => invariance_command(args),
        Command::Catalog => catalog_command(),
        Command::List => {
            for id in ScenarioId::ALL {
                println!("{id}");
            }
            Ok(())
        }
    }
}

fn default_workers() -> usize {
    std::env::var("WSTATE_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn apply_overrides(
    settings: &mut IntegratorSettings,
    rtol: Option<f64>,
    atol: Option<f64>,
) -> Result<(), CliError> {
    if let Some(rtol) = rtol {
        settings.rtol = rtol;
    }
    if let Some(atol) = atol {
        settings.atol = atol;
    }
    settings.validate().map_err(CliError::from_core)
}

fn parse_id(text: &str) -> Result<ScenarioId, CliError> {
    text.parse().map_err(CliError::from_core)
}

/// Resolve --scenario/--config plus the fig6 --modes selector.
fn resolve_run(args: &RunArgs) -> Result<Resolved, CliError> {
    let mut resolved = match (&args.scenario, &args.config) {
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
        (Some(id_text), None) => {
            let id = parse_id(id_text)?;
            let scenario = match (id, args.modes) {
                (ScenarioId::Fig6aFidelity | ScenarioId::Fig6bEmission, Some(0)) => {
                    return Err(CliError::Config("--modes must be at least 1".into()))
                }
                (ScenarioId::Fig6aFidelity, Some(m)) => fig6a_scenario(m),
                (ScenarioId::Fig6bEmission, Some(m)) => fig6b_scenario(m),
                (_, Some(_)) => {
                    return Err(CliError::Config(format!(
                        "--modes only applies to the fig6 families, not `{id}`"
                    )))
                }
                (_, None) => scenario(id).ok_or_else(|| {
                    CliError::Config(format!(
                        "scenario `{id}` is not directly runnable (use the sweep command)"
                    ))
                })?,
            };
            Resolved {
                scenario,
                settings: IntegratorSettings::default(),
                workers: None,
            }
        }
        (None, Some(path)) => {
            if args.modes.is_some() {
                return Err(CliError::Config(
                    "--modes only applies to --scenario references".into(),
                ));
            }
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::io(&format!("reading {}", path.display()), e))?;
            resolve(&parse_config(&text)?)?
        }
        (None, None) => {
            return Err(CliError::Config(
                "one of --scenario or --config is required".into(),
            ))
        }
    };
    apply_overrides(&mut resolved.settings, args.rtol, args.atol)?;
    Ok(resolved)
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(&format!("creating {}", path.display()), e))
}

fn run_command(args: RunArgs, expected_mode: EvolutionMode) -> Result<(), CliError> {
    let resolved = resolve_run(&args)?;
    let (command, other) = match expected_mode {
        EvolutionMode::Closed => ("simulate", "emit"),
        EvolutionMode::Open => ("emit", "simulate"),
    };
    if resolved.scenario.mode != expected_mode {
        return Err(CliError::Config(format!(
            "scenario `{}` is not a {command} scenario; use `{other}`",
            resolved.scenario.id
        )));
    }
    ensure_dir(&args.out)?;
    let bundle =
        run_scenario(&resolved.scenario, &resolved.settings).map_err(CliError::from_core)?;

    let (table, summary) = match &bundle.outcome {
        RunOutcome::Closed {
            trajectory,
            final_fidelity,
            ideal_fidelity,
            min_adiabatic_fidelity,
        } => (
            populations_table_closed(trajectory, resolved.scenario.params.n_modes()),
            json!({
                "final_fidelity": final_fidelity,
                "ideal_fidelity": ideal_fidelity,
                "min_adiabatic_fidelity": min_adiabatic_fidelity,
            }),
        ),
        RunOutcome::Open {
            trajectory,
            emission,
        } => (
            populations_table_open(trajectory, resolved.scenario.params.n_modes()),
            json!({
                "total_emission_probability": emission.total_probability,
                "per_mode_probabilities": emission
                    .per_mode_probabilities
                    .iter()
                    .map(|p| *p.last().expect("non-empty trajectory"))
                    .collect::<Vec<_>>(),
                "qutrit_loss": emission.qutrit_loss,
            }),
        ),
    };

    let mut meta = Meta::new(
        command,
        &resolved.scenario,
        &resolved.settings,
        resolved.workers.unwrap_or_else(default_workers),
        summary,
    );
    let path = args
        .format
        .write(&table, &args.out, "populations")
        .map_err(|e| CliError::io("writing populations", e))?;
    meta.record_output(&path);
    if let RunOutcome::Open {
        emission: report, ..
    } = &bundle.outcome
    {
        let path = args
            .format
            .write(&emission_table(report), &args.out, "emission")
            .map_err(|e| CliError::io("writing emission", e))?;
        meta.record_output(&path);
    }
    let path = meta.write(&args.out).map_err(|e| CliError::io("writing meta.json", e))?;
    let _ = path;
    Ok(())
}

fn sweep_command(args: SweepArgs) -> Result<(), CliError> {
    let id = parse_id(&args.scenario)?;
    let spec = sweep_spec(id).ok_or_else(|| {
        CliError::Config(format!("scenario `{id}` is not a sweep (try fig5e_sweep or fig5f_sweep)"))
    })?;
    if args.resolution < 1 {
        return Err(CliError::Config("--resolution must be at least 1".into()));
    }
    let remesh = |axis: &AxisSpec| {
        let lo = *axis.values.first().expect("predefined axes are non-empty");
        let hi = *axis.values.last().expect("predefined axes are non-empty");
        uniform_axis(axis.axis, lo, hi, args.resolution)
    };
    let axis1 = remesh(&spec.axis1);
    let axis2 = remesh(&spec.axis2);
    let mut settings = IntegratorSettings::default();
    apply_overrides(&mut settings, args.rtol, args.atol)?;
    let workers = args.workers.unwrap_or_else(default_workers);
    ensure_dir(&args.out)?;

    let grid = sweep2d(&spec.template, &axis1, &axis2, spec.objective, &settings, workers)
        .map_err(CliError::from_core)?;

    let evaluated = grid
        .values
        .iter()
        .flatten()
        .filter(|c| c.is_some())
        .count();
    let summary = json!({
        "objective": grid.objective,
        "argmax": grid.argmax_values().map(|(v1, v2, value)| json!({
            grid.axis1.axis.name(): v1,
            grid.axis2.axis.name(): v2,
            "value": value,
        })),
        "cells": grid.axis1.values.len() * grid.axis2.values.len(),
        "evaluated": evaluated,
    });
    let mut meta = Meta::new("sweep", &spec.template, &settings, workers, summary);
    let path = args
        .format
        .write(&sweep_table(&grid), &args.out, "sweep")
        .map_err(|e| CliError::io("writing sweep", e))?;
    meta.record_output(&path);
    meta.write(&args.out).map_err(|e| CliError::io("writing meta.json", e))?;
    Ok(())
}

fn calibrate_command(args: CalibrateArgs) -> Result<(), CliError> {
    let id = parse_id(&args.scenario)?;
    let (bounds, default_budget) = calibration_spec(id).ok_or_else(|| {
        CliError::Config(format!("scenario `{id}` has no calibration spec"))
    })?;
    let template = scenario(id).ok_or_else(|| {
        CliError::Config(format!("scenario `{id}` is not directly runnable"))
    })?;
    let mut settings = IntegratorSettings::default();
    apply_overrides(&mut settings, args.rtol, args.atol)?;
    let workers = args.workers.unwrap_or_else(default_workers);
    let budget = args.budget.unwrap_or(default_budget);
    ensure_dir(&args.out)?;

    let calibration = calibrate_pulse(&template, bounds, budget, &settings, workers)
        .map_err(CliError::from_core)?;
    let (omega_max, t_f) = match calibration.pulse {
        PulseSpec::LinearRamp { omega_max, t_f } => (omega_max, t_f),
        ref other => {
            return Err(CliError::Numerical(format!(
                "calibration returned a non-ramp pulse {other:?}"
            )))
        }
    };
    let summary = json!({
        "pulse": {
            "linear_ramp": {
                "omega_max_per_ns": omega_max,
                "omega_max_over_2pi_MHz": per_ns_to_mhz(omega_max),
                "t_f_ns": t_f,
            }
        },
        "objective": calibration.objective,
        "evaluations": calibration.evaluations,
        "budget": budget,
        "bounds": bounds,
    });
    let meta = Meta::new("calibrate", &template, &settings, workers, summary.clone());
    fs::write(
        args.out.join("calibration.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )
    .map_err(|e| CliError::io("writing calibration.json", e))?;
    meta.write(&args.out).map_err(|e| CliError::io("writing meta.json", e))?;
    Ok(())
}

fn family_members(args: &InvarianceArgs) -> Result<Vec<ScenarioId>, CliError> {
    match &args.scenario {
        None => Ok(vec![ScenarioId::Fig6aFidelity, ScenarioId::Fig6bEmission]),
        Some(text) => {
            let id = parse_id(text)?;
            if matches!(id, ScenarioId::Fig6aFidelity | ScenarioId::Fig6bEmission) {
                Ok(vec![id])
            } else {
                Err(CliError::Config(format!(
                    "`{id}` is not a fig6 invariance family"
                )))
            }
        }
    }
}

fn invariance_command(args: InvarianceArgs) -> Result<(), CliError> {
    let families = family_members(&args)?;
    let mut settings = IntegratorSettings::default();
    apply_overrides(&mut settings, args.rtol, args.atol)?;
    let workers = args.workers.unwrap_or_else(default_workers);
    let ms = fig6_mode_set(args.full);
    ensure_dir(&args.out)?;

    let mut summaries = serde_json::Map::new();
    let mut outputs = Vec::new();
    for family in families {
        let runs = run_fig6_family(family, &ms, &settings, workers).map_err(CliError::from_core)?;
        let (stem, table, values) = match family {
            ScenarioId::Fig6aFidelity => {
                let values: Vec<f64> = runs
                    .iter()
                    .map(|(_, bundle)| match &bundle.outcome {
                        RunOutcome::Closed { final_fidelity, .. } => *final_fidelity,
                        RunOutcome::Open { .. } => unreachable!(),
                    })
                    .collect();
                let table = output::Table {
                    columns: vec!["m".into(), "final_fidelity".into()],
                    rows: ms
                        .iter()
                        .zip(&values)
                        .map(|(&m, &f)| vec![Some(m as f64), Some(f)])
                        .collect(),
                };
                ("invariance_fidelity", table, values)
            }
            ScenarioId::Fig6bEmission => {
                let values: Vec<f64> = runs
                    .iter()
                    .map(|(_, bundle)| match &bundle.outcome {
                        RunOutcome::Open { emission, .. } => emission.total_probability,
                        RunOutcome::Closed { .. } => unreachable!(),
                    })
                    .collect();
                let table = output::Table {
                    columns: vec![
                        "m".into(),
                        "total_probability".into(),
                        "per_mode_probability".into(),
                    ],
                    rows: ms
                        .iter()
                        .zip(&values)
                        .map(|(&m, &p)| {
                            vec![Some(m as f64), Some(p), Some(p / m as f64)]
                        })
                        .collect(),
                };
                ("invariance_emission", table, values)
            }
            _ => unreachable!("family_members filters"),
        };

        // Scaling-theorem checks of every member against M = 1.
        let reference = ms[0];
        let mut scaling_max = 0.0f64;
        for &m in &ms[1..] {
            let report = match family {
                ScenarioId::Fig6aFidelity => {
                    let a = fig6a_scenario(reference);
                    let b = fig6a_scenario(m);
                    check_schrodinger_scaling(&a.params, &b.params, &a.pulse, a.t_span, &settings)
                }
                ScenarioId::Fig6bEmission => {
                    let a = fig6b_scenario(reference);
                    let b = fig6b_scenario(m);
                    check_lindblad_scaling(&a.params, &b.params, &a.pulse, a.t_span, &settings)
                }
                _ => unreachable!(),
            }
            .map_err(CliError::from_core)?;
            scaling_max = scaling_max.max(report.max_deviation());
        }

        let spread = values
            .iter()
            .flat_map(|a| values.iter().map(move |b| (a - b).abs()))
            .fold(0.0, f64::max);
        let path = args
            .format
            .write(&table, &args.out, stem)
            .map_err(|e| CliError::io("writing invariance table", e))?;
        outputs.push(path);
        summaries.insert(
            family.to_string(),
            json!({
                "modes": ms,
                "values": values,
                "max_pairwise_difference": spread,
                "max_scaling_deviation": scaling_max,
            }),
        );
    }

    let template = match family_members(&args)?[0] {
        ScenarioId::Fig6bEmission => fig6b_scenario(ms[0]),
        _ => fig6a_scenario(ms[0]),
    };
    let mut meta = Meta::new(
        "invariance",
        &template,
        &settings,
        workers,
        serde_json::Value::Object(summaries),
    );
    for path in &outputs {
        meta.record_output(path);
    }
    meta.write(&args.out).map_err(|e| CliError::io("writing meta.json", e))?;
    Ok(())
}

fn catalog_command() -> Result<(), CliError> {
    let mut entries = Vec::new();
    for s in catalog() {
        entries.push(json!({
            "id": s.id,
            "kind": "scenario",
            "scenario": s,
            "params_mhz": ParamsMhzEcho::of(&s),
        }));
    }
    for id in [ScenarioId::Fig5eSweep, ScenarioId::Fig5fSweep] {
        let spec = sweep_spec(id).expect("predefined sweep");
        entries.push(json!({
            "id": id,
            "kind": "sweep",
            "template": spec.template.id,
            "objective": spec.objective,
            "axis1": spec.axis1,
            "axis2": spec.axis2,
        }));
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&entries).expect("catalog serializes")
    );
    Ok(())
}
