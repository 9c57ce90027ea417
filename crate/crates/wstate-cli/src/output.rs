//! Result serialization: plot-ready CSV/JSON tables and the per-run
//! `meta.json` echoing every resolved parameter.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use wstate_core::units::{per_ns_to_mhz, per_ns_to_two_g_mhz};
use wstate_core::{
    DensityTrajectory, EmissionReport, IntegratorSettings, PulseSpec, Scenario, SweepGrid,
    Trajectory,
};

/// Serialize a float with 17 significant digits: enough for bit-exact
/// round-trips through text.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A column-oriented numeric table shared by the CSV and JSON writers.
pub struct Table {
    pub columns: Vec<String>,
    /// Row-major cells; `None` prints as an empty CSV field / JSON null.
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|cell| cell.map(format_float).unwrap_or_default())
                .collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        let value = json!({
            "columns": self.columns,
            "rows": self.rows,
        });
        fs::write(path, serde_json::to_string_pretty(&value).expect("table serializes"))
    }
}

/// Output formats selectable on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn write(self, table: &Table, dir: &Path, stem: &str) -> std::io::Result<PathBuf> {
        let path = dir.join(format!("{stem}.{}", self.extension()));
        match self {
            OutputFormat::Csv => table.write_csv(&path)?,
            OutputFormat::Json => table.write_json(&path)?,
        }
        Ok(path)
    }
}

/// Populations table: `t_ns, P_u, P_e, P_mode_1..N[, P_sink], omega_per_ns`.
pub fn populations_table_closed(traj: &Trajectory, n_modes: usize) -> Table {
    let mut columns = vec!["t_ns".into(), "P_u".into(), "P_e".into()];
    for i in 1..=n_modes {
        columns.push(format!("P_mode_{i}"));
    }
    columns.push("omega_per_ns".into());
    let rows = traj
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut row = vec![Some(t)];
            row.extend((0..n_modes + 2).map(|i| Some(traj.states[k][i].norm_sqr())));
            row.push(Some(traj.pulse_values[k]));
            row
        })
        .collect();
    Table { columns, rows }
}

/// Open-system populations table, with the sink column.
pub fn populations_table_open(traj: &DensityTrajectory, n_modes: usize) -> Table {
    let mut columns = vec!["t_ns".into(), "P_u".into(), "P_e".into()];
    for i in 1..=n_modes {
        columns.push(format!("P_mode_{i}"));
    }
    columns.push("P_sink".into());
    columns.push("omega_per_ns".into());
    let rows = traj
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut row = vec![Some(t)];
            row.extend((0..n_modes + 3).map(|i| Some(traj.rhos[k][[i, i]].re)));
            row.push(Some(traj.pulse_values[k]));
            row
        })
        .collect();
    Table { columns, rows }
}

/// Emission table: `t_ns, rate_1..N_per_ns, cumP_1..N, cumP_total`.
pub fn emission_table(report: &EmissionReport) -> Table {
    let n = report.per_mode_rates.len();
    let mut columns = vec!["t_ns".into()];
    for i in 1..=n {
        columns.push(format!("rate_{i}_per_ns"));
    }
    for i in 1..=n {
        columns.push(format!("cumP_{i}"));
    }
    columns.push("cumP_total".into());
    let rows = report
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut row = vec![Some(t)];
            row.extend(report.per_mode_rates.iter().map(|r| Some(r[k])));
            row.extend(report.per_mode_probabilities.iter().map(|p| Some(p[k])));
            row.push(Some(
                report.per_mode_probabilities.iter().map(|p| p[k]).sum(),
            ));
            row
        })
        .collect();
    Table { columns, rows }
}

/// Long-format sweep table: `axis1, axis2, objective` per grid cell.
pub fn sweep_table(grid: &SweepGrid) -> Table {
    let columns = vec![
        grid.axis1.axis.name().to_string(),
        grid.axis2.axis.name().to_string(),
        "objective".to_string(),
    ];
    let mut rows = Vec::with_capacity(grid.axis1.values.len() * grid.axis2.values.len());
    for (i, &v1) in grid.axis1.values.iter().enumerate() {
        for (j, &v2) in grid.axis2.values.iter().enumerate() {
            rows.push(vec![Some(v1), Some(v2), grid.values[i][j]]);
        }
    }
    Table { columns, rows }
}

/// The MHz-convention view of a scenario's parameters, echoed in metadata.
#[derive(Serialize)]
pub struct ParamsMhzEcho {
    #[serde(rename = "two_g_over_2pi_MHz")]
    pub two_g_over_2pi_mhz: Vec<f64>,
    #[serde(rename = "delta1_over_2pi_MHz")]
    pub delta1_over_2pi_mhz: f64,
    #[serde(rename = "delta2_over_2pi_MHz")]
    pub delta2_over_2pi_mhz: f64,
    #[serde(rename = "gamma_over_2pi_MHz")]
    pub gamma_over_2pi_mhz: f64,
    #[serde(rename = "gamma_phi_over_2pi_MHz")]
    pub gamma_phi_over_2pi_mhz: f64,
    #[serde(rename = "kappa_over_2pi_MHz")]
    pub kappa_over_2pi_mhz: Vec<f64>,
}

impl ParamsMhzEcho {
    pub fn of(scenario: &Scenario) -> Self {
        let p = &scenario.params;
        ParamsMhzEcho {
            two_g_over_2pi_mhz: p.couplings().iter().map(|&g| per_ns_to_two_g_mhz(g)).collect(),
            delta1_over_2pi_mhz: per_ns_to_mhz(p.delta1()),
            delta2_over_2pi_mhz: per_ns_to_mhz(p.delta2()),
            gamma_over_2pi_mhz: per_ns_to_mhz(p.gamma()),
            gamma_phi_over_2pi_mhz: per_ns_to_mhz(p.gamma_phi()),
            kappa_over_2pi_mhz: p.kappas().iter().map(|&k| per_ns_to_mhz(k)).collect(),
        }
    }
}

/// Everything `meta.json` records about a run.
#[derive(Serialize)]
pub struct Meta {
    pub command: String,
    pub scenario: Scenario,
    pub params_mhz: ParamsMhzEcho,
    pub pulse_resolved: PulseSpec,
    pub integrator: IntegratorSettings,
    pub workers: usize,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

impl Meta {
    pub fn new(
        command: &str,
        scenario: &Scenario,
        settings: &IntegratorSettings,
        workers: usize,
        summary: serde_json::Value,
    ) -> Self {
        Meta {
            command: command.to_string(),
            scenario: scenario.clone(),
            params_mhz: ParamsMhzEcho::of(scenario),
            pulse_resolved: scenario.pulse.clone(),
            integrator: *settings,
            workers,
            outputs: Vec::new(),
            summary,
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        );
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("meta.json");
        fs::write(
            &path,
            serde_json::to_string_pretty(self).expect("meta serializes"),
        )?;
        Ok(path)
    }
}
