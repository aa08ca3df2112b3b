//! Single-scenario execution.

use std::path::{Path, PathBuf};

use piston_core::analytic::{analytic_series, plateau_transfer};
use piston_core::config::to_config_string;
use piston_core::oracle::{run_scenario, OracleOptions};
use piston_core::{Engine, Execution, Observable, Result, TimeSeries, ValidatedScenario};

use crate::svg::LineChart;
use crate::table::{fmt_f64, sha256_hex, Table};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub name: String,
    pub table: Table,
    pub chart: LineChart,
    pub warnings: Vec<String>,
}

impl RunOutput {
    /// Writes `<name>.csv` and `<name>.svg`.
    pub fn write(&self, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.name));
        let svg = dir.join(format!("{}.svg", self.name));
        self.table.write(&csv)?;
        std::fs::write(&svg, self.chart.render())?;
        Ok((csv, svg))
    }
}

/// Metadata shared by every table derived from a scenario.
pub fn scenario_metadata(table: &mut Table, scenario: &ValidatedScenario, engine: Engine) {
    let mut cfg = scenario.config().clone();
    cfg.engine = engine;
    let p = cfg.params;
    table.meta("scenario", &cfg.name);
    table.meta("engine", engine.name());
    table.meta("config_sha256", sha256_hex(&to_config_string(&cfg)));
    table.meta("units", "time in s, rates and energies in s^-1 (hbar = 1)");
    for (k, v) in [
        ("g", p.g),
        ("g_xzpf", p.coupling_zpf()),
        ("omega", p.omega),
        ("omega_m", p.omega_m),
        ("lambda", p.lambda),
        ("mass", p.mass),
        ("kappa", p.kappa),
        ("kappa_m", p.kappa_m),
        ("n_th", cfg.membrane.n_th),
    ] {
        table.meta(k, fmt_f64(v));
    }
    table.meta(
        "left_gas",
        format!("{} theta={}", cfg.left.family, fmt_f64(cfg.left.theta)),
    );
    table.meta(
        "right_gas",
        format!("{} theta={}", cfg.right.family, fmt_f64(cfg.right.theta)),
    );
}

fn pick(series: &TimeSeries, obs: Observable) -> Vec<f64> {
    series.get(obs).map(<[f64]>::to_vec).unwrap_or_default()
}

/// Evaluates the scenario with `engine` (which overrides the file's).
pub fn run_scenario_table(
    scenario: &ValidatedScenario,
    engine: Engine,
    exec: Execution,
) -> Result<RunOutput> {
    let cfg = scenario.config();
    let mut table = Table::default();
    let mut warnings = Vec::new();
    scenario_metadata(&mut table, scenario, engine);

    let analytic = if engine.uses_analytic() {
        Some(analytic_series(scenario, exec)?)
    } else {
        None
    };
    let oracle = if engine.uses_oracle() {
        let mut opts = OracleOptions::for_scenario(scenario);
        opts.exec = exec;
        let run = run_scenario(scenario, &opts)?;
        table.meta("photon_cutoff", run.layout.photon_cutoff());
        table.meta("phonon_cutoff", run.layout.phonon_cutoff());
        table.meta("dimension", run.layout.dimension());
        table.meta("branches", run.branches);
        Some(run.series)
    } else {
        None
    };
    if engine.uses_analytic() {
        if let Ok(lt) = plateau_transfer(&cfg.params, &cfg.left, &cfg.right) {
            table.meta("plateau_transfer", fmt_f64(lt.energy));
            if let Some(w) = lt.warning {
                table.meta("warning", &w);
                warnings.push(w);
            }
        }
    }

    let times = scenario.times().to_vec();
    let first = cfg.outputs[0];
    let mut chart = LineChart::new(&cfg.name, "t (s)", first.name());
    table.push("time", times.clone());
    for &obs in &cfg.outputs {
        match (&analytic, &oracle) {
            (Some(a), None) => table.push(obs.name(), pick(a, obs)),
            (None, Some(o)) => table.push(obs.name(), pick(o, obs)),
            (Some(a), Some(o)) => {
                let av = pick(a, obs);
                let ov = pick(o, obs);
                let res = ov.iter().zip(&av).map(|(o, a)| o - a).collect();
                table.push(&format!("{obs}_analytic"), av);
                table.push(&format!("{obs}_oracle"), ov);
                table.push(&format!("{obs}_residual"), res);
            }
            (None, None) => unreachable!("every engine uses at least one backend"),
        }
    }
    let plotted = [
        first.name().to_string(),
        format!("{first}_analytic"),
        format!("{first}_oracle"),
    ];
    for (name, col) in &table.columns {
        if plotted.contains(name) {
            chart.add(name, &times, col);
        }
    }
    Ok(RunOutput {
        name: cfg.name.clone(),
        table,
        chart,
        warnings,
    })
}
