//! Built-in figure scenarios.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use anyhow::bail;
use piston_core::analytic::{
    long_time_coefficients, long_time_transfer, plateau_coefficients, plateau_transfer,
};
use piston_core::{
    paper_params, validate, Engine, Execution, GasFamily, Observable, ScenarioConfig, SystemParams,
    TimeGrid,
};

use crate::checks::{bench_params, hom_g2};
use crate::run::{run_scenario_table, scenario_metadata, RunOutput};
use crate::svg::LineChart;
use crate::table::{fmt_f64, Table};

pub const PRESETS: [&str; 5] = ["fig2", "fig4", "hom", "mu-eta", "backaction"];

const THETAS: [(f64, &str); 3] = [(0.0, "0"), (FRAC_PI_4, "pi_4"), (FRAC_PI_2, "pi_2")];

pub fn preset(name: &str, exec: Execution) -> anyhow::Result<Vec<RunOutput>> {
    match name {
        "fig2" => fig2(exec),
        "fig4" => fig4(exec),
        "hom" => hom(exec),
        "mu-eta" => mu_eta(),
        "backaction" => backaction(exec),
        other => bail!("unknown preset `{other}` ({})", PRESETS.join("|")),
    }
}

/// Runs one scenario per angle and gathers a single observable side by side.
fn theta_family(
    name: &str,
    base: ScenarioConfig,
    obs: Observable,
    engine: Engine,
    thetas: &[(f64, &str)],
    exec: Execution,
) -> anyhow::Result<RunOutput> {
    let mut table = Table::default();
    let mut chart = LineChart::new(name, "t (s)", obs.name());
    let mut warnings = Vec::new();
    for (k, &(theta, label)) in thetas.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.name = name.to_string();
        cfg.right.theta = theta;
        cfg.outputs = vec![obs];
        let scenario = validate(cfg)?;
        let out = run_scenario_table(&scenario, engine, exec)?;
        if k == 0 {
            table.metadata = out
                .table
                .metadata
                .iter()
                .filter(|(key, _)| key != "right_gas" && key != "plateau_transfer")
                .cloned()
                .collect();
            table.meta("right_gas_family", scenario.config().right.family);
            table.push("time", scenario.times().to_vec());
        }
        for (key, v) in &out.table.metadata {
            if key == "plateau_transfer" {
                table.meta(&format!("plateau_transfer_theta_{label}"), v);
            }
        }
        let col_name = format!("{obs}_theta_{label}");
        let col = out.table.column(obs.name()).unwrap_or_default().to_vec();
        chart.add(&format!("theta = {label}"), scenario.times(), &col);
        table.push(&col_name, col);
        warnings.extend(out.warnings);
    }
    warnings.dedup();
    Ok(RunOutput {
        name: name.to_string(),
        table,
        chart,
        warnings,
    })
}

fn fig2(exec: Execution) -> anyhow::Result<Vec<RunOutput>> {
    let grid = TimeGrid::new(0.0, 2.0 * PI, 401);
    [
        ("fig2_fock", GasFamily::Fock(1)),
        ("fig2_coherent", GasFamily::Coherent(1.0)),
        ("fig2_thermal", GasFamily::Thermal(1.0)),
    ]
    .into_iter()
    .map(|(name, family)| {
        let base = ScenarioConfig::symmetric(name, bench_params(1e-3), family, 0.0, grid);
        theta_family(
            name,
            base,
            Observable::G2Lr,
            Engine::Analytic,
            &THETAS,
            exec,
        )
    })
    .collect()
}

fn fig4(exec: Execution) -> anyhow::Result<Vec<RunOutput>> {
    let p = paper_params();
    let family = GasFamily::Coherent(6e6);
    let grid = TimeGrid::new(0.0, 3e-4, 3001);
    let base = ScenarioConfig::symmetric("fig4", p, family, 0.0, grid);
    let mut out = theta_family(
        "fig4",
        base.clone(),
        Observable::DeltaHm,
        Engine::Analytic,
        &THETAS,
        exec,
    )?;
    for &(theta, label) in &THETAS {
        let mut right = base.right;
        right.theta = theta;
        let lt = long_time_transfer(&p, &base.left, &right)?;
        out.table.meta(
            &format!("long_time_transfer_theta_{label}"),
            fmt_f64(lt.energy),
        );
    }
    Ok(vec![out])
}

fn hom(exec: Execution) -> anyhow::Result<Vec<RunOutput>> {
    let grid = TimeGrid::new(0.0, PI, 101);
    let mut base =
        ScenarioConfig::symmetric("hom", bench_params(0.0), GasFamily::Fock(1), 0.0, grid);
    base.phonon_cutoff = Some(0);
    let mut out = theta_family(
        "hom",
        base,
        Observable::G2Lr,
        Engine::Oracle,
        &[(0.0, "0"), (FRAC_PI_2, "pi_2")],
        exec,
    )?;
    out.table
        .meta("g2_lr_at_lambda_t_pi_2", fmt_f64(hom_g2(exec)?));
    Ok(vec![out])
}

fn mu_eta() -> anyhow::Result<Vec<RunOutput>> {
    let base = paper_params();
    let mut kappas = vec![0.0, 1e-9 * base.omega_m];
    kappas.extend((0..=20).map(|k| base.omega_m * 10f64.powf(-3.0 + 0.25 * k as f64)));
    let mut cols: [Vec<f64>; 6] = Default::default();
    for &kappa in &kappas {
        let p = SystemParams { kappa, ..base };
        let q = long_time_coefficients(&p);
        let u = plateau_coefficients(&p);
        for (c, v) in cols
            .iter_mut()
            .zip([kappa, q.mu, q.eta, q.ratio, u.mu, u.eta])
        {
            c.push(v);
        }
    }
    let scenario = validate(ScenarioConfig::symmetric(
        "mu_eta",
        base,
        GasFamily::Coherent(6e6),
        0.0,
        TimeGrid::new(0.0, 1.0, 2),
    ))?;
    let mut table = Table::default();
    scenario_metadata(&mut table, &scenario, Engine::Analytic);
    let cfg = scenario.config();
    table.meta(
        "long_time_transfer",
        fmt_f64(long_time_transfer(&cfg.params, &cfg.left, &cfg.right)?.energy),
    );
    table.meta(
        "plateau_transfer",
        fmt_f64(plateau_transfer(&cfg.params, &cfg.left, &cfg.right)?.energy),
    );
    let names = [
        "kappa",
        "mu_quoted",
        "eta_quoted",
        "ratio_quoted",
        "mu_plateau",
        "eta_plateau",
    ];
    for (n, c) in names.iter().zip(cols.iter()) {
        table.push(n, c.clone());
    }
    let mut chart = LineChart::new(
        "long-time coefficients",
        "kappa (s^-1)",
        "coefficient (s^-1)",
    );
    chart.log_x = true;
    for k in [1, 2, 4, 5] {
        chart.add(names[k], &cols[0], &cols[k]);
    }
    Ok(vec![RunOutput {
        name: "mu_eta".into(),
        table,
        chart,
        warnings: Vec::new(),
    }])
}

/// Phonon cutoff used for the back-action runs: the thermal tail plus
/// room for the displacement.
pub fn backaction_phonon_cutoff(n_th: f64) -> usize {
    let tail = piston_core::statistics::thermal_occupation(n_th, piston_core::oracle::DEFAULT_TAIL);
    tail.n_max() + 24
}

pub const BACKACTION_G_XZPF: f64 = 0.02;
pub const BACKACTION_N_TH: [f64; 3] = [0.0, 5.0, 10.0];

fn backaction(exec: Execution) -> anyhow::Result<Vec<RunOutput>> {
    let grid = TimeGrid::new(0.0, 2.0 * PI, 41);
    let mut table = Table::default();
    let mut chart = LineChart::new(
        "back-action residual",
        "t (s)",
        "delta_h_m oracle - analytic",
    );
    for (k, &n_th) in BACKACTION_N_TH.iter().enumerate() {
        let mut cfg = ScenarioConfig::symmetric(
            "backaction",
            bench_params(BACKACTION_G_XZPF),
            GasFamily::Fock(1),
            0.0,
            grid,
        );
        cfg.membrane.n_th = n_th;
        cfg.phonon_cutoff = Some(backaction_phonon_cutoff(n_th));
        cfg.outputs = vec![Observable::DeltaHm];
        let scenario = validate(cfg)?;
        let out = run_scenario_table(&scenario, Engine::Both, exec)?;
        if k == 0 {
            table.metadata = out
                .table
                .metadata
                .iter()
                .filter(|(key, _)| {
                    !matches!(
                        key.as_str(),
                        "n_th" | "phonon_cutoff" | "dimension" | "branches"
                    )
                })
                .cloned()
                .collect();
            table.push("time", scenario.times().to_vec());
        }
        let label = format!("n_th_{n_th}");
        let res = out
            .table
            .column("delta_h_m_residual")
            .unwrap_or_default()
            .to_vec();
        let max = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        table.meta(&format!("max_residual_{label}"), fmt_f64(max));
        for key in ["phonon_cutoff", "branches"] {
            if let Some((_, v)) = out.table.metadata.iter().find(|(k2, _)| k2 == key) {
                table.meta(&format!("{key}_{label}"), v);
            }
        }
        chart.add(&format!("n_th = {n_th}"), scenario.times(), &res);
        table.push(
            &format!("delta_h_m_oracle_{label}"),
            out.table
                .column("delta_h_m_oracle")
                .unwrap_or_default()
                .to_vec(),
        );
        table.push(&format!("residual_{label}"), res);
    }
    Ok(vec![RunOutput {
        name: "backaction".into(),
        table,
        chart,
        warnings: Vec::new(),
    }])
}
