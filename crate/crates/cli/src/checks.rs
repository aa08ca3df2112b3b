//! Cross-engine checks shared by `validate` and the acceptance suite.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use piston_core::analytic::{
    analytic_series, energy_envelope, g2_instantaneous, g2_time_average, long_time_coefficients,
    long_time_transfer, plateau_coefficients,
};
use piston_core::oracle::{run_scenario, OracleOptions, OracleRun};
use piston_core::response::{
    channel_deviation, response_closed_form_with, response_numeric, sample_parameter_space,
    ForcingSpec,
};
use piston_core::{
    paper_params, validate, Engine, Execution, GasFamily, GasSpec, Observable, ScenarioConfig,
    SystemParams, TimeGrid, TimeSeries,
};

use crate::sweep::{sweep, Axis, Summary};

/// Seed of the random response sample.
pub const RESPONSE_SEED: u64 = 20_240_611;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub achieved: String,
    pub tolerance: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, achieved: String, tolerance: &str, passed: bool) -> Self {
        Check {
            name: name.into(),
            achieved,
            tolerance: tolerance.into(),
            passed,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Closed test system in units of λ: ω_M = 0.3λ, ω = 5λ, m = 1.
pub fn bench_params(g_xzpf: f64) -> SystemParams {
    SystemParams {
        g: 0.0,
        omega: 5.0,
        omega_m: 0.3,
        lambda: 1.0,
        mass: 1.0,
        kappa: 0.0,
        kappa_m: 0.0,
    }
    .with_coupling_zpf(g_xzpf)
}

/// Largest deviation of the closed-form response from the numeric one over
/// the seeded 20-point sample. `perturb_c` is added to the closed-form
/// `c(t)` to exercise the check.
pub fn response_sample_deviation(
    count: usize,
    perturb_c: f64,
    exec: Execution,
) -> anyhow::Result<(f64, SystemParams)> {
    let sample = sample_parameter_space(RESPONSE_SEED, count);
    let devs = exec.try_map(&sample, |p| {
        let t_end = 10.0 * 2.0 * PI / p.omega_m;
        let n = 2001;
        let grid: Vec<f64> = (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect();
        let forcing = ForcingSpec::from_params(p);
        let numeric = response_numeric(p, &forcing, &grid)?;
        let closed: Vec<_> = numeric
            .iter()
            .map(|r| {
                let mut c = response_closed_form_with(p, &forcing, r.t);
                c.c += perturb_c;
                c
            })
            .collect();
        let d = channel_deviation(&closed, &numeric);
        Ok::<_, anyhow::Error>(d.iter().fold(0.0f64, |m, &x| m.max(x)))
    })?;
    let (k, worst) =
        devs.iter().copied().enumerate().fold(
            (0, 0.0f64),
            |(bk, bv), (k, v)| if v > bv { (k, v) } else { (bk, bv) },
        );
    Ok((worst, sample[k]))
}

pub fn response_check(perturb_c: f64, exec: Execution) -> anyhow::Result<Check> {
    let (worst, p) = response_sample_deviation(20, perturb_c, exec)?;
    Ok(Check::new(
        "oscillator response: closed form vs numeric ODE (20-point sample)",
        format!("{worst:.3e}"),
        "<= 1e-8",
        worst <= 1e-8,
    )
    .with_detail(format!(
        "worst point: lambda/omega_m = {:.4e}, kappa/omega_m = {:.4e}, kappa_m/omega_m = {:.4e}",
        p.lambda / p.omega_m,
        p.kappa / p.omega_m,
        p.kappa_m / p.omega_m
    )))
}

/// `(μ, η)` in the quoted closed forms at the experimental parameters.
pub fn experiment_coefficients() -> (f64, f64) {
    let c = long_time_coefficients(&paper_params());
    (c.mu, c.eta)
}

/// Long-time transfer for coherent gases with `n` photons each at `theta`.
pub fn experiment_transfer(n: f64, theta: f64) -> anyhow::Result<f64> {
    let g = GasFamily::Coherent(n);
    Ok(long_time_transfer(
        &paper_params(),
        &GasSpec::vertical(g),
        &GasSpec::new(g, theta),
    )?
    .energy)
}

/// Largest gap between the closed-form time average and a quadrature of
/// the instantaneous correlation over one period, across the 9 gas/angle
/// combinations.
pub fn g2_quadrature_gap() -> anyhow::Result<f64> {
    let mut worst = 0.0f64;
    for family in [
        GasFamily::Fock(1),
        GasFamily::Coherent(1.0),
        GasFamily::Thermal(1.0),
    ] {
        for theta in [0.0, FRAC_PI_4, FRAC_PI_2] {
            // sin² is a trigonometric polynomial: the trapezoid rule on a
            // full period is exact up to round-off.
            let n = 64;
            let mut acc = 0.0;
            for k in 0..n {
                acc += g2_instantaneous(family, theta, 1.0, PI * k as f64 / n as f64)?.g2_lr;
            }
            worst = worst.max((acc / n as f64 - g2_time_average(family, theta)?).abs());
        }
    }
    Ok(worst)
}

/// Options for an oracle/analytic comparison.
#[derive(Debug, Clone, Copy)]
pub struct Comparison {
    pub params: SystemParams,
    pub family: GasFamily,
    pub theta: f64,
    pub n_th: f64,
    pub t_end: f64,
    pub samples: usize,
    pub photon_cutoff: Option<usize>,
    pub phonon_cutoff: Option<usize>,
}

impl Comparison {
    pub fn new(params: SystemParams, family: GasFamily, theta: f64) -> Self {
        Comparison {
            params,
            family,
            theta,
            n_th: 0.0,
            t_end: 6.0 * PI / params.lambda,
            samples: 61,
            photon_cutoff: None,
            phonon_cutoff: None,
        }
    }

    pub fn scenario(&self) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::symmetric(
            "comparison",
            self.params,
            self.family,
            self.theta,
            TimeGrid::new(0.0, self.t_end, self.samples),
        );
        cfg.membrane.n_th = self.n_th;
        cfg.engine = Engine::Both;
        cfg.outputs = Observable::ALL.to_vec();
        cfg.photon_cutoff = self.photon_cutoff;
        cfg.phonon_cutoff = self.phonon_cutoff;
        cfg
    }

    pub fn run(&self, exec: Execution) -> anyhow::Result<Agreement> {
        let scenario = validate(self.scenario())?;
        let analytic = analytic_series(&scenario, exec)?;
        let mut opts = OracleOptions::for_scenario(&scenario);
        opts.exec = exec;
        let oracle = run_scenario(&scenario, &opts)?;
        Ok(Agreement::from_runs(&analytic, &oracle))
    }
}

/// Outcome of an oracle/analytic comparison on one trajectory.
#[derive(Debug, Clone)]
pub struct Agreement {
    /// Max-normalised relative error per compared observable.
    pub delta_h: f64,
    pub g2: f64,
    pub dn_xm: f64,
    /// Largest |oracle ΔH − analytic ΔH|.
    pub delta_h_residual: f64,
    /// Largest |⟨X_M⟩|.
    pub x_m: f64,
    /// Largest relative drift of ⟨N_total⟩ and ⟨H⟩ from their initial values.
    pub n_total_drift: f64,
    pub energy_drift: f64,
    pub dimension: usize,
    pub branches: usize,
}

fn max_rel(oracle: &[f64], analytic: &[f64]) -> f64 {
    let peak = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = oracle
        .iter()
        .zip(analytic)
        .fold(0.0f64, |m, (o, a)| m.max((o - a).abs()));
    if peak > 0.0 {
        diff / peak
    } else {
        diff
    }
}

fn drift(values: &[f64]) -> f64 {
    let v0 = values[0];
    let scale = if v0 != 0.0 { v0.abs() } else { 1.0 };
    values.iter().fold(0.0f64, |m, v| m.max((v - v0).abs())) / scale
}

impl Agreement {
    pub fn from_runs(analytic: &TimeSeries, oracle: &OracleRun) -> Self {
        let col = |s: &TimeSeries, o: Observable| s.get(o).unwrap_or_default().to_vec();
        let o = &oracle.series;
        let dh_o = col(o, Observable::DeltaHm);
        let dh_a = col(analytic, Observable::DeltaHm);
        Agreement {
            delta_h: max_rel(&dh_o, &dh_a),
            g2: max_rel(&col(o, Observable::G2Lr), &col(analytic, Observable::G2Lr)),
            dn_xm: max_rel(&col(o, Observable::DnXm), &col(analytic, Observable::DnXm)),
            delta_h_residual: dh_o
                .iter()
                .zip(&dh_a)
                .fold(0.0f64, |m, (o, a)| m.max((o - a).abs())),
            x_m: col(o, Observable::XM)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs())),
            n_total_drift: drift(&col(o, Observable::NTotal)),
            energy_drift: drift(&col(o, Observable::Energy)),
            dimension: oracle.layout.dimension(),
            branches: oracle.branches,
        }
    }

    pub fn worst_relative(&self) -> f64 {
        self.delta_h.max(self.g2).max(self.dn_xm)
    }

    pub fn worst_conservation(&self) -> f64 {
        self.x_m.max(self.n_total_drift).max(self.energy_drift)
    }
}

/// Oracle ⟨N_L N_R⟩/(⟨N_L⟩⟨N_R⟩) at λt = π/2 for one photon per side,
/// parallel polarisation and no coupling.
pub fn hom_g2(exec: Execution) -> anyhow::Result<f64> {
    let mut c = Comparison::new(bench_params(0.0), GasFamily::Fock(1), 0.0);
    c.t_end = FRAC_PI_2;
    c.samples = 2;
    c.phonon_cutoff = Some(0);
    let scenario = validate(c.scenario())?;
    let mut opts = OracleOptions::for_scenario(&scenario);
    opts.exec = exec;
    let run = run_scenario(&scenario, &opts)?;
    Ok(run.series.get(Observable::G2Lr).unwrap_or_default()[1])
}

/// Oracle − analytic ΔH residual at `g_xzpf` and at half of it.
pub fn order_residuals(g_xzpf: f64, exec: Execution) -> anyhow::Result<(f64, f64)> {
    let run = |g: f64| {
        Comparison::new(bench_params(g), GasFamily::Fock(1), 0.0)
            .run(exec)
            .map(|a| a.delta_h_residual)
    };
    Ok((run(g_xzpf)?, run(0.5 * g_xzpf)?))
}

/// Back-action residual for Fock(1) gases at each membrane temperature.
/// `phonon_cutoff` maps `n_th` to an explicit cutoff (None: automatic).
pub fn backaction_residuals(
    g_xzpf: f64,
    n_th: &[f64],
    t_end: f64,
    phonon_cutoff: impl Fn(f64) -> Option<usize>,
    exec: Execution,
) -> anyhow::Result<Vec<f64>> {
    n_th.iter()
        .map(|&n| {
            let mut c = Comparison::new(bench_params(g_xzpf), GasFamily::Fock(1), 0.0);
            c.n_th = n;
            c.t_end = t_end;
            c.samples = 41;
            c.phonon_cutoff = phonon_cutoff(n);
            c.run(exec).map(|a| a.delta_h_residual)
        })
        .collect()
}

/// Slopes of the long-time transfer against |α|² on [1e2, 1e6]:
/// `(θ-dependent part at θ = 0, total at θ = π/2)`.
pub fn scaling_slopes(exec: Execution) -> anyhow::Result<(f64, f64)> {
    let values: Vec<f64> = (0..9).map(|k| 10f64.powf(2.0 + 0.5 * k as f64)).collect();
    let grid = TimeGrid::new(0.0, 1.0, 2);
    let at = |theta: f64| {
        ScenarioConfig::symmetric(
            "scaling",
            paper_params(),
            GasFamily::Coherent(1.0),
            theta,
            grid,
        )
    };
    let find = |r: &crate::sweep::SweepResult, label: &str| {
        r.slopes
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, s)| *s)
            .ok_or_else(|| anyhow::anyhow!("sweep produced no `{label}`"))
    };
    let s = [Summary::LongTimeTransfer];
    let parallel = sweep(&at(0.0), Axis::MeanN, &values, &s, exec)?;
    let perpendicular = sweep(&at(FRAC_PI_2), Axis::MeanN, &values, &s, exec)?;
    Ok((
        find(&parallel, "loglog_slope_long_time_transfer_theta_part")?,
        find(&perpendicular, "loglog_slope_long_time_transfer")?,
    ))
}

/// Relative gap between the late-time envelope average and the plateau
/// coefficients, for a damped drive with κ_M = 0.
pub fn plateau_gap() -> f64 {
    let p = SystemParams {
        kappa: 0.05,
        ..bench_params(1e-3)
    };
    let plateau = plateau_coefficients(&p);
    // past 40/κ the drive is gone; average over whole membrane periods
    let t0 = 40.0 / p.kappa;
    let period = 2.0 * PI / p.omega_m;
    let n = 4000;
    let (mut u, mut v) = (0.0, 0.0);
    for k in 0..n {
        let e = energy_envelope(&p, t0 + 10.0 * period * k as f64 / n as f64);
        u += e.u / n as f64;
        v += e.v / n as f64;
    }
    ((u - plateau.mu) / plateau.mu)
        .abs()
        .max(((v - plateau.eta) / plateau.eta).abs())
}

/// Quoted μ, η at κ = 0 and at κ = 1e-9·ω_M for the bench system.
pub fn kappa_branches() -> [(f64, f64, f64); 2] {
    let p = bench_params(1e-3);
    [0.0, 1e-9 * p.omega_m].map(|kappa| {
        let c = long_time_coefficients(&SystemParams { kappa, ..p });
        (kappa, c.mu, c.eta)
    })
}
