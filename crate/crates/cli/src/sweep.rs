//! One-dimensional parameter sweeps with scalar summaries.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context};
use piston_core::analytic::{
    analytic_series, bunching_measure, g2_time_average, long_time_transfer, plateau_transfer,
};
use piston_core::oracle::{run_scenario, OracleOptions};
use piston_core::{
    validate, Engine, Execution, GasFamily, Observable, ScenarioConfig, ValidatedScenario,
};

use crate::run::scenario_metadata;
use crate::svg::LineChart;
use crate::table::{fmt_f64, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Theta,
    MeanN,
    G,
    NTh,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Theta => "theta",
            Axis::MeanN => "mean_n",
            Axis::G => "g",
            Axis::NTh => "n_th",
        }
    }

    /// `config` with this axis set to `value`.
    pub fn apply(self, config: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut c = config.clone();
        match self {
            Axis::Theta => c.right.theta = value,
            Axis::MeanN => {
                c.left.family = c.left.family.with_mean(value);
                c.right.family = c.right.family.with_mean(value);
            }
            Axis::G => c.params.g = value,
            Axis::NTh => c.membrane.n_th = value,
        }
        c
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "theta" => Ok(Axis::Theta),
            "mean_n" => Ok(Axis::MeanN),
            "g" => Ok(Axis::G),
            "n_th" => Ok(Axis::NTh),
            other => Err(format!("unknown axis `{other}` (theta|mean_n|g|n_th)")),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Summary {
    /// Long-time transfer with the quoted μ, η closed forms.
    LongTimeTransfer,
    /// Long-time transfer with the plateau of the response envelopes.
    PlateauTransfer,
    /// Time average of ΔH_M over the scenario grid.
    MeanDeltaH,
    G2TimeAverage,
    Bunching,
    /// Largest |ΔH_oracle − ΔH_analytic| on the grid.
    BackactionResidual,
}

impl Summary {
    pub const ALL: [Summary; 6] = [
        Summary::LongTimeTransfer,
        Summary::PlateauTransfer,
        Summary::MeanDeltaH,
        Summary::G2TimeAverage,
        Summary::Bunching,
        Summary::BackactionResidual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Summary::LongTimeTransfer => "long_time_transfer",
            Summary::PlateauTransfer => "plateau_transfer",
            Summary::MeanDeltaH => "mean_delta_h",
            Summary::G2TimeAverage => "g2_time_average",
            Summary::Bunching => "bunching",
            Summary::BackactionResidual => "backaction_residual",
        }
    }

    fn depends_on(self, axis: Axis, engine: Engine) -> bool {
        match (self, axis) {
            (Summary::G2TimeAverage | Summary::Bunching, Axis::G | Axis::NTh) => false,
            (Summary::LongTimeTransfer | Summary::PlateauTransfer, Axis::NTh) => false,
            (Summary::MeanDeltaH, Axis::NTh) => engine == Engine::Oracle,
            _ => true,
        }
    }

    fn is_energy(self) -> bool {
        matches!(
            self,
            Summary::LongTimeTransfer | Summary::PlateauTransfer | Summary::MeanDeltaH
        )
    }

    fn evaluate(self, scenario: &ValidatedScenario, exec: Execution) -> anyhow::Result<f64> {
        let cfg = scenario.config();
        let (p, l, r) = (&cfg.params, &cfg.left, &cfg.right);
        Ok(match self {
            Summary::LongTimeTransfer => long_time_transfer(p, l, r)?.energy,
            Summary::PlateauTransfer => plateau_transfer(p, l, r)?.energy,
            Summary::MeanDeltaH => {
                let dh = if cfg.engine == Engine::Oracle {
                    oracle_delta_h(scenario, exec)?
                } else {
                    analytic_delta_h(scenario, exec)?
                };
                dh.iter().sum::<f64>() / dh.len() as f64
            }
            Summary::G2TimeAverage => g2_time_average(r.family, r.theta)?,
            Summary::Bunching => bunching_measure(r.family, r.theta)?,
            Summary::BackactionResidual => {
                let a = analytic_delta_h(scenario, exec)?;
                let o = oracle_delta_h(scenario, exec)?;
                a.iter()
                    .zip(&o)
                    .fold(0.0f64, |m, (a, o)| m.max((o - a).abs()))
            }
        })
    }
}

impl FromStr for Summary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Summary::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Summary::ALL.iter().map(|x| x.name()).collect();
                format!("unknown summary `{s}` ({})", names.join("|"))
            })
    }
}

fn delta_h_scenario(scenario: &ValidatedScenario) -> anyhow::Result<ValidatedScenario> {
    let mut cfg = scenario.config().clone();
    cfg.outputs = vec![Observable::DeltaHm];
    Ok(validate(cfg)?)
}

fn analytic_delta_h(scenario: &ValidatedScenario, exec: Execution) -> anyhow::Result<Vec<f64>> {
    let s = delta_h_scenario(scenario)?;
    let series = analytic_series(&s, exec)?;
    Ok(series.get(Observable::DeltaHm).unwrap_or_default().to_vec())
}

fn oracle_delta_h(scenario: &ValidatedScenario, exec: Execution) -> anyhow::Result<Vec<f64>> {
    let mut opts = OracleOptions::for_scenario(scenario);
    opts.exec = exec;
    let run = run_scenario(scenario, &opts)?;
    Ok(run
        .series
        .get(Observable::DeltaHm)
        .unwrap_or_default()
        .to_vec())
}

/// `V0:V1:N[:log]`: `N` points from `V0` to `V1`, evenly or geometrically
/// spaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueSpec {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    pub log: bool,
}

impl ValueSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    return self.end;
                }
                let f = k as f64 / last;
                if self.log {
                    (self.start.ln() + f * (self.end.ln() - self.start.ln())).exp()
                } else {
                    self.start + f * (self.end - self.start)
                }
            })
            .collect()
    }
}

impl FromStr for ValueSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let log = match parts.as_slice() {
            [_, _, _] => false,
            [_, _, _, "log"] => true,
            [_, _, _, other] => return Err(format!("unknown spacing `{other}` (only `log`)")),
            _ => return Err(format!("expected V0:V1:N[:log], got `{s}`")),
        };
        let num = |x: &str| {
            x.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{x}` is not a finite number"))
        };
        let start = num(parts[0])?;
        let end = num(parts[1])?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| format!("`{}` is not a point count", parts[2]))?;
        if count == 0 {
            return Err("a sweep needs at least one point".into());
        }
        if count > 1 && start == end {
            return Err("V0 and V1 must differ for a monotone axis".into());
        }
        if log && !(start > 0.0 && end > 0.0) {
            return Err("log spacing needs positive end points".into());
        }
        Ok(ValueSpec {
            start,
            end,
            count,
            log,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    /// Log-log slopes, `(label, slope)`.
    pub slopes: Vec<(String, f64)>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.iter().chain(y).any(|v| v.is_nan() || *v <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn check_axis(
    config: &ScenarioConfig,
    axis: Axis,
    values: &[f64],
    summaries: &[Summary],
) -> anyhow::Result<()> {
    if summaries.is_empty() {
        bail!("at least one summary is required");
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        bail!("axis values must be strictly monotone");
    }
    for s in summaries {
        if !s.depends_on(axis, config.engine) {
            bail!(
                "axis `{axis}` is not applicable to summary `{}` (engine {}): the summary does not depend on it",
                s.name(),
                config.engine.name()
            );
        }
    }
    if axis == Axis::MeanN {
        if let GasFamily::Fock(_) = config.left.family {
            if values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
                bail!("axis `mean_n` on Fock gases needs non-negative integer values");
            }
        }
    }
    Ok(())
}

/// Evaluates every summary at every axis value, points in parallel.
pub fn sweep(
    config: &ScenarioConfig,
    axis: Axis,
    values: &[f64],
    summaries: &[Summary],
    exec: Execution,
) -> anyhow::Result<SweepResult> {
    check_axis(config, axis, values, summaries)?;
    let points = exec.try_map(values, |&v| {
        let scenario = validate(axis.apply(config, v)).with_context(|| format!("{axis} = {v}"))?;
        summaries
            .iter()
            .map(|s| s.evaluate(&scenario, Execution::Sequential))
            .collect::<anyhow::Result<Vec<f64>>>()
    })?;
    let mut columns: Vec<(String, Vec<f64>)> = summaries
        .iter()
        .enumerate()
        .map(|(k, s)| (s.name().to_string(), points.iter().map(|p| p[k]).collect()))
        .collect();

    let mut slopes = Vec::new();
    if axis == Axis::MeanN {
        for (name, col) in columns.clone() {
            if let Some(s) = loglog_slope(values, &col) {
                slopes.push((format!("loglog_slope_{name}"), s));
            }
        }
        if config.right.theta == 0.0 {
            let energy: Vec<Summary> = summaries
                .iter()
                .copied()
                .filter(|s| s.is_energy())
                .collect();
            let mut distinguishable = config.clone();
            distinguishable.right.theta = FRAC_PI_2;
            let base = exec.try_map(values, |&v| {
                let scenario = validate(axis.apply(&distinguishable, v))?;
                energy
                    .iter()
                    .map(|s| s.evaluate(&scenario, Execution::Sequential))
                    .collect::<anyhow::Result<Vec<f64>>>()
            })?;
            for (k, s) in energy.iter().enumerate() {
                let full = &columns[summaries.iter().position(|x| x == s).unwrap_or(0)].1;
                let part: Vec<f64> = full.iter().zip(&base).map(|(f, b)| f - b[k]).collect();
                let label = format!("{}_theta_part", s.name());
                if let Some(slope) = loglog_slope(values, &part) {
                    slopes.push((format!("loglog_slope_{label}"), slope));
                }
                columns.push((label, part));
            }
        }
    }
    Ok(SweepResult {
        axis,
        values: values.to_vec(),
        columns,
        slopes,
    })
}

impl SweepResult {
    pub fn table(&self, config: &ScenarioConfig, spec: &str) -> anyhow::Result<Table> {
        let mut t = Table::default();
        let scenario = validate(config.clone())?;
        scenario_metadata(&mut t, &scenario, config.engine);
        t.meta("axis", self.axis);
        t.meta("values", spec);
        t.push(self.axis.name(), self.values.clone());
        for (name, col) in &self.columns {
            t.push(name, col.clone());
        }
        for (label, s) in &self.slopes {
            t.footer.push((label.clone(), fmt_f64(*s)));
        }
        Ok(t)
    }

    pub fn chart(&self, title: &str, log: bool) -> LineChart {
        let mut c = LineChart::new(title, self.axis.name(), "summary");
        c.log_x = log;
        for (name, col) in &self.columns {
            c.add(name, &self.values, col);
        }
        c
    }
}
