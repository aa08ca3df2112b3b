//! Time series from the exact oracle and automatic cutoff selection.

use num_complex::Complex64;

use super::krylov::{Propagator, DEFAULT_TOL};
use super::layout::{ModeLayout, DEFAULT_DIMENSION_CAP};
use super::observables::{branch_moments, BranchMoments};
use super::operator::build_hamiltonian;
use super::state::{prepare_branches, Branch, PrepareOptions, TruncatedState, DEFAULT_TAIL};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{
    GasFamily, GasSpec, MembraneSpec, Observable, SystemParams, TimeSeries, ValidatedScenario,
};
use crate::statistics::number_distribution;

/// Relative change allowed when the phonon cutoff is doubled.
pub const CUTOFF_STABILITY: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub photon_cutoff: Option<usize>,
    pub phonon_cutoff: Option<usize>,
    pub tol: f64,
    pub dimension_cap: usize,
    pub exec: Execution,
    pub prepare: PrepareOptions,
    /// Keep the evolved state at the last sample time.
    pub keep_final: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            photon_cutoff: None,
            phonon_cutoff: None,
            tol: DEFAULT_TOL,
            dimension_cap: DEFAULT_DIMENSION_CAP,
            exec: Execution::default(),
            prepare: PrepareOptions::default(),
            keep_final: false,
        }
    }
}

impl OracleOptions {
    /// Options taking the cutoffs stored in a scenario.
    pub fn for_scenario(scenario: &ValidatedScenario) -> Self {
        OracleOptions {
            photon_cutoff: scenario.config().photon_cutoff,
            phonon_cutoff: scenario.config().phonon_cutoff,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub layout: ModeLayout,
    /// Every [`Observable`] in [`Observable::ALL`] order.
    pub series: TimeSeries,
    pub branches: usize,
    pub final_state: Option<TruncatedState>,
}

/// Smallest per-mode photon cutoff holding all photons of both gases in one
/// mode with probability `1 − tail`, and at least each gas's own truncation.
pub fn photon_cutoff_for(left: &GasSpec, right: &GasSpec, tail: f64) -> usize {
    let fine = tail * 1e-4;
    let pl = number_distribution(left.family, fine).probs;
    let pr = number_distribution(right.family, fine).probs;
    let mut sum = vec![0.0; pl.len() + pr.len() - 1];
    for (i, a) in pl.iter().enumerate() {
        for (j, b) in pr.iter().enumerate() {
            sum[i + j] += a * b;
        }
    }
    let total: f64 = sum.iter().sum();
    let mut c = sum.len() - 1;
    let mut above = 0.0;
    // Walk down while the mass strictly above c - 1 is still below the tail.
    while c > 0 && above + sum[c] + (1.0 - total) < tail {
        above += sum[c];
        c -= 1;
    }
    let own = number_distribution(left.family, tail)
        .n_max()
        .max(number_distribution(right.family, tail).n_max());
    c.max(own).max(1)
}

/// Starting phonon cutoff for a thermal membrane.
pub fn initial_phonon_cutoff(membrane: &MembraneSpec, tail: f64) -> usize {
    let tail_index = number_distribution(GasFamily::Thermal(membrane.n_th), tail).n_max();
    let rule = (8.0 * (membrane.n_th + 1.0)).ceil() as usize;
    rule.max(tail_index + 8)
}

fn closed_system(params: &SystemParams) -> Result<()> {
    if params.is_closed() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "the exact oracle is closed-system only: set kappa = kappa_m = 0".into(),
        ))
    }
}

/// Evolves the scenario's initial state on `layout` and samples all
/// observables at `times` (non-decreasing, ≥ 0).
pub fn oracle_run(
    scenario: &ValidatedScenario,
    layout: &ModeLayout,
    times: &[f64],
    opts: &OracleOptions,
) -> Result<OracleRun> {
    let cfg = scenario.config();
    let params = cfg.params;
    closed_system(&params)?;
    if times.iter().any(|t| t.is_nan() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid(vec![
            "oracle times must be non-decreasing and >= 0".into(),
        ]));
    }
    // ω N_total commutes with everything and only adds sector phases.
    let rot = SystemParams {
        omega: 0.0,
        ..params
    };
    let h = build_hamiltonian(&rot, layout)?;
    let specs = prepare_branches(&cfg.left, &cfg.right, &cfg.membrane, layout, &opts.prepare)?;

    let per_branch = opts.exec.try_map(&specs, |spec| {
        let mut psi = spec.amplitudes(layout);
        let mut prop = Propagator::new(&h, opts.tol);
        let mut out = Vec::with_capacity(times.len() + 1);
        out.push(branch_moments(&psi, layout, &params, &h));
        let mut now = 0.0;
        for &t in times {
            prop.advance(&mut psi, now, t - now)?;
            now = t;
            out.push(branch_moments(&psi, layout, &params, &h));
        }
        let last = if opts.keep_final { Some(psi) } else { None };
        Ok::<_, Error>((out, last))
    })?;

    let weights: Vec<f64> = specs.iter().map(|s| s.weight).collect();
    let mixed: Vec<BranchMoments> = (0..=times.len())
        .map(|k| {
            BranchMoments::mix(
                weights
                    .iter()
                    .copied()
                    .zip(per_branch.iter().map(|(m, _)| &m[k])),
            )
        })
        .collect();
    let h_m0 = params.omega_m * mixed[0].phonons;
    let columns = Observable::ALL
        .iter()
        .map(|&obs| {
            let col = mixed[1..]
                .iter()
                .map(|m| m.value(obs, params.omega_m, h_m0))
                .collect();
            (obs, col)
        })
        .collect();
    let final_state = if opts.keep_final {
        let branches = weights
            .iter()
            .zip(per_branch)
            .map(|(&weight, (_, psi))| Branch {
                weight,
                amplitudes: psi.unwrap_or_default(),
            })
            .collect();
        Some(TruncatedState::mixture(*layout, branches)?)
    } else {
        None
    };
    Ok(OracleRun {
        layout: *layout,
        series: TimeSeries {
            times: times.to_vec(),
            columns,
        },
        branches: specs.len(),
        final_state,
    })
}

/// Largest relative change between two runs, column by column, each scaled
/// by the column's peak magnitude.
pub fn series_change(a: &TimeSeries, b: &TimeSeries) -> f64 {
    let mut worst = 0.0f64;
    for ((_, ca), (_, cb)) in a.columns.iter().zip(&b.columns) {
        let peak = cb
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = ca
            .iter()
            .zip(cb)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        // Columns that vanish by symmetry only need to stay at round-off.
        let rel = if peak > 1e-12 {
            diff / peak
        } else {
            diff / 1e-12 * CUTOFF_STABILITY
        };
        worst = worst.max(rel);
    }
    worst
}

/// Doubles the phonon cutoff from [`initial_phonon_cutoff`] until the
/// observables change by less than [`CUTOFF_STABILITY`]; returns the run at
/// the accepted cutoff.
pub fn select_phonon_cutoff(
    scenario: &ValidatedScenario,
    photon_cutoff: usize,
    times: &[f64],
    opts: &OracleOptions,
) -> Result<OracleRun> {
    let mut p = initial_phonon_cutoff(&scenario.config().membrane, opts.prepare.tail);
    let layout = |p: usize| ModeLayout::with_cap(photon_cutoff, p, opts.dimension_cap);
    let mut current = oracle_run(scenario, &layout(p)?, times, opts)?;
    loop {
        let doubled = oracle_run(scenario, &layout(2 * p)?, times, opts)?;
        if series_change(&current.series, &doubled.series) < CUTOFF_STABILITY {
            return Ok(current);
        }
        p *= 2;
        current = doubled;
    }
}

/// Runs the oracle on the scenario's own grid, choosing any cutoff the
/// options leave open.
pub fn run_scenario(scenario: &ValidatedScenario, opts: &OracleOptions) -> Result<OracleRun> {
    let cfg = scenario.config();
    closed_system(&cfg.params)?;
    let tail = if opts.prepare.tail > 0.0 {
        opts.prepare.tail
    } else {
        DEFAULT_TAIL
    };
    let c = opts
        .photon_cutoff
        .unwrap_or_else(|| photon_cutoff_for(&cfg.left, &cfg.right, tail));
    let times = scenario.times();
    match opts.phonon_cutoff {
        Some(p) => oracle_run(
            scenario,
            &ModeLayout::with_cap(c, p, opts.dimension_cap)?,
            times,
            opts,
        ),
        None => select_phonon_cutoff(scenario, c, times, opts),
    }
}

/// Plain amplitude vector of a single pure branch, mostly for tests.
pub fn amplitudes_of(state: &TruncatedState) -> Option<&[Complex64]> {
    match state.branches() {
        [b] => Some(&b.amplitudes),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, ScenarioConfig, TimeGrid};
    use std::f64::consts::FRAC_PI_2;

    fn toy(g_xzpf: f64) -> SystemParams {
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

    #[test]
    fn photon_cutoff_rule() {
        let f = GasSpec::vertical(GasFamily::Fock(1));
        assert_eq!(photon_cutoff_for(&f, &f, 1e-8), 2);
        let c = GasSpec::vertical(GasFamily::Coherent(0.5));
        let cut = photon_cutoff_for(&c, &c, 1e-8);
        assert!((10..=11).contains(&cut), "{cut}");
        let v = GasSpec::vertical(GasFamily::Fock(0));
        assert_eq!(photon_cutoff_for(&v, &v, 1e-8), 1);
    }

    #[test]
    fn phonon_start_rule() {
        assert_eq!(initial_phonon_cutoff(&MembraneSpec { n_th: 0.0 }, 1e-8), 8);
        assert!(initial_phonon_cutoff(&MembraneSpec { n_th: 10.0 }, 1e-8) > 193);
    }

    #[test]
    fn hom_zero_and_conservation() {
        let f = GasFamily::Fock(1);
        let mut cfg =
            ScenarioConfig::symmetric("hom", toy(0.0), f, 0.0, TimeGrid::new(0.0, FRAC_PI_2, 5));
        cfg.engine = crate::model::Engine::Oracle;
        let sc = validate(cfg).unwrap();
        let opts = OracleOptions {
            phonon_cutoff: Some(1),
            ..Default::default()
        };
        let run = run_scenario(&sc, &opts).unwrap();
        let g2 = run.series.get(Observable::G2Lr).unwrap();
        assert!(g2[0] == 1.0 && g2[4].abs() < 1e-9, "{g2:?}");
        let e = run.series.get(Observable::Energy).unwrap();
        assert!(e.iter().all(|v| (v - 10.0).abs() < 1e-9));
    }

    #[test]
    fn auto_phonon_cutoff_converges() {
        let f = GasFamily::Fock(1);
        let mut cfg =
            ScenarioConfig::symmetric("auto", toy(1e-2), f, 0.0, TimeGrid::new(0.0, 3.0, 4));
        cfg.engine = crate::model::Engine::Oracle;
        let sc = validate(cfg).unwrap();
        let run = run_scenario(&sc, &OracleOptions::default()).unwrap();
        assert_eq!(run.layout.phonon_cutoff(), 8);
        let x = run.series.get(Observable::XM).unwrap();
        assert!(x.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn damped_scenarios_are_rejected() {
        let f = GasFamily::Fock(1);
        let mut p = toy(1e-3);
        p.kappa = 0.1;
        let cfg = ScenarioConfig::symmetric("d", p, f, 0.0, TimeGrid::new(0.0, 1.0, 3));
        let sc = validate(cfg).unwrap();
        assert!(matches!(
            run_scenario(&sc, &OracleOptions::default()),
            Err(Error::Unsupported(_))
        ));
    }
}
