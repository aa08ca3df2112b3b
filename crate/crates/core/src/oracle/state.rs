//! Truncated initial states: pure product states or finite mixtures of them.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::layout::ModeLayout;
use crate::error::{Error, Result};
use crate::model::{GasFamily, GasSpec, MembraneSpec};
use crate::statistics::number_distribution;

/// Tail mass allowed when truncating a number distribution.
pub const DEFAULT_TAIL: f64 = 1e-8;

/// Mixture weight that may be discarded by dropping the lightest branches.
const PRUNE_BUDGET: f64 = 1e-9;

/// How the phase of a coherent right gas relative to the left one is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoherentPhase {
    /// Uniform average over the relative phase, realised exactly as a mixture
    /// over `n_max + 1` equally spaced phases.
    #[default]
    Averaged,
    /// Both amplitudes real and positive.
    Locked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub amplitudes: Vec<Complex64>,
}

/// State vector(s) over a [`ModeLayout`]; a single branch is a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    layout: ModeLayout,
    branches: Vec<Branch>,
}

impl TruncatedState {
    pub fn pure(layout: ModeLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::mixture(
            layout,
            vec![Branch {
                weight: 1.0,
                amplitudes,
            }],
        )
    }

    pub fn mixture(layout: ModeLayout, branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::Invalid(vec![
                "a state needs at least one branch".into()
            ]));
        }
        if let Some(b) = branches
            .iter()
            .find(|b| b.amplitudes.len() != layout.dimension())
        {
            return Err(Error::Invalid(vec![format!(
                "branch has {} amplitudes, layout dimension is {}",
                b.amplitudes.len(),
                layout.dimension()
            )]));
        }
        Ok(TruncatedState { layout, branches })
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branches_mut(&mut self) -> &mut [Branch] {
        &mut self.branches
    }

    pub fn into_branches(self) -> Vec<Branch> {
        self.branches
    }

    pub fn is_mixture(&self) -> bool {
        self.branches.len() > 1
    }

    /// Largest deviation from unit norm (per branch) or unit total weight.
    pub fn normalisation_defect(&self) -> f64 {
        let w: f64 = self.branches.iter().map(|b| b.weight).sum();
        self.branches
            .iter()
            .map(|b| (norm(&b.amplitudes) - 1.0).abs())
            .fold((w - 1.0).abs(), f64::max)
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// One gas in a definite pure state: `(n_V, n_H, amplitude)` triples.
type Factor = Vec<(usize, usize, Complex64)>;

/// Recipe for one pure branch of a prepared state.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSpec {
    pub weight: f64,
    left: Factor,
    right: Factor,
    phonons: usize,
}

impl BranchSpec {
    pub fn phonons(&self) -> usize {
        self.phonons
    }

    pub fn amplitudes(&self, layout: &ModeLayout) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); layout.dimension()];
        for &(lv, lh, a) in &self.left {
            for &(rv, rh, b) in &self.right {
                out[layout.index([lv, lh, rv, rh, self.phonons])] += a * b;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrepareOptions {
    pub tail: f64,
    pub phase: CoherentPhase,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            tail: DEFAULT_TAIL,
            phase: CoherentPhase::Averaged,
        }
    }
}

fn binomial_sqrt(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.sqrt()
}

/// `|n⟩` in the mode `cos θ V + sin θ H`.
fn rotated_fock(n: usize, theta: f64, scale: Complex64) -> Factor {
    let (c, s) = (theta.cos(), theta.sin());
    (0..=n)
        .filter_map(|k| {
            let a = binomial_sqrt(n, k) * c.powi(k as i32) * s.powi((n - k) as i32);
            (a != 0.0).then(|| (k, n - k, scale * a))
        })
        .collect()
}

fn fold_factor(parts: Factor) -> Factor {
    let mut parts = parts;
    parts.sort_by_key(|p| (p.0, p.1));
    let mut out: Factor = Vec::with_capacity(parts.len());
    for (v, h, a) in parts {
        match out.last_mut() {
            Some(last) if last.0 == v && last.1 == h => last.2 += a,
            _ => out.push((v, h, a)),
        }
    }
    out
}

/// Truncated distribution that must fit under `cutoff`.
fn fitted_distribution(
    family: GasFamily,
    cutoff: usize,
    tail: f64,
    what: &str,
) -> Result<Vec<f64>> {
    let dist = number_distribution(family, tail);
    if dist.n_max() <= cutoff {
        return Ok(dist.probs);
    }
    let kept: f64 = dist.probs[..=cutoff].iter().sum();
    let missing = match family {
        GasFamily::Fock(_) => 1.0,
        _ => (1.0 - kept).max(dist.tail),
    };
    if missing < tail {
        Ok(dist.probs[..=cutoff].to_vec())
    } else {
        Err(Error::InsufficientCutoff {
            what: what.to_string(),
            cutoff,
            tail: missing,
            tolerance: tail,
        })
    }
}

/// Weighted pure factors for one gas.
fn gas_factors(
    gas: &GasSpec,
    cutoff: usize,
    opts: &PrepareOptions,
    phases: usize,
    what: &str,
) -> Result<Vec<(f64, Factor)>> {
    let one = Complex64::new(1.0, 0.0);
    match gas.family {
        GasFamily::Fock(n) => {
            fitted_distribution(gas.family, cutoff, opts.tail, what)?;
            Ok(vec![(1.0, rotated_fock(n as usize, gas.theta, one))])
        }
        GasFamily::Thermal(_) => {
            let probs = fitted_distribution(gas.family, cutoff, opts.tail, what)?;
            Ok(probs
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(n, &p)| (p, rotated_fock(n, gas.theta, one)))
                .collect())
        }
        GasFamily::Coherent(mean) => {
            let probs = fitted_distribution(gas.family, cutoff, opts.tail, what)?;
            let total: f64 = probs.iter().sum();
            let alpha = mean.sqrt();
            let mut out = Vec::with_capacity(phases);
            for k in 0..phases {
                let phi = 2.0 * PI * k as f64 / phases as f64;
                let mut parts = Vec::new();
                let mut c = (-0.5 * mean).exp() / total.sqrt();
                for n in 0..probs.len() {
                    if n > 0 {
                        c *= alpha / (n as f64).sqrt();
                    }
                    let phase = Complex64::from_polar(c, phi * n as f64);
                    parts.extend(rotated_fock(n, gas.theta, phase));
                }
                out.push((1.0 / phases as f64, fold_factor(parts)));
            }
            Ok(out)
        }
    }
}

/// Truncation index of a coherent gas at the given tail.
fn coherent_n_max(gas: &GasSpec, cutoff: usize, tail: f64) -> usize {
    number_distribution(gas.family, tail).n_max().min(cutoff)
}

/// Branch recipes for the product of both gases and the membrane.
pub fn prepare_branches(
    left: &GasSpec,
    right: &GasSpec,
    membrane: &MembraneSpec,
    layout: &ModeLayout,
    opts: &PrepareOptions,
) -> Result<Vec<BranchSpec>> {
    let c = layout.photon_cutoff();
    let right_phases = match (right.family, opts.phase) {
        (GasFamily::Coherent(m), CoherentPhase::Averaged) if m > 0.0 => {
            coherent_n_max(right, c, opts.tail) + 1
        }
        _ => 1,
    };
    let lf = gas_factors(left, c, opts, 1, "left gas")?;
    let rf = gas_factors(right, c, opts, right_phases, "right gas")?;
    let phonon = fitted_distribution(
        GasFamily::Thermal(membrane.n_th),
        layout.phonon_cutoff(),
        opts.tail,
        "membrane thermal state",
    )?;

    let mut specs = Vec::new();
    for (wm, &pm) in phonon.iter().enumerate() {
        if pm == 0.0 {
            continue;
        }
        for (wl, fl) in &lf {
            for (wr, fr) in &rf {
                specs.push(BranchSpec {
                    weight: pm * wl * wr,
                    left: fl.clone(),
                    right: fr.clone(),
                    phonons: wm,
                });
            }
        }
    }
    prune(&mut specs);
    let total: f64 = specs.iter().map(|s| s.weight).sum();
    for s in &mut specs {
        s.weight /= total;
    }
    Ok(specs)
}

/// Drops the lightest branches while their combined weight stays under the budget.
fn prune(specs: &mut Vec<BranchSpec>) {
    if specs.len() < 2 {
        return;
    }
    let mut order: Vec<usize> = (0..specs.len()).collect();
    order.sort_by(|&a, &b| specs[a].weight.total_cmp(&specs[b].weight));
    let mut dropped = 0.0;
    let mut keep = vec![true; specs.len()];
    for &k in &order[..order.len() - 1] {
        if dropped + specs[k].weight > PRUNE_BUDGET {
            break;
        }
        dropped += specs[k].weight;
        keep[k] = false;
    }
    let mut k = 0;
    specs.retain(|_| {
        k += 1;
        keep[k - 1]
    });
}

/// Product state of the two gases and the membrane with default options.
pub fn prepare_state(
    left: &GasSpec,
    right: &GasSpec,
    membrane: &MembraneSpec,
    layout: &ModeLayout,
) -> Result<TruncatedState> {
    prepare_state_with(left, right, membrane, layout, &PrepareOptions::default())
}

pub fn prepare_state_with(
    left: &GasSpec,
    right: &GasSpec,
    membrane: &MembraneSpec,
    layout: &ModeLayout,
    opts: &PrepareOptions,
) -> Result<TruncatedState> {
    let specs = prepare_branches(left, right, membrane, layout, opts)?;
    let branches = specs
        .iter()
        .map(|s| Branch {
            weight: s.weight,
            amplitudes: s.amplitudes(layout),
        })
        .collect();
    TruncatedState::mixture(*layout, branches)
}
