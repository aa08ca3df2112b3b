//! Initial photon-number moments of the gases.

use crate::error::{Error, Result};
use crate::model::{GasFamily, GasSpec};

/// Single-mode correlation `⟨N(N−1)⟩/⟨N⟩²`, which has no value for an empty gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelfCorrelation {
    Value(f64),
    Vacuum,
}

impl SelfCorrelation {
    pub fn value(self) -> Result<f64> {
        match self {
            SelfCorrelation::Value(v) => Ok(v),
            SelfCorrelation::Vacuum => Err(Error::Vacuum("g_LL(0)")),
        }
    }
}

/// Moments of one gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasMoments {
    /// ⟨N⟩
    pub mean_n: f64,
    /// δN = ⟨N²⟩ − ⟨N⟩²
    pub var_n: f64,
    /// g_LL(0)
    pub g2_self: SelfCorrelation,
}

/// Initial-state moments shared by the two gases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointMoments {
    /// ⟨ΔN(0)²⟩ with ΔN = N_L − N_R; twice the single-gas variance.
    pub delta_n_sq: f64,
    /// ⟨ΔK(0)²⟩ = 2⟨N⟩ + 2⟨N⟩² cos²θ.
    pub delta_k_sq: f64,
    pub cos2_theta: f64,
    pub mean_n: f64,
    pub var_n: f64,
}

impl JointMoments {
    /// `⟨N⟩ + ⟨N⟩² cos²θ`, the distinguishability-dependent weight.
    pub fn overlap_weight(&self) -> f64 {
        self.delta_k_sq / 2.0
    }
}

/// Closed-form moments for each family.
pub fn gas_moments(family: GasFamily) -> GasMoments {
    match family {
        GasFamily::Fock(n) => {
            let mean = n as f64;
            GasMoments {
                mean_n: mean,
                var_n: 0.0,
                g2_self: if n == 0 {
                    SelfCorrelation::Vacuum
                } else {
                    SelfCorrelation::Value(1.0 - 1.0 / mean)
                },
            }
        }
        GasFamily::Coherent(m) => GasMoments {
            mean_n: m,
            var_n: m,
            g2_self: if m > 0.0 {
                SelfCorrelation::Value(1.0)
            } else {
                SelfCorrelation::Vacuum
            },
        },
        GasFamily::Thermal(m) => GasMoments {
            mean_n: m,
            var_n: m + m * m,
            g2_self: if m > 0.0 {
                SelfCorrelation::Value(2.0)
            } else {
                SelfCorrelation::Vacuum
            },
        },
    }
}

/// Joint moments for independent, identically distributed gases with the
/// left gas vertical and the right one at `right.theta`.
pub fn joint_moments(left: &GasSpec, right: &GasSpec) -> Result<JointMoments> {
    if left.family != right.family {
        return Err(Error::DistributionMismatch {
            left: left.family.to_string(),
            right: right.family.to_string(),
        });
    }
    let m = gas_moments(right.family);
    let cos2 = right.theta.cos().powi(2);
    Ok(JointMoments {
        delta_n_sq: 2.0 * m.var_n,
        delta_k_sq: 2.0 * m.mean_n + 2.0 * m.mean_n * m.mean_n * cos2,
        cos2_theta: cos2,
        mean_n: m.mean_n,
        var_n: m.var_n,
    })
}

/// Photon-number probabilities `p(0..=n_max)` with the discarded tail mass.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberDistribution {
    pub probs: Vec<f64>,
    pub tail: f64,
}

impl NumberDistribution {
    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }
}

/// Truncates the family's number distribution at the smallest `n_max` whose
/// tail mass is below `tail`.
pub fn number_distribution(family: GasFamily, tail: f64) -> NumberDistribution {
    match family {
        GasFamily::Fock(n) => {
            let mut probs = vec![0.0; n as usize + 1];
            probs[n as usize] = 1.0;
            NumberDistribution { probs, tail: 0.0 }
        }
        GasFamily::Coherent(m) if m > 0.0 => {
            let ln_m = m.ln();
            let mut ln_p = -m;
            let mut probs = vec![ln_p.exp()];
            let mut total = probs[0];
            let mut n = 0usize;
            // Past the mode, 1 − Σ is the tail; it is accurate to ~1e-16.
            while (1.0 - total) >= tail || (n as f64) < m {
                n += 1;
                ln_p += ln_m - (n as f64).ln();
                let p = ln_p.exp();
                probs.push(p);
                total += p;
            }
            NumberDistribution {
                probs,
                tail: (1.0 - total).max(0.0),
            }
        }
        GasFamily::Thermal(m) if m > 0.0 => {
            let ratio = m / (1.0 + m);
            let mut probs = Vec::new();
            let mut p = 1.0 / (1.0 + m);
            // The tail beyond n is exactly ratio^(n+1).
            let mut remaining = ratio;
            probs.push(p);
            while remaining >= tail {
                p *= ratio;
                probs.push(p);
                remaining *= ratio;
            }
            NumberDistribution {
                probs,
                tail: remaining,
            }
        }
        _ => NumberDistribution {
            probs: vec![1.0],
            tail: 0.0,
        },
    }
}

/// Thermal phonon occupation probabilities, same truncation rule.
pub fn thermal_occupation(n_th: f64, tail: f64) -> NumberDistribution {
    number_distribution(GasFamily::Thermal(n_th), tail)
}
