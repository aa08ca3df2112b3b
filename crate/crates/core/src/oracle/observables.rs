//! Expectation values on truncated states.

use num_complex::Complex64;

use super::layout::ModeLayout;
use super::operator::{build_hamiltonian, SparseOperator};
use super::state::TruncatedState;
use crate::error::{Error, Result};
use crate::model::{Observable, SystemParams};

/// Expectation values of one pure branch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BranchMoments {
    pub n_l: f64,
    pub n_r: f64,
    pub n_l_n_r: f64,
    pub n_total: f64,
    pub phonons: f64,
    pub dn_xm: f64,
    pub x_m: f64,
    pub p_m: f64,
    pub energy: f64,
}

impl BranchMoments {
    fn scaled_add(&mut self, w: f64, o: &BranchMoments) {
        self.n_l += w * o.n_l;
        self.n_r += w * o.n_r;
        self.n_l_n_r += w * o.n_l_n_r;
        self.n_total += w * o.n_total;
        self.phonons += w * o.phonons;
        self.dn_xm += w * o.dn_xm;
        self.x_m += w * o.x_m;
        self.p_m += w * o.p_m;
        self.energy += w * o.energy;
    }

    /// Weighted average over mixture branches.
    pub fn mix<'a>(items: impl IntoIterator<Item = (f64, &'a BranchMoments)>) -> BranchMoments {
        let mut out = BranchMoments::default();
        for (w, m) in items {
            out.scaled_add(w, m);
        }
        out
    }

    /// Value of `obs`; `h_m_initial` is needed for the energy change and
    /// the mixture-level `g2_lr` is formed from the averaged numbers.
    pub fn value(&self, obs: Observable, omega_m: f64, h_m_initial: f64) -> f64 {
        let h_m = omega_m * self.phonons;
        match obs {
            Observable::DeltaHm => h_m - h_m_initial,
            Observable::G2Lr => self.n_l_n_r / (self.n_l * self.n_r),
            Observable::DnXm => self.dn_xm,
            Observable::Hm => h_m,
            Observable::NL => self.n_l,
            Observable::NR => self.n_r,
            Observable::NLNR => self.n_l_n_r,
            Observable::XM => self.x_m,
            Observable::PM => self.p_m,
            Observable::NTotal => self.n_total,
            Observable::Energy => self.energy,
        }
    }
}

/// All branch moments in one sweep over the amplitudes.
///
/// `h_rot` is the Hamiltonian without the `ω N_total` term; the total energy
/// adds it back.
pub fn branch_moments(
    amps: &[Complex64],
    layout: &ModeLayout,
    params: &SystemParams,
    h_rot: &SparseOperator,
) -> BranchMoments {
    let p = layout.phonon_cutoff();
    let xz = params.x_zpf();
    let mut m = BranchMoments::default();
    let mut idx = 0usize;
    // Row-major walk: the phonon index is the fastest.
    let c1 = layout.photon_cutoff() + 1;
    let n_photon_states = c1 * c1 * c1 * c1;
    for ph in 0..n_photon_states {
        let occ = layout.occupations(ph * (p + 1));
        let n_l = (occ[0] + occ[1]) as f64;
        let n_r = (occ[2] + occ[3]) as f64;
        let dn = n_l - n_r;
        let block = &amps[idx..idx + p + 1];
        for (k, a) in block.iter().enumerate() {
            let prob = a.norm_sqr();
            if prob != 0.0 {
                m.n_l += prob * n_l;
                m.n_r += prob * n_r;
                m.n_l_n_r += prob * n_l * n_r;
                m.phonons += prob * k as f64;
            }
            if k < p {
                // ⟨k|... a_k* √(k+1) a_{k+1} is the M contribution at level k.
                let cross = a.conj() * block[k + 1] * ((k + 1) as f64).sqrt();
                // X = x_zpf(M + M†): 2 Re(cross); P = i/(2x_zpf)(M† − M): contributes Im parts.
                let x = 2.0 * cross.re * xz;
                m.x_m += x;
                m.dn_xm += dn * x;
                m.p_m += cross.im / xz;
            }
        }
        idx += p + 1;
    }
    m.n_total = m.n_l + m.n_r;
    m.energy = h_rot.expectation(amps).re + params.omega * m.n_total;
    m
}

/// `⟨O⟩` of a named observable on `state`.
///
/// Accepts `H_M, N_L, N_R, N_L*N_R, dN*X_M, X_M, P_M, N_total, H` and the
/// column names of [`Observable`]. The correlation `g2_lr` is formed from
/// mixture averages; the energy change is relative to the ground state.
pub fn expectation(state: &TruncatedState, params: &SystemParams, name: &str) -> Result<f64> {
    let obs = Observable::from_name(name).ok_or_else(|| Error::UnknownObservable(name.into()))?;
    let layout = state.layout();
    let rot = SystemParams {
        omega: 0.0,
        ..*params
    };
    let h = build_hamiltonian(&rot, layout)?;
    let moments: Vec<BranchMoments> = state
        .branches()
        .iter()
        .map(|b| branch_moments(&b.amplitudes, layout, params, &h))
        .collect();
    let mixed = BranchMoments::mix(state.branches().iter().map(|b| b.weight).zip(&moments));
    Ok(mixed.value(obs, params.omega_m, 0.0))
}
