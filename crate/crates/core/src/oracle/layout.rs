//! Occupation-number basis of the five modes.

use crate::error::{Error, Result};

/// Default upper bound on the basis dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 2_000_000;

/// Mode order used for indexing and in state dumps.
pub const MODE_NAMES: [&str; 5] = ["L_V", "L_H", "R_V", "R_H", "M"];

/// Per-mode occupation cutoffs; the basis is row-major over
/// `(L_V, L_H, R_V, R_H, M)` with the phonon index fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeLayout {
    photon_cutoff: usize,
    phonon_cutoff: usize,
    dimension: usize,
}

impl ModeLayout {
    pub fn new(photon_cutoff: usize, phonon_cutoff: usize) -> Result<Self> {
        Self::with_cap(photon_cutoff, phonon_cutoff, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(photon_cutoff: usize, phonon_cutoff: usize, cap: usize) -> Result<Self> {
        if photon_cutoff == 0 {
            return Err(Error::Invalid(vec!["photon cutoff must be >= 1".into()]));
        }
        let d = dimension_of(photon_cutoff, phonon_cutoff).unwrap_or(usize::MAX);
        if d > cap {
            return Err(Error::DimensionCap { dimension: d, cap });
        }
        Ok(ModeLayout {
            photon_cutoff,
            phonon_cutoff,
            dimension: d,
        })
    }

    pub fn photon_cutoff(&self) -> usize {
        self.photon_cutoff
    }

    pub fn phonon_cutoff(&self) -> usize {
        self.phonon_cutoff
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Index strides for each mode.
    pub fn strides(&self) -> [usize; 5] {
        let p = self.phonon_cutoff + 1;
        let c = self.photon_cutoff + 1;
        [c * c * c * p, c * c * p, c * p, p, 1]
    }

    pub fn index(&self, occ: [usize; 5]) -> usize {
        let s = self.strides();
        (0..5).map(|k| occ[k] * s[k]).sum()
    }

    pub fn occupations(&self, index: usize) -> [usize; 5] {
        let c = self.photon_cutoff + 1;
        let p = self.phonon_cutoff + 1;
        let mut rest = index;
        let m = rest % p;
        rest /= p;
        let rh = rest % c;
        rest /= c;
        let rv = rest % c;
        rest /= c;
        let lh = rest % c;
        rest /= c;
        [rest, lh, rv, rh, m]
    }
}

fn dimension_of(photon: usize, phonon: usize) -> Option<usize> {
    let c = photon.checked_add(1)?;
    c.checked_mul(c)?
        .checked_mul(c)?
        .checked_mul(c)?
        .checked_mul(phonon.checked_add(1)?)
}
