//! Sparse operators and the Hamiltonian on the truncated basis.

use num_complex::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};

use super::layout::ModeLayout;
use crate::error::Result;
use crate::exec::Execution;
use crate::model::SystemParams;

/// Compressed-row sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dimension: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Builds from per-row `(col, value)` lists; duplicate columns are summed
    /// and exact zeros dropped.
    pub fn from_rows(rows: Vec<Vec<(usize, Complex64)>>, hermitian: bool) -> Self {
        let dimension = rows.len();
        let mut row_ptr = Vec::with_capacity(dimension + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = row[k].1;
                k += 1;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                if v != Complex64::new(0.0, 0.0) {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseOperator {
            dimension,
            row_ptr,
            cols,
            vals,
            hermitian,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Entry `(row, col)`, zero when not stored.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let (a, b) = (self.row_ptr[row], self.row_ptr[row + 1]);
        match self.cols[a..b].binary_search(&col) {
            Ok(k) => self.vals[a + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// All stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dimension).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// `y = A x` with rows split across workers.
    pub fn matvec_with(&self, x: &[Complex64], y: &mut [Complex64], exec: Execution) {
        exec.for_each_chunk(y, 4096, |chunk, offset| {
            for (k, out) in chunk.iter_mut().enumerate() {
                let r = offset + k;
                let mut acc = Complex64::new(0.0, 0.0);
                for e in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.vals[e] * x[self.cols[e]];
                }
                *out = acc;
            }
        });
    }

    /// `⟨x|A|x⟩`.
    pub fn expectation(&self, x: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, xr) in x.iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += self.vals[k] * x[self.cols[k]];
            }
            acc += xr.conj() * row;
        }
        acc
    }

    /// Compares `samples` random stored entries with their transposed
    /// partners; returns the largest `|A_ij − conj(A_ji)|`.
    pub fn hermiticity_defect(&self, samples: usize, seed: u64) -> f64 {
        let nnz = self.nnz();
        if nnz == 0 {
            return 0.0;
        }
        let mut rng = StdRng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let k = rng.gen_range(0..nnz);
            let row = self.row_ptr.partition_point(|&p| p <= k) - 1;
            let col = self.cols[k];
            let d = (self.vals[k] - self.get(col, row).conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Spot check of the hermitian flag on 1000 random entries.
    pub fn check_hermitian(&self) -> bool {
        let scale = self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        self.hermiticity_defect(1000, 0x5eed) <= 1e-14 * scale.max(1.0)
    }
}

/// `H = ω(N_L + N_R) + (λ/2) Σ_p (R_p† L_p + h.c.) − g (N_L − N_R) X_M + ω_M M†M`
/// with `X_M = x_zpf (M + M†)`. Raising an occupation past its cutoff
/// annihilates the state.
pub fn build_hamiltonian(params: &SystemParams, layout: &ModeLayout) -> Result<SparseOperator> {
    let dim = layout.dimension();
    let c = layout.photon_cutoff();
    let p = layout.phonon_cutoff();
    let s = layout.strides();
    let half_l = 0.5 * params.lambda;
    let gx = params.g * params.x_zpf();
    let re = |v: f64| Complex64::new(v, 0.0);
    let mut rows = Vec::with_capacity(dim);
    for i in 0..dim {
        let occ = layout.occupations(i);
        let [lv, lh, rv, rh, m] = occ;
        let n_l = (lv + lh) as f64;
        let n_r = (rv + rh) as f64;
        let mut row = Vec::with_capacity(7);
        row.push((
            i,
            re(params.omega * (n_l + n_r) + params.omega_m * m as f64),
        ));
        // Tunnelling in each polarisation: (left mode, right mode).
        for (l_mode, r_mode) in [(0usize, 2usize), (1, 3)] {
            let (nl, nr) = (occ[l_mode], occ[r_mode]);
            if nl > 0 && nr < c {
                let amp = half_l * ((nl * (nr + 1)) as f64).sqrt();
                row.push((i - s[l_mode] + s[r_mode], re(amp)));
            }
            if nr > 0 && nl < c {
                let amp = half_l * ((nr * (nl + 1)) as f64).sqrt();
                row.push((i + s[l_mode] - s[r_mode], re(amp)));
            }
        }
        let dn = n_l - n_r;
        if dn != 0.0 && gx != 0.0 {
            if m > 0 {
                row.push((i - 1, re(-gx * dn * (m as f64).sqrt())));
            }
            if m < p {
                row.push((i + 1, re(-gx * dn * ((m + 1) as f64).sqrt())));
            }
        }
        rows.push(row);
    }
    Ok(SparseOperator::from_rows(rows, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn toy(g: f64, lambda: f64) -> SystemParams {
        SystemParams {
            g,
            omega: 3.0,
            omega_m: 0.7,
            lambda,
            mass: 1.3,
            kappa: 0.0,
            kappa_m: 0.0,
        }
    }

    #[test]
    fn single_photon_splitting() {
        let layout = ModeLayout::new(1, 0).unwrap();
        let p = toy(0.0, 0.8);
        let h = build_hamiltonian(&p, &layout).unwrap();
        let a = layout.index([1, 0, 0, 0, 0]);
        let b = layout.index([0, 0, 1, 0, 0]);
        let block = DMatrix::from_fn(2, 2, |r, c| {
            let (i, j) = ([a, b][r], [a, b][c]);
            h.get(i, j).re
        });
        let mut ev: Vec<f64> = SymmetricEigen::new(block)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - (p.omega - 0.4)).abs() < 1e-14);
        assert!((ev[1] - (p.omega + 0.4)).abs() < 1e-14);
        // No coupling between polarisations at g = 0.
        for (r, col, _) in h.entries() {
            let (x, y) = (layout.occupations(r), layout.occupations(col));
            assert_eq!(x[0] + x[2], y[0] + y[2]);
            assert_eq!(x[1] + x[3], y[1] + y[3]);
        }
    }

    #[test]
    fn diagonal_without_couplings() {
        let layout = ModeLayout::new(2, 3).unwrap();
        let h = build_hamiltonian(&toy(0.0, 0.0), &layout).unwrap();
        assert!(h.entries().all(|(r, c, _)| r == c));
    }

    #[test]
    fn hermitian_for_random_params() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..5 {
            let p = SystemParams {
                g: rng.gen_range(0.0..2.0),
                omega: rng.gen_range(0.0..5.0),
                omega_m: rng.gen_range(0.1..3.0),
                lambda: rng.gen_range(0.1..3.0),
                mass: rng.gen_range(0.1..3.0),
                kappa: 0.0,
                kappa_m: 0.0,
            };
            let layout = ModeLayout::new(2, 4).unwrap();
            let h = build_hamiltonian(&p, &layout).unwrap();
            assert!(h.is_hermitian() && h.check_hermitian());
            let worst = h
                .entries()
                .map(|(r, c, v)| (v - h.get(c, r).conj()).norm())
                .fold(0.0, f64::max);
            assert_eq!(worst, 0.0);
        }
    }

    #[test]
    fn spot_check_detects_asymmetry() {
        let rows = vec![
            vec![(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.0, 1.0))],
            vec![(0, Complex64::new(0.0, 1.0))],
        ];
        let op = SparseOperator::from_rows(rows, true);
        assert!(!op.check_hermitian());
    }

    #[test]
    fn parallel_matvec_matches() {
        let layout = ModeLayout::new(2, 6).unwrap();
        let h = build_hamiltonian(&toy(0.3, 1.1), &layout).unwrap();
        let x: Vec<Complex64> = (0..h.dimension())
            .map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos()))
            .collect();
        let mut a = vec![Complex64::default(); x.len()];
        let mut b = a.clone();
        h.matvec(&x, &mut a);
        h.matvec_with(&x, &mut b, Execution::Parallel);
        assert_eq!(a, b);
    }
}
