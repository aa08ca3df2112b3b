//! `exp(−iHt)|ψ⟩` by Lanczos projection with adaptive sub-steps.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::operator::SparseOperator;
use super::state::{norm, TruncatedState};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Default per-step error tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

const KRYLOV_DIM: usize = 30;

/// Reusable workspace for propagating one state vector.
pub struct Propagator<'a> {
    h: &'a SparseOperator,
    tol: f64,
    basis: Vec<Vec<Complex64>>,
    work: Vec<Complex64>,
    step_hint: Option<f64>,
    steps: usize,
}

impl<'a> Propagator<'a> {
    pub fn new(h: &'a SparseOperator, tol: f64) -> Self {
        Propagator {
            h,
            tol: tol.max(1e-15),
            basis: Vec::new(),
            work: vec![Complex64::new(0.0, 0.0); h.dimension()],
            step_hint: None,
            steps: 0,
        }
    }

    /// Accepted sub-steps so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Replaces `psi` by `exp(−iH span) psi`; `t0` only labels errors.
    pub fn advance(&mut self, psi: &mut [Complex64], t0: f64, span: f64) -> Result<()> {
        let mut done = 0.0;
        while done < span {
            let remaining = span - done;
            let beta0 = norm(psi);
            if beta0 == 0.0 {
                return Ok(());
            }
            let (alpha, beta, m, tail) = self.lanczos(psi, beta0);
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let q = &eig.eigenvectors;
            let coeffs = |dt: f64| -> Vec<Complex64> {
                let phases: Vec<Complex64> = (0..m)
                    .map(|l| Complex64::from_polar(q[(0, l)], -eig.eigenvalues[l] * dt))
                    .collect();
                (0..m)
                    .map(|k| (0..m).map(|l| phases[l] * q[(k, l)]).sum())
                    .collect()
            };
            let mut dt = self.step_hint.map_or(remaining, |h| h.min(remaining));
            let mut first_try = true;
            let y = loop {
                let y = coeffs(dt);
                let err = beta0 * tail * y[m - 1].norm();
                if err <= self.tol {
                    break y;
                }
                first_try = false;
                dt *= 0.5;
                if dt <= remaining * 1e-13 || dt < f64::MIN_POSITIVE {
                    return Err(Error::NonConvergence {
                        time: t0 + done,
                        residual: err,
                    });
                }
            };
            for v in psi.iter_mut() {
                *v = Complex64::new(0.0, 0.0);
            }
            for (k, yk) in y.iter().enumerate() {
                let c = yk * beta0;
                for (out, b) in psi.iter_mut().zip(&self.basis[k]) {
                    *out += c * b;
                }
            }
            self.step_hint = Some(if first_try { 2.0 * dt } else { dt });
            self.steps += 1;
            if dt >= remaining {
                break;
            }
            done += dt;
        }
        Ok(())
    }

    /// Returns diagonal, off-diagonal, subspace size and the residual norm
    /// coupling the last basis vector out of the subspace (0 on breakdown).
    fn lanczos(&mut self, psi: &[Complex64], beta0: f64) -> (Vec<f64>, Vec<f64>, usize, f64) {
        let n = psi.len();
        let m_max = KRYLOV_DIM.min(n);
        while self.basis.len() < m_max {
            self.basis.push(vec![Complex64::new(0.0, 0.0); n]);
        }
        for (b, p) in self.basis[0].iter_mut().zip(psi) {
            *b = p / beta0;
        }
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut tail = 0.0;
        for j in 0..m_max {
            self.h.matvec(&self.basis[j], &mut self.work);
            let a: f64 = self.basis[j]
                .iter()
                .zip(&self.work)
                .map(|(v, w)| (v.conj() * w).re)
                .sum();
            alpha.push(a);
            {
                let (head, rest) = self.basis.split_at(j);
                let vj = &rest[0];
                if j > 0 {
                    let bj = beta[j - 1];
                    let vprev = &head[j - 1];
                    for ((w, v), u) in self.work.iter_mut().zip(vj).zip(vprev) {
                        *w -= v * a + u * bj;
                    }
                } else {
                    for (w, v) in self.work.iter_mut().zip(vj) {
                        *w -= v * a;
                    }
                }
            }
            let b = norm(&self.work);
            let scale = a.abs() + beta.last().copied().unwrap_or(0.0);
            if b <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
                tail = 0.0;
                return (alpha, beta, j + 1, tail);
            }
            tail = b;
            if j + 1 < m_max {
                beta.push(b);
                let inv = 1.0 / b;
                for (dst, w) in self.basis[j + 1].iter_mut().zip(&self.work) {
                    *dst = w * inv;
                }
            }
        }
        (alpha, beta, m_max, tail)
    }
}

/// `exp(−iHt)` applied to every branch of `state`.
pub fn evolve(
    state: &TruncatedState,
    h: &SparseOperator,
    t: f64,
    tol: f64,
    exec: Execution,
) -> Result<TruncatedState> {
    let branches = exec.try_map(state.branches(), |b| {
        let mut psi = b.amplitudes.clone();
        Propagator::new(h, tol).advance(&mut psi, 0.0, t)?;
        Ok::<_, Error>(super::state::Branch {
            weight: b.weight,
            amplitudes: psi,
        })
    })?;
    TruncatedState::mixture(*state.layout(), branches)
}
