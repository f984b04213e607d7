//! Lanczos approximation of `exp(-i H dt) v` for hermitian sparse `H`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::sparse::SparseOperator;
use crate::error::{Error, Result};

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(-i T dt) e_1` for the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`.
fn tridiagonal_expm_e1(alpha: &[f64], beta: &[f64], dt: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let weights: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(eig.eigenvectors[(0, k)], -eig.eigenvalues[k] * dt))
        .collect();
    (0..m)
        .map(|i| (0..m).map(|k| weights[k] * eig.eigenvectors[(i, k)]).sum())
        .collect()
}

/// Single Lanczos step. Returns the propagated vector or, when the error
/// estimate stays above `tol` at `max_dim`, the final estimate.
pub(crate) fn lanczos_step(
    h: &SparseOperator,
    v: &[Complex64],
    dt: f64,
    tol: f64,
    max_dim: usize,
) -> std::result::Result<Vec<Complex64>, f64> {
    let dim = v.len();
    let beta0 = norm(v);
    if beta0 == 0.0 {
        return Ok(v.to_vec());
    }
    let max_dim = max_dim.min(dim);
    let mut basis: Vec<Vec<Complex64>> = vec![v.iter().map(|x| x / beta0).collect()];
    let mut alpha: Vec<f64> = Vec::with_capacity(max_dim);
    let mut beta: Vec<f64> = Vec::with_capacity(max_dim);
    let mut w = vec![C_ZERO; dim];
    let scale = h.max_abs().max(1e-300);
    let mut estimate = f64::INFINITY;

    for j in 0..max_dim {
        h.apply_into(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for (wi, qi) in w.iter_mut().zip(&basis[j]) {
            *wi -= qi * a;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (wi, qi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= qi * b;
            }
        }
        // full reorthogonalisation keeps the propagated norm at round-off
        for q in &basis {
            let overlap = dot(q, &w);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= qi * overlap;
            }
        }
        let b_next = norm(&w);
        let m = j + 1;
        let breakdown = b_next <= 1e-13 * scale || m == dim;
        if breakdown || m >= 4 {
            let y = tridiagonal_expm_e1(&alpha, &beta, dt);
            estimate = if breakdown { 0.0 } else { beta0 * b_next * y[m - 1].norm() };
            if estimate <= tol {
                let mut out = vec![C_ZERO; dim];
                for (yk, q) in y.iter().zip(&basis) {
                    let c = yk * beta0;
                    for (o, qi) in out.iter_mut().zip(q) {
                        *o += qi * c;
                    }
                }
                return Ok(out);
            }
        }
        beta.push(b_next);
        basis.push(w.iter().map(|x| x / b_next).collect());
    }
    Err(estimate)
}

/// Adaptive Lanczos propagator. The substep shrinks until each step meets
/// the error tolerance at the maximum subspace size.
#[derive(Debug, Clone)]
pub struct KrylovStepper {
    pub tol: f64,
    pub max_dim: usize,
    dt_hint: f64,
}

const MAX_HALVINGS: u32 = 40;

impl KrylovStepper {
    pub fn new(tol: f64, max_dim: usize) -> Self {
        KrylovStepper { tol, max_dim, dt_hint: f64::INFINITY }
    }

    /// Propagates `psi` from `t0` to `t1` under `h` in place.
    pub fn propagate(
        &mut self,
        h: &SparseOperator,
        psi: &mut Vec<Complex64>,
        t0: f64,
        t1: f64,
    ) -> Result<()> {
        let mut t = t0;
        let mut halvings = 0;
        while t < t1 {
            let remaining = t1 - t;
            let dt = if self.dt_hint >= remaining { remaining } else { self.dt_hint };
            match lanczos_step(h, psi, dt, self.tol, self.max_dim) {
                Ok(next) => {
                    *psi = next;
                    t = if dt == remaining { t1 } else { t + dt };
                    halvings = 0;
                    if dt < remaining {
                        self.dt_hint = dt * 1.25;
                    }
                }
                Err(estimate) => {
                    halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(Error::KrylovNonConvergence { t, estimate, size: self.max_dim });
                    }
                    self.dt_hint = dt / 2.0;
                }
            }
        }
        Ok(())
    }
}
