//! Compressed sparse row operators over complex amplitudes.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-14;

/// Square complex sparse matrix in CSR layout with sorted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Builds an operator from `(row, col, value)` triplets. Duplicates are
    /// summed and exact zeros dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside dimension {dim}");
            *acc.entry((r, c)).or_default() += v;
        }
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(acc.len());
        let mut values = Vec::with_capacity(acc.len());
        for ((r, c), v) in acc {
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            row_ptr[r + 1] += 1;
            cols.push(c);
            values.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseOperator { dim, row_ptr, cols, values, hermitian: false }
    }

    pub fn from_real_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        Self::from_triplets(dim, triplets.into_iter().map(|(r, c, v)| (r, c, Complex64::new(v, 0.0))))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, std::iter::empty())
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal((0..dim).map(|_| 1.0)).into_hermitian().expect("identity")
    }

    pub fn diagonal<I: IntoIterator<Item = f64>>(diag: I) -> Self {
        let diag: Vec<f64> = diag.into_iter().collect();
        let dim = diag.len();
        Self::from_real_triplets(dim, diag.into_iter().enumerate().map(|(i, v)| (i, i, v)))
    }

    /// Sets the hermitian flag after checking closure under conjugate
    /// transpose.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let dev = self.hermiticity_defect();
        if dev > HERMITIAN_TOL * self.max_abs().max(1.0) {
            return Err(Error::InvalidSpec(format!(
                "operator is not hermitian (defect {dev:e})"
            )));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.values[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Largest entrywise deviation between the operator and its adjoint.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        let out = Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| (c, r, v.conj())));
        SparseOperator { hermitian: self.hermitian, ..out }
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out.hermitian = self.hermitian && factor.im == 0.0;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in operator sum");
        let out = Self::from_triplets(self.dim, self.entries().chain(other.entries()));
        SparseOperator { hermitian: self.hermitian && other.hermitian, ..out }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in operator product");
        let mut triplets = Vec::new();
        for (r, k, a) in self.entries() {
            for (c, b) in other.row(k) {
                triplets.push((r, c, a * b));
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Kronecker product with `self` as the most significant factor.
    pub fn kron(&self, other: &Self) -> Self {
        let d = other.dim;
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, a) in self.entries() {
            for (r2, c2, b) in other.entries() {
                triplets.push((r1 * d + r2, c1 * d + c2, a * b));
            }
        }
        let out = Self::from_triplets(self.dim * d, triplets);
        SparseOperator { hermitian: self.hermitian && other.hermitian, ..out }
    }

    /// `out = self * x`.
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (r, y) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *y = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut out);
        out
    }

    /// Real part of `<x|self|x>`.
    pub fn expectation(&self, x: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.dim {
            let mut row = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += self.values[k] * x[self.cols[k]];
            }
            acc += x[r].conj() * row;
        }
        acc.re
    }

    /// Restriction to the coordinate subspace spanned by `indices`.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let mut position = vec![usize::MAX; self.dim];
        for (i, &idx) in indices.iter().enumerate() {
            position[idx] = i;
        }
        let triplets = indices.iter().enumerate().flat_map(|(i, &r)| {
            let position = &position;
            self.row(r).filter_map(move |(c, v)| {
                let j = position[c];
                (j != usize::MAX).then_some((i, j, v))
            })
        });
        let out = Self::from_triplets(indices.len(), triplets.collect::<Vec<_>>());
        SparseOperator { hermitian: self.hermitian, ..out }
    }

    /// Basis indices reachable from `seeds` through nonzero matrix
    /// elements, in increasing order. The span of the result is invariant
    /// under a hermitian operator.
    pub fn reachable_from(&self, seeds: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.dim];
        let mut stack: Vec<usize> = Vec::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(r) = stack.pop() {
            for (c, _) in self.row(r) {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        seen.iter().enumerate().filter_map(|(i, &s)| s.then_some(i)).collect()
    }

    pub fn to_dense_real(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v.re;
        }
        m
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triplets_accumulate_and_drop_zeros() {
        let op = SparseOperator::from_triplets(
            3,
            [(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (2, 2, c(1.0, 0.0)), (2, 2, c(-1.0, 0.0))],
        );
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(0, 1), c(3.0, 0.0));
        assert_eq!(op.get(2, 2), c(0.0, 0.0));
    }

    #[test]
    fn hermitian_flag_is_checked() {
        let h = SparseOperator::from_triplets(2, [(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0))]);
        assert!(h.clone().into_hermitian().is_ok());
        let nh = SparseOperator::from_triplets(2, [(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, 1.0))]);
        assert!(nh.into_hermitian().is_err());
    }

    #[test]
    fn kron_and_matmul_agree_with_dense() {
        let a = SparseOperator::from_triplets(2, [(0, 1, c(1.0, 0.5)), (1, 1, c(2.0, 0.0))]);
        let b = SparseOperator::from_triplets(3, [(0, 2, c(1.0, 0.0)), (2, 1, c(0.0, -1.0))]);
        let k = a.kron(&b);
        let dense = a.to_dense().kronecker(&b.to_dense());
        assert_eq!(k.to_dense(), dense);
        let p = k.matmul(&k.adjoint());
        let dp = &dense * dense.adjoint();
        assert!((p.to_dense() - dp).norm() < 1e-14);
    }

    #[test]
    fn restriction_and_reachability() {
        // two disconnected blocks {0, 2} and {1}
        let h = SparseOperator::from_real_triplets(3, [(0, 2, 1.0), (2, 0, 1.0), (1, 1, 5.0)]);
        assert_eq!(h.reachable_from(&[2]), vec![0, 2]);
        let sub = h.restrict(&[0, 2]);
        assert_eq!(sub.dim(), 2);
        assert_eq!(sub.get(0, 1), c(1.0, 0.0));
    }

    #[test]
    fn expectation_matches_dense() {
        let h = SparseOperator::from_triplets(2, [(0, 0, c(1.0, 0.0)), (0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0))]);
        let x = [c(0.6, 0.0), c(0.0, 0.8)];
        // 0.36 + conj(0.6)(i)(0.8i) + conj(0.8i)(-i)(0.6) = 0.36 - 0.48 - 0.48
        assert!((h.expectation(&x) - (0.36 - 0.96)).abs() < 1e-15);
    }
}
