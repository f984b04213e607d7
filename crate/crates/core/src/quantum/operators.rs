//! Truncated boson ladder operators and collective spin matrices.

use num_complex::Complex64;

use super::sparse::SparseOperator;
use crate::error::{Error, Result};

/// Lowering operator on the Fock space `{|0>, ..., |cutoff-1>}`:
/// `a[n-1, n] = sqrt(n)`. The raising operator is its adjoint.
pub fn boson_ops(cutoff: usize) -> Result<SparseOperator> {
    if cutoff < 2 {
        return Err(Error::BosonCutoff(cutoff));
    }
    Ok(SparseOperator::from_real_triplets(
        cutoff,
        (1..cutoff).map(|n| (n - 1, n, (n as f64).sqrt())),
    ))
}

/// Number operator `a^dagger a` on a truncated Fock space.
pub fn number_op(cutoff: usize) -> SparseOperator {
    SparseOperator::diagonal((0..cutoff).map(|n| n as f64))
}

/// Collective spin raising operator for `J = N/2` in the descending
/// `J_z` basis (index `i` carries `m = J - i`).
pub fn spin_raising(n: usize) -> SparseOperator {
    // J(J+1) - m(m+1) = (J - m)(J + m + 1) = i (N - i + 1)
    SparseOperator::from_real_triplets(
        n + 1,
        (1..=n).map(|i| (i - 1, i, ((i * (n - i + 1)) as f64).sqrt())),
    )
}

/// `(J_x, J_y, J_z)` for `N` spin-1/2 units in the symmetric subspace.
pub fn collective_spin_ops(n: usize) -> (SparseOperator, SparseOperator, SparseOperator) {
    let j = n as f64 / 2.0;
    let raise = spin_raising(n);
    let lower = raise.adjoint();
    let jx = raise.add(&lower).scale(0.5);
    // (J+ - J-) / 2i
    let jy = raise.sub(&lower).scale_complex(Complex64::new(0.0, -0.5));
    let jz = SparseOperator::diagonal((0..=n).map(|i| j - i as f64));
    (
        jx.into_hermitian().expect("J_x hermitian"),
        jy.into_hermitian().expect("J_y hermitian"),
        jz.into_hermitian().expect("J_z hermitian"),
    )
}
