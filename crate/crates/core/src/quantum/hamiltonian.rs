//! Hamiltonians of the three quantum charger-battery models.

use super::operators::{boson_ops, collective_spin_ops, number_op};
use super::sparse::SparseOperator;
use crate::error::{Error, Result};
use crate::model::{Basis, BasisFactor, ModelKind, ModelSpec, Side, StateVector};

/// Charger, battery and coupling terms with the coupling switched on.
#[derive(Debug, Clone)]
pub struct HamiltonianSet {
    pub h_a: SparseOperator,
    pub h_b: SparseOperator,
    pub h_1: SparseOperator,
    pub total: SparseOperator,
    /// Excitation number commuting with `total`, where the model has one.
    pub excitations: Option<SparseOperator>,
}

impl HamiltonianSet {
    fn new(
        h_a: SparseOperator,
        h_b: SparseOperator,
        h_1: SparseOperator,
        excitations: Option<SparseOperator>,
    ) -> Result<Self> {
        let h_a = h_a.into_hermitian()?;
        let h_b = h_b.into_hermitian()?;
        let h_1 = h_1.into_hermitian()?;
        let total = h_a.add(&h_b).add(&h_1);
        Ok(HamiltonianSet { h_a, h_b, h_1, total, excitations })
    }

    pub fn dim(&self) -> usize {
        self.total.dim()
    }
}

/// Builds the model Hamiltonians in the basis of
/// [`crate::model::initial_state_quantum`].
pub fn build_hamiltonians(spec: &ModelSpec) -> Result<HamiltonianSet> {
    spec.validate()?;
    if spec.side != Side::Quantum {
        return Err(Error::Unsupported(format!("quantum Hamiltonian for {} side", spec.side)));
    }
    match spec.kind {
        ModelKind::Harmonic => bright_mode_harmonic(spec),
        ModelKind::Spin => spin_spin(spec),
        ModelKind::Dicke => dicke(spec),
    }
}

/// Charger mode plus bright battery mode, restricted to the sector with
/// `N` excitations. Index `k` holds `k` charger quanta.
fn bright_mode_harmonic(spec: &ModelSpec) -> Result<HamiltonianSet> {
    let n = spec.n;
    let w = spec.omega0;
    let g_n = spec.collective_coupling();
    let dim = n + 1;
    let h_a = SparseOperator::diagonal((0..dim).map(|k| w * k as f64));
    let h_b = SparseOperator::diagonal((0..dim).map(|k| w * (n - k) as f64));
    // a B^dagger |k, N-k> = sqrt(k) sqrt(N-k+1) |k-1, N-k+1>
    let hop = (1..dim).flat_map(|k| {
        let v = g_n * ((k * (n - k + 1)) as f64).sqrt();
        [(k - 1, k, v), (k, k - 1, v)]
    });
    let h_1 = SparseOperator::from_real_triplets(dim, hop);
    let exc = SparseOperator::identity(dim).scale(n as f64);
    HamiltonianSet::new(h_a, h_b, h_1, Some(exc))
}

fn spin_spin(spec: &ModelSpec) -> Result<HamiltonianSet> {
    let n = spec.n;
    let w = spec.omega0;
    let half_n = n as f64 / 2.0;
    let (jx, jy, jz) = collective_spin_ops(n);
    let id = SparseOperator::identity(n + 1);
    let local = jz.add(&id.scale(half_n)).scale(w);
    let h_a = local.kron(&id);
    let h_b = id.kron(&local);
    let h_1 = jx.kron(&jx).add(&jy.kron(&jy)).scale(4.0 * spec.g);
    let exc = jz.kron(&id).add(&id.kron(&jz));
    HamiltonianSet::new(h_a, h_b, h_1, Some(exc))
}

fn dicke(spec: &ModelSpec) -> Result<HamiltonianSet> {
    let n = spec.n;
    let cutoff = spec.effective_cutoff();
    if cutoff < n + 1 {
        return Err(Error::CutoffTooSmall { cutoff, n });
    }
    let w = spec.omega0;
    let (jx, _, jz) = collective_spin_ops(n);
    let a = boson_ops(cutoff)?;
    let id_cav = SparseOperator::identity(cutoff);
    let id_spin = SparseOperator::identity(n + 1);
    let h_a = number_op(cutoff).scale(w).kron(&id_spin);
    let h_b = id_cav.kron(&jz.add(&id_spin.scale(n as f64 / 2.0)).scale(w));
    let h_1 = a.add(&a.adjoint()).kron(&jx).scale(2.0 * spec.g);
    HamiltonianSet::new(h_a, h_b, h_1, None)
}

/// `op` acting on factor `site` of `sites` factors of its own size.
fn embed(op: &SparseOperator, site: usize, sites: usize) -> SparseOperator {
    let id = SparseOperator::identity(op.dim());
    let mut out: Option<SparseOperator> = None;
    for s in 0..sites {
        let factor = if s == site { op } else { &id };
        out = Some(match out {
            None => factor.clone(),
            Some(acc) => acc.kron(factor),
        });
    }
    out.expect("at least one site")
}

/// Harmonic model with every battery oscillator resolved: `1 + N` modes of
/// `cutoff` levels each (charger first). Returns the Hamiltonians and the
/// initial state `|N>_A |0...0>_B`. Only practical for small `N`.
pub fn multimode_harmonic(spec: &ModelSpec, cutoff: usize) -> Result<(HamiltonianSet, StateVector)> {
    spec.validate()?;
    let n = spec.n;
    if cutoff < n + 1 {
        return Err(Error::CutoffTooSmall { cutoff, n });
    }
    let sites = n + 1;
    let w = spec.omega0;
    let a = boson_ops(cutoff)?;
    let num = number_op(cutoff);
    let charger = embed(&a, 0, sites);
    let h_a = embed(&num, 0, sites).scale(w);
    let mut h_b = SparseOperator::zeros(h_a.dim());
    let mut h_1 = SparseOperator::zeros(h_a.dim());
    for i in 1..sites {
        let b = embed(&a, i, sites);
        h_b = h_b.add(&embed(&num, i, sites).scale(w));
        let hop = charger.matmul(&b.adjoint());
        h_1 = h_1.add(&hop).add(&hop.adjoint());
    }
    let h_1 = h_1.scale(spec.g);
    let exc = h_a.add(&h_b).scale(1.0 / w);
    let set = HamiltonianSet::new(h_a, h_b, h_1, Some(exc))?;
    let basis = Basis::Tensor(
        std::iter::once(BasisFactor { label: "charger", dim: cutoff })
            .chain((1..sites).map(|_| BasisFactor { label: "battery unit", dim: cutoff }))
            .collect(),
    );
    let mut digits = vec![0; sites];
    digits[0] = n;
    let index = basis.index(&digits);
    Ok((set, StateVector::basis_state(basis, index)))
}

/// `<psi|op|psi>` for a state vector.
pub fn expectation(op: &SparseOperator, psi: &StateVector) -> Result<f64> {
    if op.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: psi.dim() });
    }
    Ok(op.expectation(&psi.amplitudes))
}
