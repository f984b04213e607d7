//! Time evolution under the charging Hamiltonian.
//!
//! The initial state is first restricted to the smallest coordinate
//! subspace that the Hamiltonian's nonzero pattern connects to its support
//! (the excitation sector for the spin model, the parity sector for
//! Dicke). That subspace is exactly invariant, so nothing is lost. Small
//! subspaces are diagonalised once; large ones use adaptive Lanczos
//! stepping with periodic checkpoints for later re-evaluation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::hamiltonian::HamiltonianSet;
use super::krylov::KrylovStepper;
use super::sparse::SparseOperator;
use crate::error::{Error, Result};
use crate::metrics::EnergyProbe;
use crate::model::{NumericsConfig, StateVector};

/// Expectation values sampled on the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSamples {
    pub times: Vec<f64>,
    pub e_battery: Vec<f64>,
    pub e_total: Vec<f64>,
    pub norm: Vec<f64>,
    /// Conserved excitation number, where the model has one.
    pub excitations: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Krylov,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub eigen_max_dim: usize,
    pub krylov_tol: f64,
    pub krylov_max_dim: usize,
    /// Grid stride between stored Krylov checkpoints.
    pub checkpoint_stride: usize,
}

impl From<&NumericsConfig> for EvolveOptions {
    fn from(n: &NumericsConfig) -> Self {
        EvolveOptions {
            eigen_max_dim: n.eigen_max_dim,
            krylov_tol: n.krylov_tol,
            krylov_max_dim: n.krylov_max_dim,
            checkpoint_stride: 20,
        }
    }
}

impl Default for EvolveOptions {
    fn default() -> Self {
        (&NumericsConfig::default()).into()
    }
}

enum Eigenvectors {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

struct Spectral {
    energies: Vec<f64>,
    coeffs: Vec<Complex64>,
    vectors: Eigenvectors,
}

impl Spectral {
    fn new(h: &SparseOperator, psi0: &[Complex64]) -> Self {
        if h.is_real() {
            let eig = SymmetricEigen::new(h.to_dense_real());
            let v = eig.eigenvectors;
            let coeffs = (0..v.ncols())
                .map(|k| v.column(k).iter().zip(psi0).map(|(a, b)| b * *a).sum())
                .collect();
            Spectral {
                energies: eig.eigenvalues.iter().copied().collect(),
                coeffs,
                vectors: Eigenvectors::Real(v),
            }
        } else {
            let eig = SymmetricEigen::new(h.to_dense());
            let v = eig.eigenvectors;
            let coeffs = (0..v.ncols())
                .map(|k| v.column(k).iter().zip(psi0).map(|(a, b)| a.conj() * b).sum())
                .collect();
            Spectral {
                energies: eig.eigenvalues.iter().copied().collect(),
                coeffs,
                vectors: Eigenvectors::Complex(v),
            }
        }
    }

    fn state_at(&self, t: f64) -> Vec<Complex64> {
        let phased: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(&self.energies)
            .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t))
            .collect();
        match &self.vectors {
            Eigenvectors::Real(v) => {
                let re = DVector::from_iterator(phased.len(), phased.iter().map(|z| z.re));
                let im = DVector::from_iterator(phased.len(), phased.iter().map(|z| z.im));
                let out_re = v * re;
                let out_im = v * im;
                out_re.iter().zip(out_im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect()
            }
            Eigenvectors::Complex(v) => (v * DVector::from_vec(phased)).iter().copied().collect(),
        }
    }
}

struct Krylov {
    stepper: KrylovStepper,
    stride: usize,
    psi0: Vec<Complex64>,
    checkpoints: Vec<(f64, Vec<Complex64>)>,
    cursor: Option<(f64, Vec<Complex64>)>,
}

impl Krylov {
    /// Latest stored state at or before `t`.
    fn start_for(&self, t: f64) -> (f64, Vec<Complex64>) {
        let mut best = (0.0, &self.psi0);
        for (tc, psi) in &self.checkpoints {
            if *tc <= t && *tc >= best.0 {
                best = (*tc, psi);
            }
        }
        if let Some((tc, psi)) = &self.cursor {
            if *tc <= t && *tc >= best.0 {
                best = (*tc, psi);
            }
        }
        (best.0, best.1.clone())
    }

    fn state_at(&mut self, h: &SparseOperator, t: f64) -> Result<Vec<Complex64>> {
        let (t0, mut psi) = self.start_for(t);
        self.stepper.propagate(h, &mut psi, t0, t)?;
        Ok(psi)
    }
}

enum Engine {
    Spectral(Spectral),
    Krylov(Krylov),
}

/// Propagates one initial state under a fixed Hamiltonian and evaluates
/// observables at arbitrary times.
pub struct Propagator {
    total: SparseOperator,
    battery: SparseOperator,
    excitations: Option<SparseOperator>,
    engine: Engine,
    full_dim: usize,
}

impl Propagator {
    pub fn new(h: &HamiltonianSet, psi0: &StateVector, opts: EvolveOptions) -> Result<Self> {
        let full_dim = h.dim();
        if psi0.dim() != full_dim {
            return Err(Error::DimensionMismatch { expected: full_dim, found: psi0.dim() });
        }
        let support: Vec<usize> = psi0
            .amplitudes
            .iter()
            .enumerate()
            .filter_map(|(i, a)| (a.norm_sqr() > 0.0).then_some(i))
            .collect();
        let keep = h.total.reachable_from(&support);
        let total = h.total.restrict(&keep);
        let battery = h.h_b.restrict(&keep);
        let excitations = h.excitations.as_ref().map(|x| x.restrict(&keep));
        let psi: Vec<Complex64> = keep.iter().map(|&i| psi0.amplitudes[i]).collect();
        let engine = if keep.len() <= opts.eigen_max_dim {
            Engine::Spectral(Spectral::new(&total, &psi))
        } else {
            Engine::Krylov(Krylov {
                stepper: KrylovStepper::new(opts.krylov_tol, opts.krylov_max_dim),
                stride: opts.checkpoint_stride.max(1),
                psi0: psi,
                checkpoints: Vec::new(),
                cursor: None,
            })
        };
        Ok(Propagator { total, battery, excitations, engine, full_dim })
    }

    pub fn method(&self) -> Method {
        match self.engine {
            Engine::Spectral(_) => Method::Spectral,
            Engine::Krylov(_) => Method::Krylov,
        }
    }

    /// Dimension of the invariant subspace actually propagated.
    pub fn reduced_dim(&self) -> usize {
        self.total.dim()
    }

    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    fn state_at(&mut self, t: f64) -> Result<Vec<Complex64>> {
        match &mut self.engine {
            Engine::Spectral(s) => Ok(s.state_at(t)),
            Engine::Krylov(k) => k.state_at(&self.total, t),
        }
    }

    /// `<H_B>` at time `t`.
    pub fn battery_energy_at(&mut self, t: f64) -> Result<f64> {
        let psi = self.state_at(t)?;
        Ok(self.battery.expectation(&psi))
    }

    /// Samples all observables on `grid`, which must start at 0 and
    /// increase strictly.
    pub fn sample(&mut self, grid: &[f64]) -> Result<QuantumSamples> {
        validate_grid(grid)?;
        let mut out = QuantumSamples {
            times: grid.to_vec(),
            e_battery: Vec::with_capacity(grid.len()),
            e_total: Vec::with_capacity(grid.len()),
            norm: Vec::with_capacity(grid.len()),
            excitations: self.excitations.as_ref().map(|_| Vec::with_capacity(grid.len())),
        };
        let record = |psi: &[Complex64], out: &mut QuantumSamples| {
            out.e_battery.push(self.battery.expectation(psi));
            out.e_total.push(self.total.expectation(psi));
            out.norm.push(psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
            if let (Some(op), Some(values)) = (&self.excitations, out.excitations.as_mut()) {
                values.push(op.expectation(psi));
            }
        };
        match &mut self.engine {
            Engine::Spectral(s) => {
                for &t in grid {
                    record(&s.state_at(t), &mut out);
                }
            }
            Engine::Krylov(k) => {
                let stride = k.stride;
                k.checkpoints.clear();
                let mut psi = k.psi0.clone();
                let mut t_prev = 0.0;
                for (i, &t) in grid.iter().enumerate() {
                    k.stepper.propagate(&self.total, &mut psi, t_prev, t)?;
                    t_prev = t;
                    if i > 0 && i % stride == 0 {
                        k.checkpoints.push((t, psi.clone()));
                    }
                    record(&psi, &mut out);
                }
            }
        }
        Ok(out)
    }
}

impl EnergyProbe for Propagator {
    fn anchor(&mut self, t: f64) -> Result<()> {
        if let Engine::Krylov(k) = &mut self.engine {
            let psi = k.state_at(&self.total, t)?;
            k.cursor = Some((t, psi));
        }
        Ok(())
    }

    fn energy_at(&mut self, t: f64) -> Result<f64> {
        self.battery_energy_at(t)
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.first() != Some(&0.0) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

/// Samples `<H_B>`, `<H>`, the norm and (if available) the excitation
/// number along the evolution of `psi0`.
pub fn evolve(
    h: &HamiltonianSet,
    psi0: &StateVector,
    grid: &[f64],
    opts: EvolveOptions,
) -> Result<QuantumSamples> {
    Propagator::new(h, psi0, opts)?.sample(grid)
}
