//! Truncated-Hilbert-space simulation of the quantum models.

pub mod evolve;
pub mod hamiltonian;
pub mod krylov;
pub mod operators;
pub mod sparse;

pub use evolve::{evolve, EvolveOptions, Method, Propagator, QuantumSamples};
pub use hamiltonian::{build_hamiltonians, multimode_harmonic, HamiltonianSet};
pub use operators::{boson_ops, collective_spin_ops};
pub use sparse::SparseOperator;

use crate::error::Result;
use crate::metrics::{Diagnostics, Trajectory};
use crate::model::{initial_state_quantum, natural_timescale, ModelSpec};

/// Uniform grid of `grid_points` samples over
/// `horizon_factor * natural_timescale`.
pub fn charging_grid(spec: &ModelSpec) -> Result<Vec<f64>> {
    let horizon = spec.horizon_factor() * natural_timescale(spec)?;
    let n = spec.numerics.grid_points;
    Ok((0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect())
}

/// Runs the quantum engine on the default grid and keeps the propagator
/// for re-evaluation at arbitrary charging times.
pub fn quantum_run(spec: &ModelSpec) -> Result<(Trajectory, Propagator)> {
    spec.validate()?;
    let grid = charging_grid(spec)?;
    let h = build_hamiltonians(spec)?;
    let psi0 = initial_state_quantum(spec)?;
    let e_a0 = hamiltonian::expectation(&h.h_a, &psi0)?;
    let mut propagator = Propagator::new(&h, &psi0, EvolveOptions::from(&spec.numerics))?;
    let samples = propagator.sample(&grid)?;
    log::debug!(
        "{} N={} g={}: dim {} -> {} ({:?})",
        spec.kind,
        spec.n,
        spec.g,
        propagator.full_dim(),
        propagator.reduced_dim(),
        propagator.method()
    );
    let drift = |values: &[f64]| values.iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
    let diagnostics = Diagnostics {
        n: spec.n,
        omega0: spec.omega0,
        initial_charger_energy: e_a0,
        initial_battery_energy: samples.e_battery[0],
        battery_baseline: 0.0,
        energy_drift: drift(&samples.e_total),
        norm_drift: Some(samples.norm.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)),
        excitation_drift: samples.excitations.as_deref().map(drift),
        cutoff: matches!(spec.kind, crate::model::ModelKind::Dicke).then(|| spec.effective_cutoff()),
    };
    let trajectory = Trajectory::new(samples.times, samples.e_battery, diagnostics)?;
    Ok((trajectory, propagator))
}

/// Battery-energy trajectory of the quantum model over the default grid.
pub fn quantum_energy_trajectory(spec: &ModelSpec) -> Result<Trajectory> {
    quantum_run(spec).map(|(t, _)| t)
}
