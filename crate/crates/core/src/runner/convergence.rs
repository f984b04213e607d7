//! Cutoff and tolerance policies.

use crate::classical::classical_run;
use crate::error::{Error, Result};
use crate::metrics::Trajectory;
use crate::model::{ModelKind, ModelSpec, Side};
use crate::quantum::{quantum_run, Propagator};

/// Uniform change in `E_B(t)`, in units of `N omega0`, below which a photon
/// cutoff is accepted.
pub const CUTOFF_TOL: f64 = 1e-6;
/// Largest photon cutoff tried, in units of `N`.
pub const MAX_CUTOFF_PER_UNIT: usize = 64;

/// Quantum run at the smallest accepted photon cutoff.
pub struct ConvergedRun {
    pub trajectory: Trajectory,
    pub propagator: Propagator,
    pub cutoff: usize,
    /// `max |dE_B|` between this cutoff and its double.
    pub doubling_change: f64,
    pub audit: Vec<String>,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Doubles the Dicke photon cutoff from its starting value until doubling
/// again changes `E_B(t)` by less than `1e-6 N omega0` anywhere on the
/// grid. The last comparison is against the cap `64 N` itself.
pub fn converged_quantum_run(spec: &ModelSpec) -> Result<ConvergedRun> {
    let cap = MAX_CUTOFF_PER_UNIT * spec.n;
    let tol = CUTOFF_TOL * spec.n as f64 * spec.omega0;
    let mut cutoff = spec.effective_cutoff();
    let (mut trajectory, mut propagator) = quantum_run(&spec.clone().with_cutoff(cutoff))?;
    let mut audit = Vec::new();
    loop {
        let doubled = (2 * cutoff).min(cap);
        if doubled <= cutoff {
            return Err(Error::NoConvergence(format!(
                "photon cutoff for N = {} exceeds {cap}",
                spec.n
            )));
        }
        let (t2, p2) = quantum_run(&spec.clone().with_cutoff(doubled))?;
        let change = max_abs_diff(trajectory.e_battery(), t2.e_battery());
        audit.push(format!("cutoff {cutoff} -> {doubled}: max |dE_B| = {change:e}"));
        log::debug!("{} N={} g={}: {}", spec.kind, spec.n, spec.g, audit.last().unwrap());
        if change < tol {
            return Ok(ConvergedRun { trajectory, propagator, cutoff, doubling_change: change, audit });
        }
        cutoff = doubled;
        trajectory = t2;
        propagator = p2;
    }
}

/// A spec with its numerical controls settled, plus how they were chosen.
#[derive(Debug, Clone)]
pub struct CheckedSpec {
    pub spec: ModelSpec,
    pub audit: Vec<String>,
}

/// Returns `spec` with the smallest photon cutoff (Dicke quantum) or the
/// loosest ODE tolerances (classical) that satisfy the convergence and
/// drift thresholds. Other models are returned unchanged.
pub fn convergence_check(spec: &ModelSpec) -> Result<CheckedSpec> {
    spec.validate()?;
    match (spec.kind, spec.side) {
        (ModelKind::Dicke, Side::Quantum) => {
            let run = converged_quantum_run(spec)?;
            Ok(CheckedSpec { spec: spec.clone().with_cutoff(run.cutoff), audit: run.audit })
        }
        (_, Side::Quantum) => Ok(CheckedSpec {
            spec: spec.clone(),
            audit: vec!["truncation-free basis".into()],
        }),
        (_, Side::Classical) => {
            let (_, path, _) = classical_run(spec)?;
            let mut checked = spec.clone();
            let mut audit = vec![format!("energy drift {:e}", path.energy_drift())];
            if path.tolerances.rel < spec.numerics.ode_rel_tol {
                checked.numerics.ode_rel_tol = path.tolerances.rel;
                checked.numerics.ode_abs_tol = path.tolerances.abs;
                audit.push(format!("tolerances tightened to {:e}", path.tolerances.rel));
            }
            Ok(CheckedSpec { spec: checked, audit })
        }
    }
}
