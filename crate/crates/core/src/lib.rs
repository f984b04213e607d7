//! Quantum and classical charger-battery models.
//!
//! Three families are implemented on both sides: a harmonic charger
//! feeding `N` oscillators, `N` charger spins exchange-coupled to `N`
//! battery spins, and a cavity mode driving `N` qubits. For each, the crate
//! produces battery-energy trajectories and the derived charging metrics:
//! maximum average power, optimal charging time, collective advantage and
//! the quantum/classical ratio.

pub mod classical;
pub mod error;
pub mod metrics;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod quantum;
pub mod runner;

pub use error::{Error, Result};
pub use metrics::{
    charging_metrics, collective_advantage, fit_power_law, max_average_power, quantum_classical_ratio,
    ratio_for, AdvantageResult, ChargingMetrics, ChargingOutcome, Diagnostics, EnergyProbe, PowerLawFit,
    RatioResult, Trajectory,
};
pub use model::{natural_timescale, ModelKind, ModelSpec, NumericsConfig, PhasePoint, Side, StateVector};
