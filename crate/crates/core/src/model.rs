//! Model and parameter types shared by the quantum and classical engines.
//!
//! Units: ħ = 1, energies in units of `omega0` (default 1), times in
//! `1/omega0`. The charger always starts with energy `N * omega0` and the
//! battery in its lowest-energy configuration.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// One bosonic charger mode coupled to `N` battery oscillators.
    Harmonic,
    /// `N` charger qubits exchange-coupled to `N` battery qubits.
    Spin,
    /// One cavity mode coupled to `N` battery qubits (Dicke coupling).
    Dicke,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Harmonic, ModelKind::Spin, ModelKind::Dicke];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Harmonic => "harmonic",
            ModelKind::Spin => "spin",
            ModelKind::Dicke => "dicke",
        }
    }

    /// Whether any classical coordinate of this model lives on a sphere.
    pub fn has_spin_coordinates(self) -> bool {
        !matches!(self, ModelKind::Harmonic)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "harmonic" => Ok(ModelKind::Harmonic),
            "spin" => Ok(ModelKind::Spin),
            "dicke" => Ok(ModelKind::Dicke),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Quantum,
    Classical,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Quantum => "quantum",
            Side::Classical => "classical",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quantum" | "qu" => Ok(Side::Quantum),
            "classical" | "cl" => Ok(Side::Classical),
            other => Err(Error::Config(format!("unknown side '{other}'"))),
        }
    }
}

/// Numerical controls. Tolerances are dimensionless; the horizon is a
/// multiple of [`natural_timescale`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    /// Per-step error bound of the Krylov propagator.
    pub krylov_tol: f64,
    /// Unset selects the model default, see [`ModelSpec::horizon_factor`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_horizon_factor: Option<f64>,
    pub grid_points: usize,
    /// Relative width at which the optimal charging time is accepted.
    pub refine_tol: f64,
    /// Largest (reduced) Hilbert dimension propagated by full
    /// diagonalisation; above it the Krylov propagator takes over.
    pub eigen_max_dim: usize,
    pub krylov_max_dim: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            ode_rel_tol: 1e-10,
            ode_abs_tol: 1e-12,
            krylov_tol: 1e-12,
            time_horizon_factor: None,
            grid_points: 2000,
            refine_tol: 1e-10,
            eigen_max_dim: 2000,
            krylov_max_dim: 60,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ode_rel_tol", self.ode_rel_tol),
            ("ode_abs_tol", self.ode_abs_tol),
            ("krylov_tol", self.krylov_tol),
            ("time_horizon_factor", self.time_horizon_factor.unwrap_or(1.0)),
            ("refine_tol", self.refine_tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidSpec(format!("{name} must be positive, got {value}")));
            }
        }
        if self.grid_points < 100 {
            return Err(Error::InvalidSpec(format!(
                "grid_points must be at least 100, got {}",
                self.grid_points
            )));
        }
        if self.krylov_max_dim < 4 {
            return Err(Error::InvalidSpec("krylov_max_dim must be at least 4".into()));
        }
        Ok(())
    }
}

/// Full description of one simulation instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub side: Side,
    /// Number of battery units.
    pub n: usize,
    /// Charger-battery coupling in units of energy.
    pub g: f64,
    pub omega0: f64,
    /// Polar tilt regularising classical spins away from the poles.
    pub epsilon: f64,
    /// Initial azimuth of classical spins.
    pub phi0: f64,
    /// Photon-number truncation, Dicke quantum only. `None` selects
    /// `2N + 8`.
    pub cutoff: Option<usize>,
    pub numerics: NumericsConfig,
}

pub const DEFAULT_EPSILON: f64 = 1e-3;

impl ModelSpec {
    pub fn new(kind: ModelKind, side: Side, n: usize, g: f64) -> Self {
        ModelSpec {
            kind,
            side,
            n,
            g,
            omega0: 1.0,
            epsilon: DEFAULT_EPSILON,
            phi0: 0.0,
            cutoff: None,
            numerics: NumericsConfig::default(),
        }
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn with_numerics(mut self, numerics: NumericsConfig) -> Self {
        self.numerics = numerics;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    /// Collective coupling `sqrt(N) g` of the bright mode.
    pub fn collective_coupling(&self) -> f64 {
        (self.n as f64).sqrt() * self.g
    }

    /// Spin length `J = N/2`.
    pub fn spin_length(&self) -> f64 {
        self.n as f64 / 2.0
    }

    /// Charging horizon in natural time units: 10 by default, 3 for the
    /// Dicke model, whose late-time photon distribution would otherwise
    /// dictate the cutoff.
    pub fn horizon_factor(&self) -> f64 {
        self.numerics.time_horizon_factor.unwrap_or(match self.kind {
            ModelKind::Dicke => 3.0,
            ModelKind::Harmonic | ModelKind::Spin => 10.0,
        })
    }

    /// Photon cutoff in effect for the Dicke quantum model.
    pub fn effective_cutoff(&self) -> usize {
        self.cutoff.unwrap_or(2 * self.n + 8)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("N must be at least 1".into()));
        }
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::InvalidSpec(format!("omega0 must be positive, got {}", self.omega0)));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidSpec(format!("g must be non-negative, got {}", self.g)));
        }
        if self.side == Side::Classical
            && self.kind.has_spin_coordinates()
            && !(self.epsilon > 0.0 && self.epsilon < FRAC_PI_4)
        {
            return Err(Error::InvalidSpec(format!(
                "epsilon must lie in (0, pi/4), got {}",
                self.epsilon
            )));
        }
        if self.kind == ModelKind::Dicke && self.side == Side::Quantum {
            let cutoff = self.effective_cutoff();
            if cutoff < self.n + 1 {
                return Err(Error::CutoffTooSmall { cutoff, n: self.n });
            }
        }
        if !self.phi0.is_finite() {
            return Err(Error::InvalidSpec("phi0 must be finite".into()));
        }
        self.numerics.validate()
    }
}

/// Charging time scale: `1/(gN)` for the spin model and `1/(g sqrt N)` for
/// the boson-mediated models. Independent of `omega0`.
pub fn natural_timescale(spec: &ModelSpec) -> Result<f64> {
    if spec.g <= 0.0 {
        return Err(Error::NoCoupling);
    }
    let n = spec.n as f64;
    Ok(match spec.kind {
        ModelKind::Spin => 1.0 / (spec.g * n),
        ModelKind::Harmonic | ModelKind::Dicke => 1.0 / (spec.g * n.sqrt()),
    })
}

/// Layout of the truncated Hilbert space a [`StateVector`] lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Basis {
    /// Two-mode sector with a fixed number of excitations; index `k` holds
    /// `k` charger quanta and `excitations - k` bright-mode quanta.
    Sector { excitations: usize },
    /// Tensor product, first factor most significant.
    Tensor(Vec<BasisFactor>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisFactor {
    pub label: &'static str,
    pub dim: usize,
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::Sector { excitations } => excitations + 1,
            Basis::Tensor(factors) => factors.iter().map(|f| f.dim).product(),
        }
    }

    /// Flat index of a tensor-product basis element.
    pub fn index(&self, digits: &[usize]) -> usize {
        match self {
            Basis::Sector { .. } => digits[0],
            Basis::Tensor(factors) => {
                debug_assert_eq!(factors.len(), digits.len());
                factors.iter().zip(digits).fold(0, |acc, (f, &d)| {
                    debug_assert!(d < f.dim);
                    acc * f.dim + d
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
    pub basis: Basis,
}

impl StateVector {
    pub fn basis_state(basis: Basis, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        StateVector { amplitudes, basis }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Spin basis index of `J_z = m` in the descending ordering used by the
/// collective spin operators (index 0 is `m = +J`).
pub fn spin_index(n: usize, m_plus_j: usize) -> usize {
    n - m_plus_j
}

/// Factorised initial state: charger holding `N` excitations, battery in
/// its ground state.
pub fn initial_state_quantum(spec: &ModelSpec) -> Result<StateVector> {
    spec.validate()?;
    if spec.side != Side::Quantum {
        return Err(Error::Unsupported(format!(
            "quantum initial state for {} {} model",
            spec.side, spec.kind
        )));
    }
    let n = spec.n;
    Ok(match spec.kind {
        ModelKind::Harmonic => {
            let basis = Basis::Sector { excitations: n };
            StateVector::basis_state(basis, n)
        }
        ModelKind::Spin => {
            let basis = Basis::Tensor(vec![
                BasisFactor { label: "charger", dim: n + 1 },
                BasisFactor { label: "battery", dim: n + 1 },
            ]);
            let index = basis.index(&[spin_index(n, n), spin_index(n, 0)]);
            StateVector::basis_state(basis, index)
        }
        ModelKind::Dicke => {
            let basis = Basis::Tensor(vec![
                BasisFactor { label: "cavity", dim: spec.effective_cutoff() },
                BasisFactor { label: "battery", dim: n + 1 },
            ]);
            let index = basis.index(&[n, spin_index(n, 0)]);
            StateVector::basis_state(basis, index)
        }
    })
}

/// Harmonic phase point. Battery units are listed individually.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicPoint {
    pub p_a: f64,
    pub q_a: f64,
    pub p_b: Vec<f64>,
    pub q_b: Vec<f64>,
}

impl HarmonicPoint {
    /// Bright-mode coordinates `(P_b, Q_b) = sum_i (p_i, q_i) / sqrt(N)`.
    pub fn collective(&self) -> (f64, f64) {
        let scale = 1.0 / (self.p_b.len() as f64).sqrt();
        (
            self.p_b.iter().sum::<f64>() * scale,
            self.q_b.iter().sum::<f64>() * scale,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinPoint {
    pub cos_theta_a: f64,
    pub phi_a: f64,
    pub cos_theta_b: f64,
    pub phi_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickePoint {
    pub p_a: f64,
    pub q_a: f64,
    pub cos_theta: f64,
    pub phi: f64,
}

/// Canonical coordinates of a classical model.
#[derive(Debug, Clone, PartialEq)]
pub enum PhasePoint {
    Harmonic(HarmonicPoint),
    Spin(SpinPoint),
    Dicke(DickePoint),
}

impl PhasePoint {
    pub fn kind(&self) -> ModelKind {
        match self {
            PhasePoint::Harmonic(_) => ModelKind::Harmonic,
            PhasePoint::Spin(_) => ModelKind::Spin,
            PhasePoint::Dicke(_) => ModelKind::Dicke,
        }
    }

    /// All `cos(theta)` components, in declaration order.
    pub fn cos_thetas(&self) -> Vec<f64> {
        match self {
            PhasePoint::Harmonic(_) => Vec::new(),
            PhasePoint::Spin(s) => vec![s.cos_theta_a, s.cos_theta_b],
            PhasePoint::Dicke(d) => vec![d.cos_theta],
        }
    }
}

/// Lowest-energy battery and a charger holding `N omega0` (up to the tilt
/// for spin chargers).
pub fn initial_state_classical(spec: &ModelSpec) -> Result<PhasePoint> {
    spec.validate()?;
    if spec.side != Side::Classical {
        return Err(Error::Unsupported(format!(
            "classical initial state for {} {} model",
            spec.side, spec.kind
        )));
    }
    let root_n = (spec.n as f64).sqrt();
    let eps = spec.epsilon;
    Ok(match spec.kind {
        ModelKind::Harmonic => PhasePoint::Harmonic(HarmonicPoint {
            p_a: root_n,
            q_a: root_n,
            p_b: vec![0.0; spec.n],
            q_b: vec![0.0; spec.n],
        }),
        ModelKind::Spin => PhasePoint::Spin(SpinPoint {
            cos_theta_a: eps.cos(),
            phi_a: spec.phi0,
            cos_theta_b: (std::f64::consts::PI - eps).cos(),
            phi_b: spec.phi0,
        }),
        ModelKind::Dicke => PhasePoint::Dicke(DickePoint {
            p_a: root_n,
            q_a: root_n,
            cos_theta: (std::f64::consts::PI - eps).cos(),
            phi: spec.phi0,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ModelKind, side: Side, n: usize, g: f64) -> ModelSpec {
        ModelSpec::new(kind, side, n, g)
    }

    #[test]
    fn natural_timescale_examples() {
        let t = natural_timescale(&spec(ModelKind::Spin, Side::Quantum, 4, 1.0)).unwrap();
        assert_eq!(t, 0.25);
        let t = natural_timescale(&spec(ModelKind::Harmonic, Side::Quantum, 9, 1.0)).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-15);
        let t = natural_timescale(&spec(ModelKind::Dicke, Side::Quantum, 16, 0.5)).unwrap();
        assert_eq!(t, 0.5);
    }

    #[test]
    fn natural_timescale_rejects_zero_coupling() {
        let err = natural_timescale(&spec(ModelKind::Spin, Side::Quantum, 4, 0.0)).unwrap_err();
        assert_eq!(err.to_string(), "no coupling; charging time undefined");
    }

    #[test]
    fn natural_timescale_is_homogeneous() {
        for kind in ModelKind::ALL {
            let base = spec(kind, Side::Quantum, 7, 0.3);
            let t = natural_timescale(&base).unwrap();
            let doubled = ModelSpec { g: 0.6, ..base.clone() };
            assert!((natural_timescale(&doubled).unwrap() - t / 2.0).abs() < 1e-14);
            let other_omega = base.with_omega0(5.0);
            assert_eq!(natural_timescale(&other_omega).unwrap(), t);
        }
    }

    #[test]
    fn validation() {
        assert!(spec(ModelKind::Spin, Side::Quantum, 0, 1.0).validate().is_err());
        assert!(spec(ModelKind::Spin, Side::Quantum, 1, -1.0).validate().is_err());
        assert!(spec(ModelKind::Spin, Side::Quantum, 1, 1.0).with_omega0(0.0).validate().is_err());
        let tilted = spec(ModelKind::Spin, Side::Classical, 2, 1.0).with_epsilon(1.0);
        assert!(tilted.validate().is_err());
        assert!(tilted.with_side(Side::Quantum).validate().is_ok());
        let dicke = spec(ModelKind::Dicke, Side::Quantum, 4, 1.0).with_cutoff(4);
        assert!(matches!(dicke.validate(), Err(Error::CutoffTooSmall { .. })));
        assert!(dicke.with_cutoff(5).validate().is_ok());
        let mut numerics = NumericsConfig::default();
        numerics.grid_points = 50;
        assert!(spec(ModelKind::Harmonic, Side::Quantum, 1, 1.0)
            .with_numerics(numerics)
            .validate()
            .is_err());
    }

    #[test]
    fn quantum_initial_states() {
        let psi = initial_state_quantum(&spec(ModelKind::Spin, Side::Quantum, 1, 1.0)).unwrap();
        // |up>_A |down>_B
        assert_eq!(psi.dim(), 4);
        assert_eq!(psi.amplitudes[1], Complex64::new(1.0, 0.0));

        let psi = initial_state_quantum(&spec(ModelKind::Dicke, Side::Quantum, 2, 1.0).with_cutoff(8))
            .unwrap();
        assert_eq!(psi.dim(), 24);
        // photons = 2, J_z = -1 sits at spin index 2
        assert_eq!(psi.amplitudes[2 * 3 + 2], Complex64::new(1.0, 0.0));

        let psi = initial_state_quantum(&spec(ModelKind::Harmonic, Side::Quantum, 3, 1.0)).unwrap();
        assert_eq!(psi.basis, Basis::Sector { excitations: 3 });
        assert_eq!(psi.amplitudes[3], Complex64::new(1.0, 0.0));
        assert!((psi.norm() - 1.0).abs() < 1e-15);

        assert!(initial_state_quantum(&spec(ModelKind::Harmonic, Side::Classical, 3, 1.0)).is_err());
    }

    #[test]
    fn classical_initial_points() {
        let x = initial_state_classical(&spec(ModelKind::Harmonic, Side::Classical, 4, 1.0)).unwrap();
        let PhasePoint::Harmonic(h) = x else { panic!() };
        assert_eq!((h.p_a, h.q_a), (2.0, 2.0));
        assert!(h.p_b.iter().chain(&h.q_b).all(|&v| v == 0.0));
        assert_eq!(0.5 * (h.p_a * h.p_a + h.q_a * h.q_a), 4.0);

        let x = initial_state_classical(&spec(ModelKind::Spin, Side::Classical, 2, 1.0)).unwrap();
        let PhasePoint::Spin(s) = x else { panic!() };
        assert!((s.cos_theta_a - 0.9999995).abs() < 1e-9);
        assert!((s.cos_theta_b + 0.9999995).abs() < 1e-9);
        assert_eq!((s.phi_a, s.phi_b), (0.0, 0.0));

        let x = initial_state_classical(&spec(ModelKind::Dicke, Side::Classical, 1, 1.0)).unwrap();
        let PhasePoint::Dicke(d) = x else { panic!() };
        assert_eq!((d.p_a, d.q_a), (1.0, 1.0));
        assert!((d.cos_theta + 1e-3f64.cos()).abs() < 1e-15);

        assert!(initial_state_classical(&spec(ModelKind::Dicke, Side::Quantum, 1, 1.0)).is_err());
    }
}
