//! Hamilton's equations for the classical analogs of the three models.
//!
//! Spins are described by the canonical pair `(N cos(theta) / 2, phi)`.
//! The harmonic battery is integrated through its collective coordinates
//! `(P_b, Q_b)`; the remaining (dark) combinations of the battery
//! oscillators decouple and rotate freely at `omega0`.

pub mod dopri;

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::metrics::{Diagnostics, EnergyProbe, Trajectory};
use crate::model::{
    initial_state_classical, DickePoint, HarmonicPoint, ModelKind, ModelSpec, PhasePoint, Side,
    SpinPoint,
};
use crate::quantum::charging_grid;
use dopri::{solve_on_grid, Tolerances};

/// Internal integration state. Harmonic: `(p_a, q_a, P_b, Q_b)`;
/// spin: `(cos theta_a, phi_a, cos theta_b, phi_b)`; Dicke:
/// `(p_a, q_a, cos theta, phi)`.
pub type Coordinates = [f64; 4];

/// `|sin(theta)|` below which the angular equations are singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// Energy drift allowed along an accepted path, in units of `N omega0`.
pub const ENERGY_DRIFT_TOL: f64 = 1e-8;

fn sin_from_cos(cos_theta: f64, coordinate: &'static str) -> Result<f64> {
    let s = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    if s < SINGULARITY_THRESHOLD || cos_theta.is_nan() {
        return Err(Error::Singularity { coordinate, sin_theta: s });
    }
    Ok(s)
}

/// Parameters entering the classical equations of motion.
#[derive(Debug, Clone)]
pub struct ClassicalModel {
    pub kind: ModelKind,
    pub n: usize,
    pub g: f64,
    pub omega0: f64,
}

impl ClassicalModel {
    pub fn new(spec: &ModelSpec) -> Self {
        ClassicalModel { kind: spec.kind, n: spec.n, g: spec.g, omega0: spec.omega0 }
    }

    fn n(&self) -> f64 {
        self.n as f64
    }

    /// Right-hand side of Hamilton's equations.
    pub fn rhs(&self, x: &Coordinates) -> Result<Coordinates> {
        let w = self.omega0;
        let g = self.g;
        let n = self.n();
        Ok(match self.kind {
            ModelKind::Harmonic => {
                let g_n = n.sqrt() * g;
                let [p_a, q_a, p_b, q_b] = *x;
                [
                    -w * q_a - g_n * q_b,
                    w * p_a + g_n * p_b,
                    -w * q_b - g_n * q_a,
                    w * p_b + g_n * p_a,
                ]
            }
            ModelKind::Spin => {
                let [c_a, phi_a, c_b, phi_b] = *x;
                let s_a = sin_from_cos(c_a, "theta_a")?;
                let s_b = sin_from_cos(c_b, "theta_b")?;
                let (sin_d, cos_d) = (phi_a - phi_b).sin_cos();
                let k = 2.0 * g * n;
                [
                    k * s_a * s_b * sin_d,
                    w - k * (c_a / s_a) * s_b * cos_d,
                    -k * s_a * s_b * sin_d,
                    w - k * (c_b / s_b) * s_a * cos_d,
                ]
            }
            ModelKind::Dicke => {
                let [p_a, q_a, c, phi] = *x;
                let s = sin_from_cos(c, "theta")?;
                let (sin_phi, cos_phi) = phi.sin_cos();
                [
                    -w * q_a - SQRT_2 * n * g * s * cos_phi,
                    w * p_a,
                    2.0 * SQRT_2 * g * q_a * s * sin_phi,
                    w - 2.0 * SQRT_2 * g * q_a * cos_phi * (c / s),
                ]
            }
        })
    }

    pub fn charger_energy(&self, x: &Coordinates) -> f64 {
        match self.kind {
            ModelKind::Harmonic | ModelKind::Dicke => 0.5 * self.omega0 * (x[0] * x[0] + x[1] * x[1]),
            ModelKind::Spin => 0.5 * self.n() * self.omega0 * (x[0] + 1.0),
        }
    }

    /// Battery energy of the collective coordinates (dark harmonic modes
    /// excluded).
    pub fn battery_energy(&self, x: &Coordinates) -> f64 {
        match self.kind {
            ModelKind::Harmonic => 0.5 * self.omega0 * (x[2] * x[2] + x[3] * x[3]),
            ModelKind::Spin => 0.5 * self.n() * self.omega0 * (x[2] + 1.0),
            ModelKind::Dicke => 0.5 * self.n() * self.omega0 * (x[2] + 1.0),
        }
    }

    pub fn coupling_energy(&self, x: &Coordinates) -> f64 {
        let n = self.n();
        match self.kind {
            ModelKind::Harmonic => n.sqrt() * self.g * (x[1] * x[3] + x[0] * x[2]),
            ModelKind::Spin => {
                let s_a = (1.0 - x[0] * x[0]).max(0.0).sqrt();
                let s_b = (1.0 - x[2] * x[2]).max(0.0).sqrt();
                self.g * n * n * s_a * s_b * (x[1] - x[3]).cos()
            }
            ModelKind::Dicke => {
                let s = (1.0 - x[2] * x[2]).max(0.0).sqrt();
                SQRT_2 * self.g * n * x[1] * s * x[3].cos()
            }
        }
    }

    pub fn total_energy(&self, x: &Coordinates) -> f64 {
        self.charger_energy(x) + self.battery_energy(x) + self.coupling_energy(x)
    }
}

/// Dark-mode amplitudes of a harmonic battery: per-unit displacement
/// orthogonal to the bright mode.
#[derive(Debug, Clone)]
struct DarkModes {
    p: Vec<f64>,
    q: Vec<f64>,
    omega0: f64,
}

impl DarkModes {
    fn from_point(h: &HarmonicPoint, omega0: f64) -> Self {
        let (p_b, q_b) = h.collective();
        let scale = 1.0 / (h.p_b.len() as f64).sqrt();
        DarkModes {
            p: h.p_b.iter().map(|p| p - p_b * scale).collect(),
            q: h.q_b.iter().map(|q| q - q_b * scale).collect(),
            omega0,
        }
    }

    fn energy(&self) -> f64 {
        0.5 * self.omega0 * self.p.iter().chain(&self.q).map(|v| v * v).sum::<f64>()
    }

    fn point_at(&self, t: f64, x: &Coordinates) -> HarmonicPoint {
        let (s, c) = (self.omega0 * t).sin_cos();
        let scale = 1.0 / (self.p.len() as f64).sqrt();
        HarmonicPoint {
            p_a: x[0],
            q_a: x[1],
            p_b: self.p.iter().zip(&self.q).map(|(p, q)| x[2] * scale + p * c - q * s).collect(),
            q_b: self.p.iter().zip(&self.q).map(|(p, q)| x[3] * scale + q * c + p * s).collect(),
        }
    }
}

fn to_coordinates(x: &PhasePoint) -> Coordinates {
    match x {
        PhasePoint::Harmonic(h) => {
            let (p_b, q_b) = h.collective();
            [h.p_a, h.q_a, p_b, q_b]
        }
        PhasePoint::Spin(s) => [s.cos_theta_a, s.phi_a, s.cos_theta_b, s.phi_b],
        PhasePoint::Dicke(d) => [d.p_a, d.q_a, d.cos_theta, d.phi],
    }
}

/// Time derivative of a phase point. For the harmonic model each battery
/// unit's derivative is returned individually.
pub fn hamilton_rhs(spec: &ModelSpec, x: &PhasePoint) -> Result<PhasePoint> {
    if x.kind() != spec.kind {
        return Err(Error::Unsupported(format!("{} phase point for {} model", x.kind(), spec.kind)));
    }
    let model = ClassicalModel::new(spec);
    let w = spec.omega0;
    let g = spec.g;
    match x {
        PhasePoint::Harmonic(h) => {
            if h.p_b.len() != spec.n || h.q_b.len() != spec.n {
                return Err(Error::DimensionMismatch { expected: spec.n, found: h.p_b.len() });
            }
            let (p_b, q_b) = h.collective();
            let g_n = spec.collective_coupling();
            Ok(PhasePoint::Harmonic(HarmonicPoint {
                p_a: -w * h.q_a - g_n * q_b,
                q_a: w * h.p_a + g_n * p_b,
                p_b: h.q_b.iter().map(|q| -w * q - g * h.q_a).collect(),
                q_b: h.p_b.iter().map(|p| w * p + g * h.p_a).collect(),
            }))
        }
        PhasePoint::Spin(_) => {
            let d = model.rhs(&to_coordinates(x))?;
            Ok(PhasePoint::Spin(SpinPoint { cos_theta_a: d[0], phi_a: d[1], cos_theta_b: d[2], phi_b: d[3] }))
        }
        PhasePoint::Dicke(_) => {
            let d = model.rhs(&to_coordinates(x))?;
            Ok(PhasePoint::Dicke(DickePoint { p_a: d[0], q_a: d[1], cos_theta: d[2], phi: d[3] }))
        }
    }
}

/// Solution of Hamilton's equations sampled on a time grid.
#[derive(Debug, Clone)]
pub struct ClassicalPath {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub e_battery: Vec<f64>,
    pub e_total: Vec<f64>,
    /// Tolerances of the accepted integration.
    pub tolerances: Tolerances,
    coordinates: Vec<Coordinates>,
}

impl ClassicalPath {
    pub fn energy_drift(&self) -> f64 {
        self.e_total.iter().map(|e| (e - self.e_total[0]).abs()).fold(0.0, f64::max)
    }

    /// Largest `|cos(theta)|` visited.
    pub fn max_abs_cos_theta(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.cos_thetas())
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

struct Integrator {
    model: ClassicalModel,
    dark: Option<DarkModes>,
}

impl Integrator {
    fn new(spec: &ModelSpec, x0: &PhasePoint) -> Result<Self> {
        if x0.kind() != spec.kind {
            return Err(Error::Unsupported(format!("{} phase point for {} model", x0.kind(), spec.kind)));
        }
        let dark = match x0 {
            PhasePoint::Harmonic(h) => {
                if h.p_b.len() != spec.n || h.q_b.len() != spec.n {
                    return Err(Error::DimensionMismatch { expected: spec.n, found: h.p_b.len() });
                }
                Some(DarkModes::from_point(h, spec.omega0))
            }
            _ => None,
        };
        Ok(Integrator { model: ClassicalModel::new(spec), dark })
    }

    fn solve(&self, y0: Coordinates, grid: &[f64], tol: Tolerances) -> Result<Vec<Coordinates>> {
        solve_on_grid(|_, y| self.model.rhs(y), y0, grid, tol)
    }

    fn battery_energy(&self, y: &Coordinates) -> f64 {
        self.model.battery_energy(y) + self.dark.as_ref().map_or(0.0, DarkModes::energy)
    }

    fn total_energy(&self, y: &Coordinates) -> f64 {
        self.model.total_energy(y) + self.dark.as_ref().map_or(0.0, DarkModes::energy)
    }

    fn point(&self, t: f64, y: &Coordinates) -> PhasePoint {
        match self.model.kind {
            ModelKind::Harmonic => PhasePoint::Harmonic(
                self.dark.as_ref().expect("harmonic dark modes").point_at(t, y),
            ),
            ModelKind::Spin => PhasePoint::Spin(SpinPoint {
                cos_theta_a: y[0],
                phi_a: y[1],
                cos_theta_b: y[2],
                phi_b: y[3],
            }),
            ModelKind::Dicke => {
                PhasePoint::Dicke(DickePoint { p_a: y[0], q_a: y[1], cos_theta: y[2], phi: y[3] })
            }
        }
    }
}

/// Adaptive integration of Hamilton's equations from `x0`, sampled on
/// `grid` (starting at 0, increasing). A path whose total energy drifts by
/// more than `1e-8 N omega0` is retried once with tolerances tightened
/// tenfold, then rejected.
pub fn integrate(spec: &ModelSpec, x0: &PhasePoint, grid: &[f64]) -> Result<ClassicalPath> {
    crate::quantum::evolve::validate_grid(grid)?;
    let integrator = Integrator::new(spec, x0)?;
    let y0 = to_coordinates(x0);
    let threshold = ENERGY_DRIFT_TOL * spec.n as f64 * spec.omega0;
    let mut tol = Tolerances { rel: spec.numerics.ode_rel_tol, abs: spec.numerics.ode_abs_tol };
    let mut attempt = 0;
    loop {
        let coordinates = integrator.solve(y0, grid, tol)?;
        let e_total: Vec<f64> = coordinates.iter().map(|y| integrator.total_energy(y)).collect();
        let drift = e_total.iter().map(|e| (e - e_total[0]).abs()).fold(0.0, f64::max);
        if drift > threshold {
            if attempt == 0 {
                log::debug!("energy drift {drift:e} above {threshold:e}; tightening tolerances");
                tol = Tolerances { rel: tol.rel / 10.0, abs: tol.abs / 10.0 };
                attempt += 1;
                continue;
            }
            return Err(Error::EnergyDrift { drift, threshold });
        }
        let e_battery = coordinates.iter().map(|y| integrator.battery_energy(y)).collect();
        let points = grid.iter().zip(&coordinates).map(|(&t, y)| integrator.point(t, y)).collect();
        return Ok(ClassicalPath {
            times: grid.to_vec(),
            points,
            e_battery,
            e_total,
            tolerances: tol,
            coordinates,
        });
    }
}

/// Re-integrates from the nearest stored grid point to evaluate the
/// battery energy at arbitrary times.
pub struct ClassicalProbe {
    integrator: Integrator,
    times: Vec<f64>,
    coordinates: Vec<Coordinates>,
    tol: Tolerances,
}

impl EnergyProbe for ClassicalProbe {
    fn energy_at(&mut self, t: f64) -> Result<f64> {
        let k = self.times.partition_point(|&tk| tk <= t).saturating_sub(1);
        let t0 = self.times[k];
        if t == t0 {
            return Ok(self.integrator.battery_energy(&self.coordinates[k]));
        }
        let y = self.integrator.solve(self.coordinates[k], &[t0, t], self.tol)?;
        Ok(self.integrator.battery_energy(&y[1]))
    }
}

/// Runs the classical engine over the default grid and keeps a probe for
/// re-evaluation at arbitrary charging times.
pub fn classical_run(spec: &ModelSpec) -> Result<(Trajectory, ClassicalPath, ClassicalProbe)> {
    spec.validate()?;
    if spec.side != Side::Classical {
        return Err(Error::Unsupported(format!("classical engine for {} side", spec.side)));
    }
    let grid = charging_grid(spec)?;
    let x0 = initial_state_classical(spec)?;
    let path = integrate(spec, &x0, &grid)?;
    let integrator = Integrator::new(spec, &x0)?;
    let y0 = to_coordinates(&x0);
    // tilted spins start slightly above the battery ground state
    let baseline = integrator.battery_energy(&y0);
    let diagnostics = Diagnostics {
        n: spec.n,
        omega0: spec.omega0,
        initial_charger_energy: integrator.model.charger_energy(&y0),
        initial_battery_energy: baseline,
        battery_baseline: baseline,
        energy_drift: path.energy_drift(),
        norm_drift: None,
        excitation_drift: None,
        cutoff: None,
    };
    let trajectory = Trajectory::new(path.times.clone(), path.e_battery.clone(), diagnostics)?;
    let probe = ClassicalProbe {
        integrator,
        times: path.times.clone(),
        coordinates: path.coordinates.clone(),
        tol: path.tolerances,
    };
    Ok((trajectory, path, probe))
}

/// Battery-energy trajectory of the classical model over the default grid.
pub fn classical_energy_trajectory(spec: &ModelSpec) -> Result<Trajectory> {
    classical_run(spec).map(|(t, _, _)| t)
}
