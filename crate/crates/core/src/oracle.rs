//! Closed-form results for the harmonic model.
//!
//! Both the quantum and the classical harmonic battery store
//! `E_B(t) = N omega0 sin^2(g sqrt(N) t)`, so every figure of merit
//! follows from the maximiser of `sin^2(x)/x`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::metrics::ChargingMetrics;
use crate::optimize::{bisect, golden_section_max};

/// Maximiser `x_star` and maximum `y` of `sin^2(x)/x` on `(0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConstant {
    pub x_star: f64,
    pub y: f64,
}

fn sin2_over_x(x: f64) -> f64 {
    x.sin().powi(2) / x
}

/// Numerator of the derivative of `sin^2(x)/x`: `x sin(2x) - sin^2(x)`.
fn stationarity(x: f64) -> f64 {
    x * (2.0 * x).sin() - x.sin().powi(2)
}

fn compute_power_constant() -> PowerConstant {
    // golden section isolates the peak; bisection on the derivative sign
    // then resolves it to machine precision
    let (x0, _) = golden_section_max(|x| Ok(sin2_over_x(x)), 1e-3, std::f64::consts::PI - 1e-3, 1e-6)
        .expect("infallible objective");
    let x_star = bisect(stationarity, x0 - 1e-3, x0 + 1e-3);
    PowerConstant { x_star, y: sin2_over_x(x_star) }
}

/// `(x_star, Y)`, computed once per process.
pub fn power_constant() -> PowerConstant {
    static CONSTANT: OnceLock<PowerConstant> = OnceLock::new();
    *CONSTANT.get_or_init(compute_power_constant)
}

/// `N omega0 sin^2(g sqrt(N) tau)`.
pub fn harmonic_energy(n: usize, g: f64, omega0: f64, tau: f64) -> f64 {
    let n = n as f64;
    n * omega0 * (g * n.sqrt() * tau).sin().powi(2)
}

/// Maximum average power, optimal charging time and stored energy of the
/// harmonic battery.
pub fn harmonic_metrics(n: usize, g: f64, omega0: f64) -> Result<ChargingMetrics> {
    if g <= 0.0 {
        return Err(Error::NoCoupling);
    }
    let PowerConstant { x_star, y } = power_constant();
    let nf = n as f64;
    let tau_bar = x_star / (g * nf.sqrt());
    let e_bar = nf * omega0 * x_star.sin().powi(2);
    Ok(ChargingMetrics { p_bar: nf * nf.sqrt() * g * omega0 * y, tau_bar, e_bar })
}
