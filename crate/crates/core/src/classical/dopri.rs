//! Dormand-Prince 5(4) with step-size control and 4th-order dense output.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

type State<const D: usize> = [f64; D];

fn axpy<const D: usize>(y: &State<D>, h: f64, terms: &[(f64, &State<D>)]) -> State<D> {
    let mut out = *y;
    for (coef, k) in terms {
        for i in 0..D {
            out[i] += h * coef * k[i];
        }
    }
    out
}

/// Accepted step with its continuous extension.
struct Dense<const D: usize> {
    t0: f64,
    h: f64,
    r: [State<D>; 5],
}

impl<const D: usize> Dense<D> {
    fn eval(&self, t: f64) -> State<D> {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let mut out = [0.0; D];
        for i in 0..D {
            let r = |j: usize| self.r[j][i];
            out[i] = r(0) + s * (r(1) + s1 * (r(2) + s * (r(3) + s1 * r(4))));
        }
        out
    }
}

/// Integrates `dy/dt = f(t, y)` from `grid[0]` and returns the solution at
/// every grid time. A failing right-hand side rejects the trial step;
/// the failure is reported only if the step size underflows.
pub fn solve_on_grid<const D: usize, F>(
    mut f: F,
    y0: State<D>,
    grid: &[f64],
    tol: Tolerances,
) -> Result<Vec<State<D>>>
where
    F: FnMut(f64, &State<D>) -> Result<State<D>>,
{
    let mut out = Vec::with_capacity(grid.len());
    let Some(&t_start) = grid.first() else {
        return Ok(out);
    };
    let t_end = *grid.last().unwrap();
    out.push(y0);
    if grid.len() == 1 {
        return Ok(out);
    }

    let err_norm = |y: &State<D>, y1: &State<D>, e: &State<D>| {
        let mut acc = 0.0;
        for i in 0..D {
            let sc = tol.abs + tol.rel * y[i].abs().max(y1[i].abs());
            acc += (e[i] / sc).powi(2);
        }
        (acc / D as f64).sqrt()
    };

    let mut t = t_start;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let span = t_end - t_start;

    // initial step from the first derivative scale
    let mut h = {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..D {
            let sc = tol.abs + tol.rel * y[i].abs();
            d0 += (y[i] / sc).powi(2);
            d1 += (k1[i] / sc).powi(2);
        }
        let (d0, d1) = ((d0 / D as f64).sqrt(), (d1 / D as f64).sqrt());
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0.min(span)
    };

    let mut next = 1;
    let mut last_error: Option<Error> = None;
    while next < grid.len() {
        let h_floor = 1e-14 * t.abs().max(span);
        if h < h_floor {
            return Err(last_error.unwrap_or(Error::StepUnderflow { t, h }));
        }
        let last_step = t + h >= t_end;
        if last_step {
            h = t_end - t;
        }

        let stages = (|| -> Result<_> {
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = f(
                t + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(t + h, &y1)?;
            Ok((k2, k3, k4, k5, k6, k7, y1))
        })();

        let (_k2, k3, k4, k5, k6, k7, y1) = match stages {
            Ok(s) => s,
            Err(e) => {
                last_error = Some(e);
                h *= 0.25;
                continue;
            }
        };
        let mut e = [0.0; D];
        for i in 0..D {
            e[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = err_norm(&y, &y1, &e);
        if !err.is_finite() {
            last_error = Some(Error::NonFinite { t });
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            let t1 = if last_step { t_end } else { t + h };
            let mut r = [[0.0; D]; 5];
            for i in 0..D {
                let dy = y1[i] - y[i];
                let bspl = h * k1[i] - dy;
                r[0][i] = y[i];
                r[1][i] = dy;
                r[2][i] = bspl;
                r[3][i] = dy - h * k7[i] - bspl;
                r[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let dense = Dense { t0: t, h, r };
            while next < grid.len() && grid[next] < t1 {
                out.push(dense.eval(grid[next]));
                next += 1;
            }
            while next < grid.len() && grid[next] == t1 {
                out.push(y1);
                next += 1;
            }
            t = t1;
            y = y1;
            k1 = k7;
            last_error = None;
            let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 10.0);
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TIGHT: Tolerances = Tolerances { rel: 1e-11, abs: 1e-13 };

    #[test]
    fn harmonic_oscillator_on_grid() {
        let grid: Vec<f64> = (0..500).map(|i| i as f64 * 0.05).collect();
        let sol = solve_on_grid(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), [1.0, 0.0], &grid, TIGHT).unwrap();
        for (t, y) in grid.iter().zip(&sol) {
            assert!((y[0] - t.cos()).abs() < 1e-9, "t = {t}");
            assert!((y[1] + t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn exponential_growth() {
        let grid = [0.0, 0.3, 1.7, 2.0];
        let sol = solve_on_grid(|_, y: &[f64; 1]| Ok([y[0]]), [1.0], &grid, TIGHT).unwrap();
        for (t, y) in grid.iter().zip(&sol) {
            assert!((y[0] / t.exp() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn persistent_rhs_failure_is_reported() {
        let grid = [0.0, 1.0];
        let res = solve_on_grid(
            |t, y: &[f64; 1]| {
                if t > 0.5 {
                    Err(Error::Singularity { coordinate: "theta", sin_theta: 0.0 })
                } else {
                    Ok([y[0]])
                }
            },
            [1.0],
            &grid,
            TIGHT,
        );
        assert!(matches!(res, Err(Error::Singularity { .. })));
    }
}
