//! Integration of rate bounds `dF/dt <= R(t, F)` into bound curves.

use log::warn;

use super::curves::BoundCurve;
use crate::dynamics::check_grid;
use crate::error::{Error, Result};

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const RTOL: f64 = 1e-11;
const ATOL: f64 = 1e-30;
/// Offset added to a zero start so the integrator leaves the spurious
/// `F = 0` solution of square-root rates.
const ZERO_START: f64 = 1e-24;
const MAX_STEPS: usize = 10_000_000;

/// Solves `dF/dt = rate(t, F)` from `F(t_grid[0]) = f0` and samples the
/// solution on `t_grid`. Negative rates are clipped to zero.
pub fn integrate_rate_bound<R>(rate: R, f0: f64, t_grid: &[f64]) -> Result<BoundCurve>
where
    R: Fn(f64, f64) -> f64,
{
    check_grid(t_grid)?;
    if !(f0 >= 0.0) || !f0.is_finite() {
        return Err(Error::Domain { value: f0, domain: "F0 >= 0" });
    }
    let mut clipped = false;
    let mut eval = |t: f64, f: f64| -> Result<f64> {
        let r = rate(t, f.max(0.0));
        if r.is_nan() {
            return Err(Error::NonFinite);
        }
        if r < 0.0 {
            clipped = true;
            return Ok(0.0);
        }
        Ok(r)
    };

    let mut out = Vec::with_capacity(t_grid.len());
    out.push(f0);
    let mut t = t_grid[0];
    let mut f = if f0 == 0.0 { ZERO_START } else { f0 };
    let span = t_grid[t_grid.len() - 1] - t;
    let mut h = (span * 1e-6).max(1e-12);
    let mut steps = 0usize;
    let mut k = [0.0f64; 7];
    k[0] = eval(t, f)?;
    for &target in &t_grid[1..] {
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Convergence(format!("rate integration exceeded {MAX_STEPS} steps at t = {t}")));
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            for s in 1..7 {
                let mut y = f;
                for j in 0..s {
                    y += step * A[s][j] * k[j];
                }
                k[s] = eval(t + C[s] * step, y)?;
            }
            let mut f5 = f;
            let mut err = 0.0;
            for s in 0..7 {
                f5 += step * B5[s] * k[s];
                err += step * (B5[s] - B4[s]) * k[s];
            }
            let scale = ATOL + RTOL * f.abs().max(f5.abs());
            let ratio = err.abs() / scale;
            if ratio <= 1.0 {
                t = if last { target } else { t + step };
                f = f5;
                // first-same-as-last
                k[0] = k[6];
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            if !(last && ratio <= 1.0) {
                h = step * factor;
            }
        }
        out.push(f.max(0.0));
    }
    if clipped {
        warn!("rate bound returned negative values; clipped to zero");
    }
    BoundCurve::sampled(t_grid.to_vec(), out)
}

/// `4 sum_j (f_j')^2 <L_j^dag L_j>` for Lindblad operators whose parameter
/// dependence is a scalar magnitude `f_j(g)`.
pub fn lindblad_magnitude_bound(f_prime: &[f64], expectations: &[f64]) -> Result<f64> {
    if f_prime.len() != expectations.len() {
        return Err(Error::DimensionMismatch { expected: f_prime.len(), got: expectations.len() });
    }
    if let Some(&bad) = expectations.iter().find(|&&e| !(e >= 0.0)) {
        return Err(Error::Domain { value: bad, domain: "<L^dag L> >= 0" });
    }
    Ok(4.0 * f_prime.iter().zip(expectations).map(|(d, e)| d * d * e).sum::<f64>())
}
