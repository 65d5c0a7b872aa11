//! Lower real branch `W_{-1}` of the Lambert W function.
//!
//! The solver works with `z = -W_{-1}(-e^{-1-u})`, the root `z >= 1` of
//! `z - ln z = 1 + u`. Parameterizing by `u` keeps large arguments finite
//! where `-e^{-1-u}` would underflow.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// Lower sandwich bound `1 + sqrt(2u) + 2u/3` on `z(u)`.
pub fn sandwich_lower(u: f64) -> f64 {
    1.0 + (2.0 * u).sqrt() + 2.0 * u / 3.0
}

/// Upper sandwich bound `1 + sqrt(2u) + u` on `z(u)`.
pub fn sandwich_upper(u: f64) -> f64 {
    1.0 + (2.0 * u).sqrt() + u
}

/// Root `z >= 1` of `z - ln z = 1 + u` for `u >= 0`.
pub fn neg_wm1_of_u(u: f64) -> Result<f64> {
    if !(u >= 0.0) || u.is_infinite() {
        return Err(Error::Domain { value: u, domain: "u >= 0" });
    }
    if u == 0.0 {
        return Ok(1.0);
    }
    let mut z = if u < 1e-2 {
        let v = (2.0 * u).sqrt();
        1.0 + v * (1.0 + v * (1.0 / 3.0 + v * (1.0 / 36.0 - v / 270.0)))
    } else {
        0.5 * (sandwich_lower(u) + sandwich_upper(u))
    };
    for _ in 0..60 {
        // Halley on phi(z) = z - ln z - 1 - u
        let phi = z - z.ln() - 1.0 - u;
        let d1 = 1.0 - 1.0 / z;
        let d2 = 1.0 / (z * z);
        if d1 == 0.0 {
            break;
        }
        let newton = phi / d1;
        let step = newton / (1.0 - 0.5 * newton * d2 / d1);
        let next = (z - step).max(1.0 + 0.5 * (z - 1.0));
        let done = (next - z).abs() <= 4.0 * f64::EPSILON * next;
        z = next;
        if done {
            break;
        }
    }
    Ok(z)
}

/// `W_{-1}(x)` for `-1/e <= x < 0`.
pub fn lambert_w_m1(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if !(x < 0.0) || x < branch * (1.0 + 4.0 * f64::EPSILON) || !x.is_finite() {
        return Err(Error::Domain { value: x, domain: "[-1/e, 0)" });
    }
    let u = (-1.0 - (-x).ln()).max(0.0);
    Ok(-neg_wm1_of_u(u)?)
}
