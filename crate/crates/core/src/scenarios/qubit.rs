//! Qubit with a `g`-linear `sigma_z` coupling under dephasing.

use crate::dynamics::ParamModel;
use crate::error::{Error, Result};
use crate::linalg::{c, sigma_z, zeros, CMat, Density};

/// `H = g eps sigma_z`, `L = sqrt(gamma_d) sigma_z`.
pub fn dephasing_qubit(epsilon: f64, gamma_d: f64) -> Result<ParamModel> {
    if !(gamma_d >= 0.0) || !gamma_d.is_finite() {
        return Err(Error::Domain { value: gamma_d, domain: "gamma_d >= 0" });
    }
    if !epsilon.is_finite() {
        return Err(Error::NonFinite);
    }
    let z = sigma_z();
    let model = ParamModel::linear(zeros(2), z.mapv(|x| x * epsilon))?.with_label("dephasing qubit");
    Ok(if gamma_d > 0.0 {
        model.with_constant_channel("dephasing", z.mapv(|x| x * gamma_d.sqrt()))
    } else {
        model
    })
}

/// `|+><+|`.
pub fn plus_state() -> Density {
    Density::new(CMat::from_elem((2, 2), c(0.5, 0.0))).expect("valid state")
}

/// QFI of `|+>` under [`dephasing_qubit`] at `g = 0`:
/// `4 eps^2 t^2 exp(-4 gamma t)`.
pub fn dephasing_closed_form(epsilon: f64, gamma_d: f64, t: f64) -> f64 {
    4.0 * epsilon * epsilon * t * t * (-4.0 * gamma_d * t).exp()
}
