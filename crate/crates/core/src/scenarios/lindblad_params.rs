//! Qubit models whose Lindblad operator carries the parameter.

use crate::dynamics::{constant, op_fn, ParamModel};
use crate::error::{Error, Result};
use crate::fisher::{expectation, qfi_rate, Sld};
use crate::linalg::{identity, sigma_y, sigma_z, trace_product, zeros, CMat, Density, Hermitian, IM};

fn check_rate(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Domain { value: gamma, domain: "gamma >= 0" });
    }
    Ok(())
}

fn check_qubit(m: &CMat) -> Result<()> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: m.nrows() });
    }
    Ok(())
}

/// `H = g H'`, `L(g) = sqrt(gamma) (cos g sigma_z + sin g sigma_y)`.
pub fn dephasing_direction_model(gamma: f64, h_prime: &Hermitian) -> Result<ParamModel> {
    check_rate(gamma)?;
    check_qubit(h_prime)?;
    let k = gamma.sqrt();
    let (z, y) = (sigma_z(), sigma_y());
    let (z2, y2) = (z.clone(), y.clone());
    let op = op_fn(move |_, g| (&z * g.cos() + &y * g.sin()).mapv(|v| v * k));
    let deriv = op_fn(move |_, g| (&y2 * g.cos() - &z2 * g.sin()).mapv(|v| v * k));
    Ok(ParamModel::linear(zeros(2), (**h_prime).clone())?
        .with_label("dephasing direction")
        .with_channel("dephasing", op, Some(deriv)))
}

/// Rate formula at `g = 0` for the trial SLD `alpha I + beta sigma_z`
/// (evaluated through the general rate expression, not this formula).
pub fn dephasing_direction_demo(gamma: f64, rho: &Density, h_prime: &Hermitian, alpha: f64, beta: f64) -> Result<f64> {
    check_qubit(rho)?;
    let model = dephasing_direction_model(gamma, h_prime)?;
    let op = Hermitian::symmetrize(&(identity(2).mapv(|v| v * alpha) + sigma_z().mapv(|v| v * beta)));
    let qfi = trace_product(rho, &op.dot(&*op)).re;
    let sld = Sld { operator: op, kernel_dim: 0, qfi };
    qfi_rate(rho, &sld, &model, 0.0, 0.0)
}

/// `2 beta (Re(i tr(rho [H', sigma_z])) + 2 gamma <sigma_y>)`.
pub fn dephasing_direction_formula(gamma: f64, rho: &Density, h_prime: &Hermitian, beta: f64) -> Result<f64> {
    check_rate(gamma)?;
    check_qubit(rho)?;
    check_qubit(h_prime)?;
    let z = sigma_z();
    let comm = h_prime.dot(&z) - z.dot(&**h_prime);
    let drive = (IM * trace_product(rho, &comm)).re;
    let sy = expectation(rho, &sigma_y())?.re;
    Ok(2.0 * beta * (drive + 2.0 * gamma * sy))
}

/// `H = omega sigma_x` (no `g` dependence), `L(g) = (1 + f' g) sqrt(gamma) sigma_z`.
pub fn magnitude_dephasing_model(gamma: f64, f_prime: f64, omega: f64) -> Result<ParamModel> {
    check_rate(gamma)?;
    if !f_prime.is_finite() || !omega.is_finite() {
        return Err(Error::NonFinite);
    }
    let l = sigma_z().mapv(|v| v * gamma.sqrt());
    let dl = l.mapv(|v| v * f_prime);
    let l2 = l.clone();
    let h0 = crate::linalg::sigma_x().mapv(|v| v * omega);
    Ok(ParamModel::linear(h0, zeros(2))?
        .with_label("dephasing magnitude")
        .with_channel("dephasing", op_fn(move |_, g| l2.mapv(|v| v * (1.0 + f_prime * g))), Some(constant(dl))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, sigma_x};

    fn half_y_state() -> Density {
        // (I + sigma_y / 2) / 2
        Density::new((identity(2) + sigma_y().mapv(|v| v * 0.5)).mapv(|v| v * 0.5)).unwrap()
    }

    #[test]
    fn linear_in_beta() {
        let rho = half_y_state();
        let h = Hermitian::zeros(2);
        let f10 = dephasing_direction_demo(1.0, &rho, &h, 0.3, 10.0).unwrap();
        let f20 = dephasing_direction_demo(1.0, &rho, &h, 0.3, 20.0).unwrap();
        // 4 beta gamma <sigma_y> with <sigma_y> = 1/2
        assert!((f10 - 20.0).abs() < 1e-10, "{f10}");
        assert!((f20 - 2.0 * f10).abs() < 1e-9);
        assert!((dephasing_direction_formula(1.0, &rho, &h, 10.0).unwrap() - f10).abs() < 1e-10);
    }

    #[test]
    fn zero_without_sigma_y() {
        let rho = Density::new(CMat::from_shape_vec((2, 2), vec![c(0.7, 0.0), c(0.2, 0.0), c(0.2, 0.0), c(0.3, 0.0)]).unwrap()).unwrap();
        for beta in [-3.0, 0.5, 40.0] {
            assert!(dephasing_direction_demo(0.8, &rho, &Hermitian::zeros(2), 0.0, beta).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn drive_term_matches_formula() {
        let rho = Density::new((identity(2) + sigma_y().mapv(|v| v * 0.3) + sigma_x().mapv(|v| v * 0.4)).mapv(|v| v * 0.5)).unwrap();
        let h = Hermitian::new(sigma_x().mapv(|v| v * 0.7)).unwrap();
        for beta in [-1.0, 2.5] {
            let demo = dephasing_direction_demo(0.6, &rho, &h, 0.1, beta).unwrap();
            let formula = dephasing_direction_formula(0.6, &rho, &h, beta).unwrap();
            assert!((demo - formula).abs() < 1e-10);
        }
    }

    #[test]
    fn derivatives_consistent() {
        let m = dephasing_direction_model(0.9, &Hermitian::zeros(2)).unwrap();
        m.check_derivatives(&[(0.0, 0.0), (0.0, 0.4)]).unwrap();
        let m = magnitude_dephasing_model(0.9, 2.0, 0.5).unwrap();
        m.check_derivatives(&[(0.0, 0.0), (1.0, -0.3)]).unwrap();
    }
}
