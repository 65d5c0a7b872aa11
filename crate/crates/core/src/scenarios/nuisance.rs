//! Nuisance parameters: a second parameter `h` that shapes the signal but
//! has no effect at `g = 0`.

use std::sync::Arc;

use crate::dynamics::{constant, op_fn, IntegratorConfig, ParamModel};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, CMat, Density};

use super::simulate;

/// `(t, g, h) -> operator`.
pub type OpFn3 = Arc<dyn Fn(f64, f64, f64) -> CMat + Send + Sync>;

/// Model family `H(t, g, h)` with `dH/dg` and fixed Lindblad operators.
#[derive(Clone)]
pub struct NuisanceFamily {
    pub dim: usize,
    pub hamiltonian: OpFn3,
    pub hamiltonian_g: OpFn3,
    /// `(L, accessible)`.
    pub channels: Vec<(CMat, bool)>,
}

const FD_H: f64 = 1e-5;

impl NuisanceFamily {
    pub fn new<H, D>(dim: usize, hamiltonian: H, hamiltonian_g: D) -> Self
    where
        H: Fn(f64, f64, f64) -> CMat + Send + Sync + 'static,
        D: Fn(f64, f64, f64) -> CMat + Send + Sync + 'static,
    {
        NuisanceFamily { dim, hamiltonian: Arc::new(hamiltonian), hamiltonian_g: Arc::new(hamiltonian_g), channels: Vec::new() }
    }

    pub fn with_channel(mut self, l: CMat, accessible: bool) -> Self {
        self.channels.push((l, accessible));
        self
    }

    fn add_channels(&self, mut model: ParamModel) -> ParamModel {
        for (i, (l, accessible)) in self.channels.iter().enumerate() {
            let label = format!("L{i}");
            model = if *accessible {
                model.with_accessible_channel(label, constant(l.clone()))
            } else {
                model.with_constant_channel(label, l.clone())
            };
        }
        model
    }

    /// Model in `g` at fixed `h`.
    pub fn at(&self, h: f64) -> Result<ParamModel> {
        let (ham, der) = (self.hamiltonian.clone(), self.hamiltonian_g.clone());
        let model = ParamModel::new(self.dim, op_fn(move |t, g| ham(t, g, h)), op_fn(move |t, g| der(t, g, h)))?;
        Ok(self.add_channels(model.with_label(format!("nuisance h = {h}"))))
    }

    /// `H(t, 0, 0) + dH/dh (t, g, 0)` with `g`-derivative `d^2 H / dh dg`.
    pub fn sigma_model(&self) -> Result<ParamModel> {
        let (ham, der) = (self.hamiltonian.clone(), self.hamiltonian_g.clone());
        let h_sigma = op_fn(move |t, g| {
            let dh = (ham(t, g, FD_H) - ham(t, g, -FD_H)).mapv(|z| z / (2.0 * FD_H));
            ham(t, 0.0, 0.0) + dh
        });
        let d_sigma = op_fn(move |t, g| (der(t, g, FD_H) - der(t, g, -FD_H)).mapv(|z| z / (2.0 * FD_H)));
        let model = ParamModel::new(self.dim, h_sigma, d_sigma)?;
        Ok(self.add_channels(model.with_label("sigma model")))
    }

    /// Rejects families with `dH/dh != 0` at `g = 0` on any of `times`.
    pub fn check_precondition(&self, times: &[f64]) -> Result<()> {
        for &t in times {
            let plus = (self.hamiltonian)(t, 0.0, FD_H);
            let minus = (self.hamiltonian)(t, 0.0, -FD_H);
            let norm = frobenius_norm(&(plus - minus)) / (2.0 * FD_H);
            let scale = frobenius_norm(&(self.hamiltonian)(t, 0.0, 0.0)).max(1.0);
            if norm > 1e-8 * scale {
                return Err(Error::NuisancePrecondition { t, norm });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NuisanceReport {
    pub times: Vec<f64>,
    /// `dF/dt` at `h = 0`.
    pub rate: Vec<f64>,
    /// `h^2` coefficient of `dF/dt` from central differences at `h = +-delta`.
    pub curvature: Vec<f64>,
    /// `dF/dt` of the sigma model.
    pub sigma_rate: Vec<f64>,
    /// Largest `||sigma - rho||` at `g = 0`.
    pub state_mismatch: f64,
    /// Largest `|curvature - sigma_rate| / max(1, |sigma_rate|)`.
    pub rate_mismatch: f64,
}

impl NuisanceReport {
    pub fn passed(&self) -> bool {
        self.state_mismatch <= 1e-8 && self.rate_mismatch <= 1e-4
    }

    /// First grid time at or after `from` where the sigma-model rate reaches `threshold`.
    pub fn rise_time(&self, from: f64, threshold: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.sigma_rate)
            .find(|(t, r)| **t >= from && **r >= threshold)
            .map(|(t, _)| t - from)
    }
}

/// Compares the `h^2` term of the QFI rate with the rate of the sigma model.
pub fn nuisance_sigma_check(
    family: &NuisanceFamily,
    rho0: &Density,
    t_grid: &[f64],
    delta_h: f64,
    config: &IntegratorConfig,
    rank_tol: f64,
) -> Result<NuisanceReport> {
    if !(delta_h > 0.0) || !delta_h.is_finite() {
        return Err(Error::Domain { value: delta_h, domain: "delta_h > 0" });
    }
    family.check_precondition(t_grid)?;
    let run = |model: &ParamModel| simulate(model, rho0, 0.0, t_grid, config, rank_tol);
    let base = run(&family.at(0.0)?)?;
    let plus = run(&family.at(delta_h)?)?.rates();
    let minus = run(&family.at(-delta_h)?)?.rates();
    let sigma = run(&family.sigma_model()?)?;
    let rate = base.rates();
    let curvature: Vec<f64> = (0..rate.len())
        .map(|i| (plus[i] + minus[i] - 2.0 * rate[i]) / (2.0 * delta_h * delta_h))
        .collect();
    let sigma_rate = sigma.rates();
    let state_mismatch = base
        .points
        .iter()
        .zip(&sigma.points)
        .map(|(a, b)| frobenius_norm(&(&*a.rho - &*b.rho)))
        .fold(0.0, f64::max);
    let rate_mismatch = curvature
        .iter()
        .zip(&sigma_rate)
        .map(|(c, s)| (c - s).abs() / s.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(NuisanceReport { times: t_grid.to_vec(), rate, curvature, sigma_rate, state_mismatch, rate_mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::uniform_grid;
    use crate::linalg::{adjoint, annihilation, IM};
    use crate::scenarios::{make_state, StateSpec};

    /// `H = g (1 + h theta(t - t_f)) i (a^dag - a)` with decay and a
    /// critically coupled readout.
    fn switched_family(n: usize, t_f: f64) -> NuisanceFamily {
        let a = annihilation(n);
        let ht = (adjoint(&a) - &a).mapv(|z| z * IM);
        let ht2 = ht.clone();
        let profile = move |t: f64, h: f64| 1.0 + if t >= t_f { h } else { 0.0 };
        NuisanceFamily::new(n, move |t, g, h| ht.mapv(|z| z * g * profile(t, h)), move |t, _, h| ht2.mapv(|z| z * profile(t, h)))
            .with_channel(a.clone(), false)
            .with_channel(a, true)
    }

    #[test]
    fn sigma_model_matches_curvature() {
        let n = 10;
        let t_f = 2.0;
        let family = switched_family(n, t_f);
        let rho = make_state(&StateSpec::ground(), n).unwrap();
        let grid = uniform_grid(8.0, 41);
        let r = nuisance_sigma_check(&family, &rho, &grid, 0.1, &IntegratorConfig::default(), 1e-12).unwrap();
        assert!(r.passed(), "state {} rate {}", r.state_mismatch, r.rate_mismatch);
        // long-time rate of the sigma model approaches f1^2 * 4 eps^2 / gamma = 4
        let last = *r.sigma_rate.last().unwrap();
        assert!((last - 4.0).abs() < 0.05, "{last}");
        assert!(r.sigma_rate.iter().zip(&grid).all(|(s, t)| *t >= t_f || s.abs() < 1e-12));
        // reaching 90% takes at least of order t_c = 2 ln 2
        let rise = r.rise_time(t_f, 0.9 * 4.0).unwrap();
        assert!(rise >= 0.5 * 2.0 * std::f64::consts::LN_2, "{rise}");
    }

    #[test]
    fn h_independent_family() {
        let a = annihilation(8);
        let ht = (adjoint(&a) - &a).mapv(|z| z * IM);
        let ht2 = ht.clone();
        let family = NuisanceFamily::new(8, move |_, g, _| ht.mapv(|z| z * g), move |_, _, _| ht2.clone()).with_channel(a, false);
        let rho = make_state(&StateSpec::ground(), 8).unwrap();
        let r = nuisance_sigma_check(&family, &rho, &uniform_grid(2.0, 11), 0.1, &IntegratorConfig::default(), 1e-12).unwrap();
        assert!(r.passed());
        assert!(r.sigma_rate.iter().chain(&r.curvature).all(|x| x.abs() < 1e-8));
    }

    #[test]
    fn rejects_h_dependence_at_zero_g() {
        let a = annihilation(6);
        let ht = (adjoint(&a) + &a).mapv(|z| z * 0.5);
        let ht2 = ht.clone();
        let family = NuisanceFamily::new(6, move |_, g, h| ht.mapv(|z| z * (g + h)), move |_, _, _| ht2.clone());
        match family.check_precondition(&[0.5]) {
            Err(Error::NuisancePrecondition { t, norm }) => {
                assert_eq!(t, 0.5);
                assert!(norm > 0.1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
