//! Random finite-dimensional models for the dominance suite.

use rand::Rng;

use crate::dynamics::{uniform_grid, IntegratorConfig, ParamModel};
use crate::error::{Error, Result};
use crate::linalg::{random_density, random_hermitian, random_matrix, CMat, Density, Hermitian};

use super::analysis::{integrate_lines, trajectory_bounds};
use super::simulate;

/// `H = H0 + g H1` with `g`-independent Lindblad operators.
#[derive(Clone, Debug)]
pub struct RandomModel {
    pub model: ParamModel,
    pub h0: Hermitian,
    pub h1: Hermitian,
    pub lindblads: Vec<CMat>,
}

/// Draws a model of dimension `dim` with `channels` Lindblad operators.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, dim: usize, channels: usize) -> Result<RandomModel> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let h0 = random_hermitian(dim, rng);
    let h1 = random_hermitian(dim, rng).scaled(rng.random_range(0.2..1.5));
    let lindblads: Vec<CMat> = (0..channels)
        .map(|_| {
            let s = rng.random_range(0.1..0.8);
            random_matrix(dim, rng).mapv(|z| z * s)
        })
        .collect();
    let mut model = ParamModel::linear(h0.as_mat().clone(), h1.as_mat().clone())?.with_label("random");
    for (j, l) in lindblads.iter().enumerate() {
        model = model.with_constant_channel(format!("L{j}"), l.clone());
    }
    Ok(RandomModel { model, h0, h1, lindblads })
}

/// Pure start when `pure`, otherwise a random rank between 2 and `dim`.
pub fn random_start<R: Rng + ?Sized>(rng: &mut R, dim: usize, pure: bool) -> Density {
    let rank = if pure || dim < 2 { 1 } else { rng.random_range(2..=dim) };
    random_density(dim, rank, rng)
}

/// Largest amounts by which a simulated trajectory exceeds its bounds;
/// negative values mean the bounds hold with room to spare.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominanceReport {
    pub dim: usize,
    pub channels: usize,
    pub pure: bool,
    /// `max_t (dF/dt - optimized rate bound)`.
    pub rate_excess: f64,
    /// `max_t (F - integrated bound)`.
    pub curve_excess: f64,
}

/// Draws a model and start from `rng`, simulates it on `[0, t_end]` and
/// compares the QFI and its rate with the optimized bounds.
pub fn dominance_trial<R: Rng + ?Sized>(
    rng: &mut R,
    max_dim: usize,
    max_channels: usize,
    t_end: f64,
    points: usize,
    config: &IntegratorConfig,
    rank_tol: f64,
) -> Result<DominanceReport> {
    let dim = rng.random_range(2..=max_dim.max(2));
    let channels = rng.random_range(1..=max_channels.max(1));
    let pure = rng.random_bool(0.5);
    let m = random_model(rng, dim, channels)?;
    let rho0 = random_start(rng, dim, pure);
    let grid = uniform_grid(t_end, points);
    let sim = simulate(&m.model, &rho0, 0.0, &grid, config, rank_tol)?;
    let bounds = trajectory_bounds(&m.model, &sim, 0.0, rank_tol)?;
    let curve = integrate_lines(&bounds.times, &bounds.lines, 0.0)?;
    let rate_excess = sim.rates().iter().zip(&bounds.rate_bound).map(|(r, b)| r - b).fold(f64::NEG_INFINITY, f64::max);
    let curve_excess = sim.qfi().iter().zip(&curve).map(|(f, u)| f - u).fold(f64::NEG_INFINITY, f64::max);
    Ok(DominanceReport { dim, channels, pure, rate_excess, curve_excess })
}
