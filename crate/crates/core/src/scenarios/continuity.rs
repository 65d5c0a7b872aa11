//! Grid-refinement check for jumps in the QFI when eigenvalues of the
//! state leave or reach zero.

use crate::dynamics::{uniform_grid, IntegratorConfig, ParamModel};
use crate::error::{Error, Result};
use crate::linalg::Density;

use super::simulate;

/// Largest `|dF_i - (dF_{i-1} + dF_{i+1}) / 2|` over consecutive
/// increments of `f`. Smooth curves give `O(h^2)`; a jump of size `J`
/// leaves about `J` however fine the grid.
pub fn increment_excess(f: &[f64]) -> f64 {
    let d: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
    d.windows(3).map(|w| (w[1] - 0.5 * (w[0] + w[2])).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct ContinuityReport {
    /// Output spacings, each half the previous.
    pub spacings: Vec<f64>,
    /// [`increment_excess`] per spacing.
    pub excess: Vec<f64>,
    /// Largest difference between the coarsest and finest runs on shared times.
    pub refinement_difference: f64,
}

impl ContinuityReport {
    /// Excess on the finest grid.
    pub fn jump(&self) -> f64 {
        *self.excess.last().unwrap_or(&f64::NAN)
    }
}

/// Simulates on output grids of spacing `h`, `h/2`, ... (`levels` runs) with
/// the integrator step tied to the spacing.
pub fn continuity_jump(
    model: &ParamModel,
    rho0: &Density,
    t_end: f64,
    h: f64,
    levels: usize,
    rank_tol: f64,
) -> Result<ContinuityReport> {
    if !(h > 0.0) || !(t_end > h) {
        return Err(Error::InvalidArgument(format!("need 0 < h < t_end, got h = {h}, t_end = {t_end}")));
    }
    if levels == 0 {
        return Err(Error::InvalidArgument("at least one refinement level".into()));
    }
    let intervals = (t_end / h).round() as usize;
    let mut report = ContinuityReport { spacings: Vec::new(), excess: Vec::new(), refinement_difference: 0.0 };
    let mut coarse: Option<Vec<f64>> = None;
    for level in 0..levels {
        let n = intervals << level;
        let spacing = t_end / n as f64;
        let grid = uniform_grid(t_end, n + 1);
        let f = simulate(model, rho0, 0.0, &grid, &IntegratorConfig::with_step(spacing), rank_tol)?.qfi();
        report.spacings.push(spacing);
        report.excess.push(increment_excess(&f));
        match &coarse {
            None => coarse = Some(f),
            Some(c) => {
                let stride = 1 << level;
                report.refinement_difference = c
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v - f[i * stride]).abs())
                    .fold(0.0, f64::max);
            }
        }
    }
    Ok(report)
}
