//! Concrete models and the experiment drivers built on them.

mod analysis;
mod bandwidth;
mod continuity;
mod lindblad_params;
mod nuisance;
mod oscillator;
mod qubit;
mod random;

pub use analysis::{
    integrate_hnls_constants, integrate_lines, trajectory_bounds, BoundLine, TrajectoryBounds,
};
pub use bandwidth::{
    cascade_validation, classical_fi_at_zero, cycle_detuning_sweep, detuning_sweep, fwhm, optimal_cycle_time,
    prepare_measure_reset, stable_config, stepwise_signal_qfi, CascadeReport, CycleFigure, StepwiseReport,
    SweepPoint, SweepTable, DRIFT_TOL,
};
pub use continuity::{continuity_jump, increment_excess, ContinuityReport};
pub use lindblad_params::{
    dephasing_direction_demo, dephasing_direction_formula, dephasing_direction_model,
    magnitude_dephasing_model,
};
pub use nuisance::{nuisance_sigma_check, NuisanceFamily, NuisanceReport, OpFn3};
pub use oscillator::{
    analytic_coherent_qfi, damped_oscillator, make_state, oscillator_constants, quadrature_cap,
    quadrature_variances, ForcingKind, OscillatorConstants, OscillatorSpec, StateKind, StateSpec,
};
pub use qubit::{dephasing_closed_form, dephasing_qubit, plus_state};
pub use random::{dominance_trial, random_model, random_start, DominanceReport, RandomModel};

use crate::dynamics::{propagate, IntegratorConfig, ParamModel, TrajectoryPoint};
use crate::error::Result;
use crate::fisher::{accessible_flux, annotate_trajectory, solve_sld};
use crate::linalg::{Density, Hermitian};

/// A propagated trajectory with its QFI, rate, and the information carried
/// away by accessible channels.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub points: Vec<TrajectoryPoint>,
    /// Accumulated information collected through accessible channels.
    pub collected: Vec<f64>,
}

impl Simulation {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    /// QFI of the system state alone.
    pub fn system_qfi(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.qfi.unwrap_or(f64::NAN)).collect()
    }

    /// System QFI plus collected information.
    pub fn qfi(&self) -> Vec<f64> {
        self.points.iter().zip(&self.collected).map(|(p, c)| p.qfi.unwrap_or(f64::NAN) + c).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.qfi_rate.unwrap_or(f64::NAN)).collect()
    }
}

/// Propagates from a `g`-independent start (`rho' = 0`) and evaluates the
/// QFI along the way.
pub fn simulate(
    model: &ParamModel,
    rho0: &Density,
    g: f64,
    t_grid: &[f64],
    config: &IntegratorConfig,
    rank_tol: f64,
) -> Result<Simulation> {
    let zero = Hermitian::zeros(model.dim());
    simulate_from(model, rho0, &zero, g, t_grid, config, rank_tol)
}

pub fn simulate_from(
    model: &ParamModel,
    rho0: &Density,
    rho_prime0: &Hermitian,
    g: f64,
    t_grid: &[f64],
    config: &IntegratorConfig,
    rank_tol: f64,
) -> Result<Simulation> {
    let mut points = propagate(model, rho0, rho_prime0, g, t_grid, config)?;
    annotate_trajectory(&mut points, model, g, rank_tol)?;
    let mut collected = vec![0.0; points.len()];
    if model.channels().iter().any(|c| c.accessible) {
        // One-sided limits so that a channel switched on at a grid time
        // contributes only to the interval after it.
        let mut right = Vec::with_capacity(points.len());
        let mut left = Vec::with_capacity(points.len());
        for p in &points {
            let sld = solve_sld(&p.rho, &p.rho_prime, rank_tol)?;
            let nudge = 1e-12 * p.t.abs().max(1.0);
            right.push(accessible_flux(&p.rho, &sld, model, p.t + nudge, g)?);
            left.push(accessible_flux(&p.rho, &sld, model, p.t - nudge, g)?);
        }
        for i in 1..points.len() {
            let h = points[i].t - points[i - 1].t;
            collected[i] = collected[i - 1] + 0.5 * h * (right[i - 1] + left[i]);
        }
    }
    Ok(Simulation { points, collected })
}
