//! The `run` subcommand: one trajectory with its bound columns.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{hls_curve, hls_rate, hnls_curve, quadratic_prior_constant, BoundConstants};
use crate::dynamics::{uniform_grid, IntegratorConfig, ParamModel};
use crate::error::Result;
use crate::linalg::Density;
use crate::scenarios::{
    damped_oscillator, dephasing_qubit, integrate_lines, make_state, oscillator_constants, plus_state,
    random_model, random_start, simulate, trajectory_bounds, ForcingKind,
};

use super::config::{RunConfig, ScenarioConfig};
use super::table::{PlotOptions, Table, CURVE_HEADER, RATE_HEADER};
use super::CliError;

/// Source of the constant in the quadratic prior `4 q t^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuadraticPrior {
    /// Squared half-spread of the spectrum of `H'`.
    Spectral,
    /// `c1^2` of the HLS constants.
    C1,
}

/// Everything needed to simulate one scenario.
pub struct Scenario {
    pub label: String,
    pub model: ParamModel,
    pub rho0: Density,
    /// Constants valid along the whole trajectory, when known a priori;
    /// otherwise the sup over the simulated grid is used.
    pub constants: Option<BoundConstants>,
    pub prior: QuadraticPrior,
}

impl Scenario {
    pub fn from_config(config: &RunConfig) -> Result<Self> {
        Ok(match &config.scenario {
            ScenarioConfig::DephasingQubit(q) => Scenario {
                label: "dephasing_qubit".into(),
                model: dephasing_qubit(q.epsilon, q.gamma_d)?,
                rho0: plus_state(),
                constants: None,
                prior: QuadraticPrior::Spectral,
            },
            ScenarioConfig::Oscillator(o) => {
                let spec = o.to_spec();
                let rho0 = make_state(&o.state.to_spec(), spec.n_max)?;
                let constants = match spec.forcing {
                    ForcingKind::Linear => Some(oscillator_constants(&spec, &rho0, None)?.constants),
                    _ => None,
                };
                Scenario {
                    label: "oscillator".into(),
                    model: damped_oscillator(&spec)?,
                    rho0,
                    constants,
                    prior: QuadraticPrior::C1,
                }
            }
            ScenarioConfig::Random(r) => {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                let m = random_model(&mut rng, r.dim, r.channels)?;
                Scenario {
                    label: "random".into(),
                    model: m.model,
                    rho0: random_start(&mut rng, r.dim, r.pure),
                    constants: None,
                    prior: QuadraticPrior::Spectral,
                }
            }
        })
    }
}

/// Curve table (`CURVE_HEADER`) and rate table (`RATE_HEADER`) of one trajectory.
pub struct TrajectoryTables {
    pub curves: Table,
    pub rates: Table,
    pub constants: Option<BoundConstants>,
}

fn mapped(times: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    times.iter().map(|&t| f(t)).collect()
}

/// Simulates `scenario` on `grid` at `g = 0` and evaluates every bound column.
pub fn trajectory_tables(
    name: &str,
    scenario: &Scenario,
    grid: &[f64],
    config: &IntegratorConfig,
    rank_tol: f64,
) -> Result<TrajectoryTables> {
    let model = &scenario.model;
    let sim = simulate(model, &scenario.rho0, 0.0, grid, config, rank_tol)?;
    let tb = trajectory_bounds(model, &sim, 0.0, rank_tol)?;
    let times = sim.times();
    let f = sim.qfi();
    let rates = sim.rates();
    let optimized = integrate_lines(&times, &tb.lines, 0.0)?;

    let hls = match scenario.constants {
        Some(k) => Some(k),
        None if tb.in_span && tb.c1 > 0.0 => Some(BoundConstants::hls(tb.c1, tb.c2)?),
        None => None,
    };
    let hnls = if tb.c1 > 0.0 { Some(tb.constants()?) } else { None };
    let q = match scenario.prior {
        QuadraticPrior::Spectral => times
            .iter()
            .map(|&t| model.hamiltonian_deriv(t, 0.0).map(|h| quadratic_prior_constant(&h)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max),
        QuadraticPrior::C1 => hls.map_or(tb.c1 * tb.c1, |k| k.c1 * k.c1),
    };

    let hls_f = hls.map(|k| mapped(&times, |t| hls_curve(k.c1, k.c2, t))).transpose()?;
    let hnls_f = hnls.map(|k| mapped(&times, |t| hnls_curve(k.c0, k.c1, k.c2, t))).transpose()?;
    let linear = hls.map(|k| times.iter().map(|t| 4.0 * k.c2 * t).collect::<Vec<_>>());
    let quadratic: Vec<f64> = times.iter().map(|t| 4.0 * q * t * t).collect();
    let curves = Table::from_columns(
        name,
        &CURVE_HEADER,
        &[
            Some(&times),
            Some(&f),
            Some(&rates),
            Some(&optimized),
            hls_f.as_deref(),
            hnls_f.as_deref(),
            linear.as_deref(),
            Some(&quadratic),
        ],
    );
    let curves = CURVE_HEADER[3..].iter().fold(curves, |t, b| t.with_dominance(b, "qfi_sim"));

    let rate_hls = hls.map(|k| f.iter().map(|x| hls_rate(k.c1, k.c2, x.max(0.0))).collect::<Result<Vec<_>>>()).transpose()?;
    let curve_rate = match (hls, &hls_f) {
        (Some(k), Some(v)) => Some(v.iter().map(|x| hls_rate(k.c1, k.c2, *x)).collect::<Result<Vec<_>>>()?),
        _ => None,
    };
    let rate_linear = hls.map(|k| vec![4.0 * k.c2; times.len()]);
    let rate_quadratic: Vec<f64> = times.iter().map(|t| 8.0 * q * t).collect();
    let rate_table = Table::from_columns(
        format!("{name} rates"),
        &RATE_HEADER,
        &[
            Some(&times),
            Some(&rates),
            Some(&tb.rate_bound),
            rate_hls.as_deref(),
            curve_rate.as_deref(),
            rate_linear.as_deref(),
            Some(&rate_quadratic),
        ],
    )
    .with_dominance("rate_bound_optimized", "qfi_rate_sim")
    .with_dominance("rate_bound_hls", "qfi_rate_sim");
    Ok(TrajectoryTables { curves, rates: rate_table, constants: hls })
}

/// Executes a run configuration and writes every requested output.
pub fn run(config: &RunConfig) -> std::result::Result<Table, CliError> {
    let scenario = Scenario::from_config(config).map_err(CliError::Model)?;
    let grid = uniform_grid(config.grid.t_end, config.grid.points);
    let tables = trajectory_tables(&scenario.label, &scenario, &grid, &config.integrator.into(), config.rank_tol)
        .map_err(CliError::Compute)?;
    tables.curves.check()?;
    tables.rates.check()?;
    for out in &config.outputs {
        let opts = PlotOptions { log_y: out.log_y, skip: vec!["qfi_rate_sim".into()], ..PlotOptions::new(&scenario.label, "F") };
        tables.curves.write(&out.csv, out.svg.as_deref().map(|p| (p, &opts)))?;
    }
    Ok(tables.curves)
}
