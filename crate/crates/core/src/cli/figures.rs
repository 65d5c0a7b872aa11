//! Desk-scale reproductions of the two figures: bound curves against
//! oscillator trajectories, and detuning bandwidths.

use std::f64::consts::{LN_2, PI};
use std::path::{Path, PathBuf};

use crate::bounds::{hls_curve, hls_rate, BoundConstants};
use crate::dynamics::{uniform_grid, IntegratorConfig};
use crate::error::Result;
use crate::fisher::DEFAULT_RANK_TOL;
use crate::scenarios::{
    analytic_coherent_qfi, cycle_detuning_sweep, damped_oscillator, detuning_sweep, make_state,
    optimal_cycle_time, oscillator_constants, OscillatorSpec, StateSpec, SweepTable,
};

use super::run::{trajectory_tables, QuadraticPrior, Scenario};
use super::table::{PlotOptions, Table};
use super::CliError;

/// Outcome of one embedded assertion.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.to_string(), passed, detail }
    }

    /// `|value - target| <= tol`.
    fn close(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Check::new(name, (value - target).abs() <= tol, format!("{value:.9} vs {target} (tol {tol:e})"))
    }
}

#[derive(Clone, Debug, Default)]
pub struct FigureReport {
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
}

impl FigureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn emit(&mut self, out: &Path, stem: &str, table: &Table, opts: &PlotOptions) -> std::result::Result<(), CliError> {
        let csv = out.join(format!("{stem}.csv"));
        let svg = out.join(format!("{stem}.svg"));
        table.write(&csv, Some((&svg, opts)))?;
        self.files.push(csv);
        self.files.push(svg);
        Ok(())
    }

    /// Fails with the names of the violated assertions.
    pub fn into_result(self) -> std::result::Result<Self, CliError> {
        let failed: Vec<String> = self.checks.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.name, c.detail)).collect();
        if failed.is_empty() {
            Ok(self)
        } else {
            Err(CliError::Assertion(failed.join("; ")))
        }
    }
}

fn compute<T>(r: Result<T>) -> std::result::Result<T, CliError> {
    r.map_err(CliError::Compute)
}

fn hls_column(c1: f64, times: &[f64]) -> Result<Vec<f64>> {
    times.iter().map(|&t| hls_curve(c1, 1.0, t)).collect()
}

fn hls_rate_column(c1: f64, times: &[f64]) -> Result<Vec<f64>> {
    times.iter().map(|&t| hls_rate(c1, 1.0, hls_curve(c1, 1.0, t)?)).collect()
}

fn max_relative(a: &[f64], b: &[f64], keep: impl Fn(usize) -> bool) -> f64 {
    (0..a.len())
        .filter(|&i| keep(i) && b[i].abs() > 1e-12)
        .map(|i| ((a[i] - b[i]) / b[i]).abs())
        .fold(0.0, f64::max)
}

/// Truncation for the `g = 0` oscillator trajectories: the state stays
/// within a few levels of the initial one and `rho'` adds one more.
const FIG1_LEVELS: usize = 12;

pub fn fig1(out: &Path) -> std::result::Result<FigureReport, CliError> {
    let mut report = FigureReport::default();
    let sqrt5 = 5f64.sqrt();

    // closed-form curves
    let top = uniform_grid(4.0, 401);
    let quad = |c1: f64| top.iter().map(|t| 4.0 * c1 * c1 * t * t).collect::<Vec<_>>();
    let linear: Vec<f64> = top.iter().map(|t| 4.0 * t).collect();
    let (h1, h5) = (compute(hls_column(1.0, &top))?, compute(hls_column(sqrt5, &top))?);
    let (q1, q5) = (quad(1.0), quad(sqrt5));
    let curves = Table::from_columns(
        "fig1 top left",
        &["t", "hls_c1_1", "hls_c1_sqrt5", "prior_linear", "prior_quadratic_c1_1", "prior_quadratic_c1_sqrt5"],
        &[Some(&top), Some(&h1), Some(&h5), Some(&linear), Some(&q1), Some(&q5)],
    )
    .with_dominance("prior_linear", "hls_c1_1")
    .with_dominance("prior_linear", "hls_c1_sqrt5")
    .with_dominance("prior_quadratic_c1_1", "hls_c1_1")
    .with_dominance("prior_quadratic_c1_sqrt5", "hls_c1_sqrt5");
    let mut opts = PlotOptions::new("F bounds, c2 = 1", "F");
    report.emit(out, "fig1_top_left", &curves, &opts)?;

    let r1 = compute(hls_rate_column(1.0, &top))?;
    let r5 = compute(hls_rate_column(sqrt5, &top))?;
    let four = vec![4.0; top.len()];
    let qr = |c1: f64| top.iter().map(|t| 8.0 * c1 * c1 * t).collect::<Vec<_>>();
    let (qr1, qr5) = (qr(1.0), qr(sqrt5));
    let rates = Table::from_columns(
        "fig1 top right",
        &["t", "rate_hls_c1_1", "rate_hls_c1_sqrt5", "rate_prior_linear", "rate_prior_quadratic_c1_1", "rate_prior_quadratic_c1_sqrt5"],
        &[Some(&top), Some(&r1), Some(&r5), Some(&four), Some(&qr1), Some(&qr5)],
    )
    .with_dominance("rate_prior_linear", "rate_hls_c1_1")
    .with_dominance("rate_prior_linear", "rate_hls_c1_sqrt5");
    opts = PlotOptions::new("dF/dt bounds, c2 = 1", "dF/dt");
    report.emit(out, "fig1_top_right", &rates, &opts)?;

    let t_c = 2.0 * LN_2;
    report.checks.push(Check::close("hls(1,1) equals 4 at t_c = 2 ln 2", compute(hls_curve(1.0, 1.0, t_c))?, 4.0, 1e-9));
    report.checks.push(Check::close("hls(1,1) equals 8 at t_c + 1", compute(hls_curve(1.0, 1.0, t_c + 1.0))?, 8.0, 1e-9));
    let k5 = compute(BoundConstants::hls(sqrt5, 1.0))?;
    report.checks.push(Check::close("hls(sqrt5,1) crossover is 2 ln 2 / 5", k5.t_c, 0.4 * LN_2, 1e-12));
    let mut below = true;
    for i in 1..=1000 {
        let t = 10.0 * i as f64 / 1000.0;
        below &= compute(hls_curve(1.0, 1.0, t))? < 4.0 * t;
    }
    report.checks.push(Check::new("hls(1,1) below 4t on (0, 10]", below, "1000 samples".into()));

    // oscillator trajectories
    let mut grid = uniform_grid(8.0, 161);
    let pos = grid.partition_point(|&t| t < t_c);
    grid.insert(pos, t_c);
    let config = IntegratorConfig::default();
    let base = OscillatorSpec { n_max: FIG1_LEVELS, ..Default::default() };
    let continuum = OscillatorSpec { extra_damping: 1.0, extra_damping_from: t_c, ..base.clone() };
    let runs = [("ground", &base, StateSpec::ground()), ("fock2", &base, StateSpec::fock(2)), ("ground_continuum", &continuum, StateSpec::ground())];
    let mut f = Vec::new();
    let mut rate = Vec::new();
    for (name, spec, state) in runs {
        let rho0 = compute(make_state(&state, spec.n_max))?;
        let constants = compute(oscillator_constants(spec, &rho0, None))?.constants;
        let scenario = Scenario {
            label: name.into(),
            model: compute(damped_oscillator(spec))?,
            rho0,
            constants: Some(constants),
            prior: QuadraticPrior::C1,
        };
        let tables = compute(trajectory_tables(name, &scenario, &grid, &config, DEFAULT_RANK_TOL))?;
        opts = PlotOptions { skip: vec!["qfi_rate_sim".into()], ..PlotOptions::new(format!("{name}: F and bounds"), "F") };
        report.emit(out, &format!("fig1_{name}"), &tables.curves, &opts)?;
        opts = PlotOptions::new(format!("{name}: dF/dt and bounds"), "dF/dt");
        report.emit(out, &format!("fig1_{name}_rates"), &tables.rates, &opts)?;
        f.push(tables.curves.values("qfi_sim"));
        rate.push(tables.rates.values("qfi_rate_sim"));
    }
    let g1 = compute(hls_column(1.0, &grid))?;
    let g5 = compute(hls_column(sqrt5, &grid))?;
    let coherent = compute(grid.iter().map(|&t| analytic_coherent_qfi(1.0, 1.0, t)).collect::<Result<Vec<_>>>())?;
    let bottom = Table::from_columns(
        "fig1 bottom left",
        &["t", "hls_c1_1", "hls_c1_sqrt5", "ground", "fock2", "ground_continuum", "coherent_closed_form"],
        &[Some(&grid), Some(&g1), Some(&g5), Some(&f[0]), Some(&f[1]), Some(&f[2]), Some(&coherent)],
    )
    .with_dominance("hls_c1_1", "ground")
    .with_dominance("hls_c1_1", "ground_continuum")
    .with_dominance("hls_c1_sqrt5", "fock2");
    opts = PlotOptions::new("oscillator F(t), gamma = 1, n_T = 0", "F");
    report.emit(out, "fig1_bottom_left", &bottom, &opts)?;
    let gr1 = compute(hls_rate_column(1.0, &grid))?;
    let gr5 = compute(hls_rate_column(sqrt5, &grid))?;
    let bottom_rates = Table::from_columns(
        "fig1 bottom right",
        &["t", "rate_hls_c1_1", "rate_hls_c1_sqrt5", "ground", "fock2", "ground_continuum"],
        &[Some(&grid), Some(&gr1), Some(&gr5), Some(&rate[0]), Some(&rate[1]), Some(&rate[2])],
    );
    opts = PlotOptions::new("oscillator dF/dt, gamma = 1, n_T = 0", "dF/dt");
    report.emit(out, "fig1_bottom_right", &bottom_rates, &opts)?;

    let early = |i: usize| grid[i] > 0.0 && grid[i] <= t_c;
    let sat = max_relative(&f[0], &g1, early);
    report.checks.push(Check::new("ground state saturates hls(1,1) up to t_c", sat <= 1e-6, format!("max relative gap {sat:.2e}")));
    let coh = max_relative(&f[0], &coherent, |i| grid[i] > 0.0);
    report.checks.push(Check::new("ground state follows the coherent closed form", coh <= 1e-6, format!("max relative gap {coh:.2e}")));
    report.checks.push(Check::close("ground rate reaches 4 at t_c", rate[0][pos], 4.0, 1e-4));
    let cont = max_relative(&f[2], &g1, |i| grid[i] > 0.0);
    report.checks.push(Check::new("continuum keeps the ground state on hls(1,1)", cont <= 1e-3, format!("max relative gap {cont:.2e}")));
    let i05 = grid.iter().position(|&t| (t - 0.05).abs() < 1e-12).unwrap_or(1);
    let ratio = f[1][i05] / f[0][i05];
    report.checks.push(Check::new("Fock-2 / ground at t = 0.05 in [4, 6]", (4.0..=6.0).contains(&ratio), format!("{ratio:.4}")));
    let late = *f[0].last().unwrap_or(&f64::NAN);
    report.checks.push(Check::new("ground F approaches 16", late < 16.0 && late > 15.0, format!("F(8) = {late:.4}")));
    Ok(report)
}

fn mirrored(positive: &[f64]) -> Vec<f64> {
    let mut d: Vec<f64> = positive.iter().rev().map(|x| -x).collect();
    d.push(0.0);
    d.extend_from_slice(positive);
    d
}

/// Squeezing of the readout source in the left panel.
pub const FIG2_SOURCE_SQUEEZE: f64 = 4.0;

fn sweep_column(t: &SweepTable) -> Vec<f64> {
    t.values()
}

pub fn fig2(out: &Path) -> std::result::Result<FigureReport, CliError> {
    let mut report = FigureReport::default();
    let config = IntegratorConfig::default();
    let rank_tol = DEFAULT_RANK_TOL;
    let g_s = FIG2_SOURCE_SQUEEZE;

    let left = mirrored(&[0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0]);
    let ground = OscillatorSpec { n_max: 10, extra_damping: 1.0, ..Default::default() };
    let squeezed = OscillatorSpec { n_max: 30, extra_damping: 1.0, source_squeeze: g_s, source_phase: PI, ..Default::default() };
    let vacuum = StateSpec::ground();
    let ground_critical = compute(detuning_sweep(&ground, &vacuum, &left, 25.0, &config, rank_tol))?;
    let squeezed_critical = compute(detuning_sweep(&squeezed, &vacuum, &left, 12.0, &config, rank_tol))?;
    let over = OscillatorSpec { extra_damping: g_s, ..squeezed.clone() };
    let squeezed_over = compute(detuning_sweep(&over, &vacuum, &left, 6.0, &config, rank_tol))?;
    let ground_over = compute(detuning_sweep(&OscillatorSpec { extra_damping: g_s, ..ground.clone() }, &vacuum, &left, 10.0, &config, rank_tol))?;
    let table = Table::from_columns(
        "fig2 left",
        &["detuning", "ground_critical", "squeezed_critical", "squeezed_overcoupled", "ground_overcoupled"],
        &[
            Some(&left),
            Some(&sweep_column(&ground_critical)),
            Some(&sweep_column(&squeezed_critical)),
            Some(&sweep_column(&squeezed_over)),
            Some(&sweep_column(&ground_over)),
        ],
    );
    report.emit(out, "fig2_left", &table, &PlotOptions::new("long-time dF/dt against detuning", "dF/dt"))?;

    let on_resonance = ground_critical.points[left.len() / 2].value;
    report.checks.push(Check::new(
        "ground critical coupling reaches 4 |eps|^2 / gamma on resonance",
        (on_resonance - 4.0).abs() <= 0.02 * 4.0,
        format!("{on_resonance:.6}"),
    ));
    let sym = ground_critical.symmetry_defect();
    report.checks.push(Check::new("ground sweep symmetric in detuning", sym <= 1e-3, format!("{sym:.2e}")));
    let converged = [&ground_critical, &squeezed_critical, &squeezed_over, &ground_over].iter().all(|t| t.all_converged());
    report.checks.push(Check::new("long-time rates converged", converged, format!("drift tolerance {:e}", crate::scenarios::DRIFT_TOL)));
    let (w_ground, w_sq) = (ground_critical.fwhm(), squeezed_over.fwhm());
    let ratio = match (w_ground, w_sq) {
        (Some(a), Some(b)) => b / a,
        _ => f64::NAN,
    };
    report.checks.push(Check::new(
        "squeezed overcoupled bandwidth wider than ground (FWHM ratio in [2, 8])",
        (2.0..=8.0).contains(&ratio),
        format!("FWHM {w_sq:?} vs {w_ground:?}, ratio {ratio:.3}"),
    ));

    // prepare-measure-reset
    let spec0 = OscillatorSpec { n_max: 12, ..Default::default() };
    let spec4 = OscillatorSpec { n_max: 14, ..Default::default() };
    let best0 = compute(optimal_cycle_time(&spec0, &StateSpec::fock(0), 6.0, &config, rank_tol))?;
    let best4 = compute(optimal_cycle_time(&spec4, &StateSpec::fock(4), 1.0, &config, rank_tol))?;
    let mut right: Vec<f64> = (1..=40).map(|i| 0.1 * i as f64).chain((3..=30).map(|i| 2.0 * i as f64)).collect();
    right.sort_by(f64::total_cmp);
    right.dedup();
    let right = mirrored(&right);
    let cycle0 = compute(cycle_detuning_sweep(&spec0, &StateSpec::fock(0), best0.t1, &right, &config, rank_tol))?;
    let cycle4 = compute(cycle_detuning_sweep(&spec4, &StateSpec::fock(4), best4.t1, &right, &config, rank_tol))?;
    let table = Table::from_columns(
        "fig2 right",
        &["detuning", "fock0_cfi_per_time", "fock4_cfi_per_time"],
        &[Some(&right), Some(&sweep_column(&cycle0)), Some(&sweep_column(&cycle4))],
    );
    report.emit(out, "fig2_right", &table, &PlotOptions::new("prepare-measure-reset Fisher information per time", "FI / t1"))?;

    report.checks.push(Check::new(
        "Fock-4 optimum cycle shorter than ground",
        best4.t1 < best0.t1,
        format!("t1 = {:.4} (n = 4) vs {:.4} (n = 0)", best4.t1, best0.t1),
    ));
    report.checks.push(Check::new(
        "counting information below QFI at the optima",
        best0.cfi <= best0.qfi + 1e-6 && best4.cfi <= best4.qfi + 1e-6,
        format!("n = 0: {:.4} <= {:.4}; n = 4: {:.4} <= {:.4}", best0.cfi, best0.qfi, best4.cfi, best4.qfi),
    ));
    let (w0, w4) = (cycle0.fwhm(), cycle4.fwhm());
    report.checks.push(Check::new(
        "Fock-4 bandwidth wider than ground",
        matches!((w0, w4), (Some(a), Some(b)) if b > a),
        format!("FWHM {w4:?} vs {w0:?}"),
    ));
    Ok(report)
}
