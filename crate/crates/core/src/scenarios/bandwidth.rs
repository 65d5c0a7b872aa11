//! Sensitivity bandwidth experiments: detuning sweeps, prepare-measure-reset
//! cycles, stepwise signals, and an explicit collision model for the readout.

use rayon::prelude::*;

use crate::dynamics::{propagate, propagate_state, uniform_grid, IntegratorConfig};
use crate::error::{Error, Result};
use crate::fisher::{classical_fi_limit, diagonal, qfi};
use crate::linalg::{adjoint, annihilation, identity, kron, matrix_exp, zeros, CMat, Density, Hermitian, ZERO};

use super::oscillator::{damped_oscillator, make_state, ForcingKind, OscillatorSpec, StateSpec};
use super::{simulate, simulate_from};

/// Relative change of the long-time rate over the last tenth of the
/// horizon above which a sweep point is flagged.
pub const DRIFT_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub detuning: f64,
    pub value: f64,
    /// Relative change over the last tenth of the horizon; 0 for sweeps
    /// that are not long-time limits.
    pub drift: f64,
}

impl SweepPoint {
    pub fn converged(&self) -> bool {
        self.drift <= DRIFT_TOL
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepTable {
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    pub fn detunings(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.detuning).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// `(detuning, value)` of the largest value.
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .map(|p| (p.detuning, p.value))
    }

    pub fn fwhm(&self) -> Option<f64> {
        fwhm(&self.detunings(), &self.values())
    }

    /// Largest `|v(d) - v(-d)|` over mirrored pairs, relative to the peak.
    pub fn symmetry_defect(&self) -> f64 {
        let peak = self.peak().map_or(1.0, |p| p.1.abs().max(f64::MIN_POSITIVE));
        let mut worst: f64 = 0.0;
        for p in &self.points {
            let scale = p.detuning.abs().max(1.0);
            if let Some(q) = self.points.iter().find(|q| (q.detuning + p.detuning).abs() <= 1e-12 * scale) {
                worst = worst.max((p.value - q.value).abs() / peak);
            }
        }
        worst
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(SweepPoint::converged)
    }
}

/// Full width at half maximum of `y(x)` around its largest sample, with
/// linear interpolation between samples. `None` when the curve does not
/// fall below half maximum on both sides.
pub fn fwhm(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return None;
    }
    let (ip, &peak) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(peak > 0.0) {
        return None;
    }
    let half = 0.5 * peak;
    let cross = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
    let left = (0..ip).rev().find(|&i| y[i] < half).map(|i| cross(i, i + 1))?;
    let right = (ip + 1..y.len()).find(|&i| y[i] < half).map(|i| cross(i - 1, i))?;
    Some(right - left)
}

/// Integrator step no larger than `config.step` that keeps RK4 stable for
/// the largest Fock level: rotation `detuning * n` and damping of order
/// `(gamma_T + k G_s) n` (the squeezed readout couples `a^2` terms).
pub fn stable_config(spec: &OscillatorSpec, config: &IntegratorConfig) -> IntegratorConfig {
    let damping = spec.gamma_thermal() + spec.extra_damping * spec.source_squeeze;
    let scale = (spec.n_max.saturating_sub(1)) as f64 * (spec.detuning.abs() + damping);
    let step = if scale > 0.0 { config.step.min(1.2 / scale) } else { config.step };
    IntegratorConfig { step, ..*config }
}

/// Long-time `dF/dt` (readout included) as a function of detuning.
pub fn detuning_sweep(
    spec: &OscillatorSpec,
    state: &StateSpec,
    detunings: &[f64],
    horizon: f64,
    config: &IntegratorConfig,
    rank_tol: f64,
) -> Result<SweepTable> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Domain { value: horizon, domain: "horizon > 0" });
    }
    if detunings.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite);
    }
    let rho0 = make_state(state, spec.n_max)?;
    let grid = [0.0, 0.9 * horizon, horizon];
    let points = detunings
        .par_iter()
        .map(|&detuning| -> Result<SweepPoint> {
            let point_spec = OscillatorSpec { detuning, ..spec.clone() };
            let model = damped_oscillator(&point_spec)?;
            let zero = Hermitian::zeros(spec.n_max);
            let mut traj = propagate(&model, &rho0, &zero, 0.0, &grid, &stable_config(&point_spec, config))?;
            crate::fisher::annotate_trajectory(&mut traj[1..], &model, 0.0, rank_tol)?;
            let late = traj[2].qfi_rate.unwrap_or(f64::NAN);
            let earlier = traj[1].qfi_rate.unwrap_or(f64::NAN);
            let drift = if late == 0.0 { (late - earlier).abs() } else { ((late - earlier) / late).abs() };
            Ok(SweepPoint { detuning, value: late, drift })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { points })
}

/// QFI and photon-counting Fisher information after one cycle of length `t1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleFigure {
    pub t1: f64,
    pub qfi: f64,
    pub cfi: f64,
}

impl CycleFigure {
    pub fn qfi_per_time(&self) -> f64 {
        self.qfi / self.t1
    }

    pub fn cfi_per_time(&self) -> f64 {
        self.cfi / self.t1
    }
}

/// Step in `g` used for the second derivative of the counting statistics.
const CFI_DELTA: f64 = 1e-3;

/// Fisher information of the Fock-basis distribution at `g = 0`. Outcomes
/// with vanishing probability contribute `2 p''`, with `p''` taken from the
/// diagonal of `rho'` at `g = +-delta`.
pub fn classical_fi_at_zero(
    rho: &Density,
    rho_prime: &Hermitian,
    rho_prime_plus: &Hermitian,
    rho_prime_minus: &Hermitian,
    delta: f64,
    rank_tol: f64,
) -> Result<f64> {
    let p = diagonal(rho);
    let dp = diagonal(rho_prime);
    let plus = diagonal(rho_prime_plus);
    let minus = diagonal(rho_prime_minus);
    let ddp: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * delta)).collect();
    classical_fi_limit(&p, &dp, &ddp, rank_tol)
}

/// Cycle figures at each positive `t1` in `times` (increasing).
pub fn prepare_measure_reset(
    spec: &OscillatorSpec,
    state: &StateSpec,
    times: &[f64],
    config: &IntegratorConfig,
    rank_tol: f64,
) -> Result<Vec<CycleFigure>> {
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("cycle times must be positive".into()));
    }
    let model = damped_oscillator(spec)?;
    let rho0 = make_state(state, spec.n_max)?;
    let zero = Hermitian::zeros(spec.n_max);
    let mut grid = vec![0.0];
    grid.extend_from_slice(times);
    let runs = [0.0, CFI_DELTA, -CFI_DELTA]
        .par_iter()
        .map(|&g| propagate(&model, &rho0, &zero, g, &grid, config))
        .collect::<Result<Vec<_>>>()?;
    let (center, plus, minus) = (&runs[0], &runs[1], &runs[2]);
    (1..grid.len())
        .map(|i| {
            let p = &center[i];
            let q = qfi(&p.rho, &p.rho_prime, rank_tol)?;
            let c = classical_fi_at_zero(&p.rho, &p.rho_prime, &plus[i].rho_prime, &minus[i].rho_prime, CFI_DELTA, 1e-12)?;
            Ok(CycleFigure { t1: grid[i], qfi: q, cfi: c })
        })
        .collect()
}

/// Cycle length in `(0, t_max]` maximizing the counting information per
/// unit time: grid search followed by golden-section refinement.
pub fn optimal_cycle_time(
    spec: &OscillatorSpec,
    state: &StateSpec,
    t_max: f64,
    config: &IntegratorConfig,
    rank_tol: f64,
) -> Result<CycleFigure> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::Domain { value: t_max, domain: "t_max > 0" });
    }
    let n = 120;
    let times: Vec<f64> = (1..=n).map(|i| t_max * i as f64 / n as f64).collect();
    let figs = prepare_measure_reset(spec, state, &times, config, rank_tol)?;
    let best = (0..n).max_by(|&a, &b| figs[a].cfi_per_time().total_cmp(&figs[b].cfi_per_time())).unwrap_or(0);
    let (mut lo, mut hi) = (
        if best == 0 { 0.5 * times[0] } else { times[best - 1] },
        times[(best + 1).min(n - 1)],
    );
    let eval = |t: f64| -> Result<CycleFigure> { Ok(prepare_measure_reset(spec, state, &[t], config, rank_tol)?[0]) };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    for _ in 0..40 {
        if hi - lo <= 1e-6 * hi {
            break;
        }
        if f1.cfi_per_time() >= f2.cfi_per_time() {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = eval(x2)?;
        }
    }
    let refined = if f1.cfi_per_time() >= f2.cfi_per_time() { f1 } else { f2 };
    Ok(if refined.cfi_per_time() >= figs[best].cfi_per_time() { refined } else { figs[best] })
}

/// Counting information per unit time at fixed `t1` across detunings.
pub fn cycle_detuning_sweep(
    spec: &OscillatorSpec,
    state: &StateSpec,
    t1: f64,
    detunings: &[f64],
    config: &IntegratorConfig,
    rank_tol: f64,
) -> Result<SweepTable> {
    let points = detunings
        .par_iter()
        .map(|&detuning| -> Result<SweepPoint> {
            let s = OscillatorSpec { detuning, ..spec.clone() };
            let fig = prepare_measure_reset(&s, state, &[t1], &stable_config(&s, config), rank_tol)?[0];
            Ok(SweepPoint { detuning, value: fig.cfi_per_time(), drift: 0.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { points })
}

#[derive(Clone, Debug)]
pub struct StepwiseReport {
    pub starts: Vec<f64>,
    pub widths: Vec<f64>,
    /// Total information about each interval's parameter at the horizon.
    pub per_interval: Vec<f64>,
    pub total: f64,
    /// State-independent long-time rate bound `4 |eps|^2 / gamma_T`.
    pub rate_max: f64,
}

impl StepwiseReport {
    pub fn duration(&self) -> f64 {
        self.widths.iter().sum()
    }

    /// `total / (rate_max * duration)`.
    pub fn efficiency(&self) -> f64 {
        self.total / (self.rate_max * self.duration())
    }
}

/// Output spacing used to integrate the collected information.
const STEPWISE_SPACING: f64 = 0.01;

fn segment_grid(from: f64, to: f64) -> Vec<f64> {
    let n = ((to - from) / STEPWISE_SPACING).ceil().max(1.0) as usize;
    (0..=n).map(|i| from + (to - from) * i as f64 / n as f64).collect()
}

/// Signal `H'` switched on during consecutive intervals of the given
/// widths, each interval carrying its own parameter. Each `F_i` is the
/// information at `horizon` from a run that starts at the interval with
/// `rho' = 0` and continues without signal after it.
pub fn stepwise_signal_qfi(
    spec: &OscillatorSpec,
    state: &StateSpec,
    widths: &[f64],
    horizon: f64,
    config: &IntegratorConfig,
    rank_tol: f64,
) -> Result<StepwiseReport> {
    if widths.is_empty() || widths.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument("interval widths must be positive".into()));
    }
    let mut starts = Vec::with_capacity(widths.len());
    let mut t = 0.0;
    for w in widths {
        starts.push(t);
        t += w;
    }
    if !(horizon >= t) {
        return Err(Error::InvalidArgument(format!("horizon {horizon} ends before the last interval ({t})")));
    }
    let base = damped_oscillator(spec)?;
    let quiet = damped_oscillator(&OscillatorSpec { epsilon: ZERO, forcing: ForcingKind::Linear, ..spec.clone() })?;
    let rho0 = make_state(state, spec.n_max)?;
    let states = propagate_state(&base, &rho0, 0.0, &starts, config)?;
    let per_interval = starts
        .par_iter()
        .zip(widths.par_iter())
        .enumerate()
        .map(|(i, (&from, &w))| -> Result<f64> {
            let zero = Hermitian::zeros(spec.n_max);
            let on = simulate_from(&base, &states[i], &zero, 0.0, &segment_grid(from, from + w), config, rank_tol)?;
            let mut info = *on.qfi().last().unwrap_or(&0.0);
            if horizon > from + w {
                let end = on.points.last().expect("non-empty grid");
                let off = simulate_from(&quiet, &end.rho, &end.rho_prime, 0.0, &segment_grid(from + w, horizon), config, rank_tol)?;
                info = on.collected.last().unwrap_or(&0.0) + off.qfi().last().unwrap_or(&0.0);
            }
            Ok(info)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = per_interval.iter().sum();
    Ok(StepwiseReport {
        starts,
        widths: widths.to_vec(),
        per_interval,
        total,
        rate_max: 4.0 * spec.epsilon.norm_sqr() / spec.gamma_thermal(),
    })
}

#[derive(Clone, Debug)]
pub struct CascadeReport {
    pub times: Vec<f64>,
    /// Total information with the readout treated as an accessible channel.
    pub exclusion: Vec<f64>,
    /// System QFI plus the summed QFI of the ancillas that interacted with it.
    pub cascade: Vec<f64>,
    pub max_relative_difference: f64,
}

fn partial_trace_ancilla(m: &CMat, ns: usize, na: usize) -> CMat {
    let mut out = zeros(ns);
    for i in 0..ns {
        for j in 0..ns {
            let mut s = crate::linalg::ZERO;
            for k in 0..na {
                s += m[[i * na + k, j * na + k]];
            }
            out[[i, j]] = s;
        }
    }
    out
}

fn partial_trace_system(m: &CMat, ns: usize, na: usize) -> CMat {
    let mut out = zeros(na);
    for i in 0..na {
        for j in 0..na {
            let mut s = crate::linalg::ZERO;
            for k in 0..ns {
                s += m[[k * na + i, k * na + j]];
            }
            out[[i, j]] = s;
        }
    }
    out
}

/// Compares the accessible-channel treatment of the readout with a
/// collision model: every `dt` the oscillator meets a fresh vacuum ancilla
/// through a beam splitter of angle `sqrt(k dt)`, the ancilla's QFI is
/// banked and the ancilla discarded. Summing ancilla QFIs is exact only
/// while the joint state stays a product, as for coherent states.
pub fn cascade_validation(
    spec: &OscillatorSpec,
    state: &StateSpec,
    t_end: f64,
    dt: f64,
    samples: usize,
    rank_tol: f64,
) -> Result<CascadeReport> {
    if !(spec.extra_damping > 0.0) || spec.source_squeeze != 1.0 || spec.extra_damping_from > 0.0 {
        return Err(Error::InvalidArgument("cascade needs an always-on vacuum readout channel".into()));
    }
    if !(dt > 0.0) || !(t_end > dt) || samples < 2 {
        return Err(Error::InvalidArgument("need 0 < dt < t_end and at least two samples".into()));
    }
    let steps_per_sample = ((t_end / (samples - 1) as f64) / dt).round().max(1.0) as usize;
    let steps = steps_per_sample * (samples - 1);
    let dt = t_end / steps as f64;
    let times = uniform_grid(t_end, samples);
    let config = IntegratorConfig::with_step(dt);
    let rho0 = make_state(state, spec.n_max)?;

    let exclusion_model = damped_oscillator(spec)?;
    let exclusion = simulate(&exclusion_model, &rho0, 0.0, &uniform_grid(t_end, steps + 1), &config, rank_tol)?.qfi();
    let exclusion: Vec<f64> = exclusion.iter().step_by(steps_per_sample).copied().collect();

    let system = damped_oscillator(&OscillatorSpec { extra_damping: 0.0, ..spec.clone() })?;
    let (ns, na) = (spec.n_max, 3);
    let a = kron(&annihilation(ns), &identity(na));
    let b = kron(&identity(ns), &annihilation(na));
    let theta = (spec.extra_damping * dt).sqrt();
    let u = matrix_exp(&(adjoint(&a).dot(&b) - a.dot(&adjoint(&b))).mapv(|z| z * theta))?;
    let u_dag = adjoint(&u);
    let mut vac = zeros(na);
    vac[[0, 0]] = crate::linalg::ONE;

    let mut rho = rho0.clone();
    let mut rho_prime = Hermitian::zeros(ns);
    let mut banked = 0.0;
    let mut cascade = vec![0.0];
    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        let p = propagate(&system, &rho, &rho_prime, 0.0, &[t, t + dt], &config)?.pop().expect("two grid points");
        let joint = u.dot(&kron(&p.rho, &vac)).dot(&u_dag);
        let joint_prime = u.dot(&kron(&p.rho_prime, &vac)).dot(&u_dag);
        let anc = Density::new(crate::linalg::hermitian_part(&partial_trace_system(&joint, ns, na)))?;
        let anc_prime = Hermitian::symmetrize(&partial_trace_system(&joint_prime, ns, na));
        banked += qfi(&anc, &anc_prime, rank_tol)?;
        rho = Density::new(crate::linalg::hermitian_part(&partial_trace_ancilla(&joint, ns, na)))?;
        rho_prime = Hermitian::symmetrize(&partial_trace_ancilla(&joint_prime, ns, na));
        if step % steps_per_sample == 0 {
            cascade.push(banked + qfi(&rho, &rho_prime, rank_tol)?);
        }
    }
    let max_relative_difference = exclusion
        .iter()
        .zip(&cascade)
        .filter(|(e, _)| **e > 1e-6)
        .map(|(e, c)| (c - e).abs() / e)
        .fold(0.0, f64::max);
    Ok(CascadeReport { times, exclusion, cascade, max_relative_difference })
}
