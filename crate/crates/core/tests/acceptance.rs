//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the lines are always printed. The process fails
//! when a criterion fails, except for criteria listed as known deviations,
//! which still print FAIL with the measured values.

use std::f64::consts::{E, LN_2, LN_10};
use std::time::{Duration, Instant};

use qfigrowth::bounds::curves::{
    hls_curve, hnls_curve, oscillator_bound_constants, oscillator_curve, prior_quadratic, quadratic_prior_constant,
    BoundConstants,
};
use qfigrowth::bounds::lambert::{lambert_w_m1, neg_wm1_of_u, sandwich_lower, sandwich_upper};
use qfigrowth::bounds::lindblad_magnitude_bound;
use qfigrowth::cli::{fig1, fig2};
use qfigrowth::dynamics::{uniform_grid, IntegratorConfig};
use qfigrowth::fisher::{qfi_wrt_operator, variance, DEFAULT_RANK_TOL};
use qfigrowth::linalg::{c, identity, random_density, random_hermitian, sigma_y, sigma_z, Density, Hermitian, ZERO};
use qfigrowth::scenarios::{
    continuity_jump, damped_oscillator, dephasing_direction_demo, dephasing_direction_formula,
    dephasing_qubit, dominance_trial, magnitude_dephasing_model, make_state, plus_state, simulate, OscillatorSpec,
    StateSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

/// Criteria that cannot be met as stated; see the project notes.
const KNOWN_DEVIATIONS: [usize; 1] = [4];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn coherent_exact_qfi() -> Outcome {
    let start = Instant::now();
    let spec = OscillatorSpec { n_max: 40, ..Default::default() };
    let model = damped_oscillator(&spec).map_err(err)?;
    let grid = uniform_grid(8.0, 81);
    let mut worst: f64 = 0.0;
    for alpha in [ZERO, c(1.0, 0.0), c(1.0, 1.0)] {
        let rho = make_state(&StateSpec::coherent(alpha), spec.n_max).map_err(err)?;
        let sim = simulate(&model, &rho, 0.0, &grid, &IntegratorConfig::default(), DEFAULT_RANK_TOL).map_err(err)?;
        for (&t, f) in grid.iter().zip(sim.qfi()).skip(1) {
            let exact = 16.0 * (1.0 - (-t / 2.0).exp()).powi(2);
            worst = worst.max(rel(f, exact));
        }
    }
    let elapsed = start.elapsed();
    Ok((
        worst <= 1e-6 && elapsed < Duration::from_secs(60),
        format!("max relative deviation {worst:.2e} over alpha in {{0, 1, 1+i}}, {:.1} s", elapsed.as_secs_f64()),
    ))
}

fn hls_values() -> Outcome {
    let k = BoundConstants::hls(1.0, 1.0).map_err(err)?;
    let f_tc = hls_curve(1.0, 1.0, k.t_c).map_err(err)?;
    let f_next = hls_curve(1.0, 1.0, k.t_c + 1.0).map_err(err)?;
    let k5 = BoundConstants::hls(5f64.sqrt(), 1.0).map_err(err)?;
    let mut jump: f64 = 0.0;
    for (c1, t_c) in [(1.0, k.t_c), (5f64.sqrt(), k5.t_c)] {
        let below = hls_curve(c1, 1.0, t_c * (1.0 - 1e-13)).map_err(err)?;
        let above = hls_curve(c1, 1.0, t_c * (1.0 + 1e-13)).map_err(err)?;
        jump = jump.max(rel(above, below));
    }
    let ok = rel(k.t_c, 2.0 * LN_2) <= 1e-12
        && (f_tc - 4.0).abs() <= 1e-9
        && (f_next - 8.0).abs() <= 1e-9
        && rel(k5.t_c, 0.4 * LN_2) <= 1e-12
        && jump <= 1e-9;
    Ok((
        ok,
        format!("t_c = {:.12}, F(t_c) = {f_tc:.12}, F(t_c + 1) = {f_next:.12}, t_c(sqrt5) = {:.12}, jump {jump:.1e}", k.t_c, k5.t_c),
    ))
}

fn saturation() -> Outcome {
    let spec = OscillatorSpec { n_max: 30, ..Default::default() };
    let model = damped_oscillator(&spec).map_err(err)?;
    let k = oscillator_bound_constants(1.0, 1.0, 0.5).map_err(err)?;
    let mut grid = uniform_grid(k.t_c, 101);
    grid.push(k.t_c + 0.05);
    let rho = make_state(&StateSpec::coherent(c(1.0, 0.0)), spec.n_max).map_err(err)?;
    let sim = simulate(&model, &rho, 0.0, &grid, &IntegratorConfig::default(), DEFAULT_RANK_TOL).map_err(err)?;
    let f = sim.qfi();
    let mut worst: f64 = 0.0;
    for i in 1..101 {
        worst = worst.max(rel(f[i], oscillator_curve(1.0, 1.0, 0.5, grid[i]).map_err(err)?));
    }
    let rate = sim.rates()[100];
    Ok((
        worst <= 1e-6 && (rate - 4.0).abs() <= 1e-4,
        format!("max relative deviation below t_c {worst:.2e}, rate at t_c {rate:.8}"),
    ))
}

/// `F(t) / t^2` from a single step of length `t`.
fn qfi_over_t2(model: &qfigrowth::dynamics::ParamModel, rho: &Density, t: f64) -> Result<f64, String> {
    let config = IntegratorConfig::with_step(t / 1000.0);
    let f = simulate(model, rho, 0.0, &[0.0, t], &config, DEFAULT_RANK_TOL).map_err(err)?.qfi()[1];
    Ok(f / (t * t))
}

fn short_time() -> Outcome {
    // gamma = 1 throughout, so gamma t = t
    let (t, small) = (0.01, 1e-4);
    let mut lines = Vec::new();
    let mut ok = true;
    let qubit = dephasing_qubit(1.0, 1.0).map_err(err)?;
    let h = Hermitian::new(sigma_z()).map_err(err)?;
    let limit = qfi_wrt_operator(&plus_state(), &h, DEFAULT_RANK_TOL).map_err(err)?;
    let dev = rel(qfi_over_t2(&qubit, &plus_state(), t)?, limit);
    let dev_small = rel(qfi_over_t2(&qubit, &plus_state(), small)?, limit);
    ok &= dev <= 0.01;
    lines.push(format!("qubit {:.2}% ({:.3}% at 1e-4)", 100.0 * dev, 100.0 * dev_small));
    let spec = OscillatorSpec { n_max: 10, ..Default::default() };
    let model = damped_oscillator(&spec).map_err(err)?;
    for n in 0..3 {
        let rho = make_state(&StateSpec::fock(n), spec.n_max).map_err(err)?;
        let limit = qfi_wrt_operator(&rho, &spec.forcing_operator(), DEFAULT_RANK_TOL).map_err(err)?;
        let ratio = qfi_over_t2(&model, &rho, t)?;
        let dev = rel(ratio, limit);
        let dev_small = rel(qfi_over_t2(&model, &rho, small)?, limit);
        let prefactor = (8 * n + 4) as f64;
        let pre = rel(ratio, prefactor);
        ok &= dev <= 0.01 && pre <= 0.05;
        lines.push(format!(
            "Fock {n} {:.2}% ({:.3}% at 1e-4), prefactor {ratio:.3} vs {prefactor} ({:.2}%)",
            100.0 * dev,
            100.0 * dev_small,
            100.0 * pre
        ));
    }
    Ok((ok, format!("|F/t^2 - F_H'(0)| / F_H'(0) at gamma t = 0.01: {}", lines.join("; "))))
}

fn dominance_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut rate, mut curve) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let config = IntegratorConfig::default();
    for _ in 0..50 {
        let r = dominance_trial(&mut rng, 4, 3, 2.0, 21, &config, DEFAULT_RANK_TOL).map_err(err)?;
        rate = rate.max(r.rate_excess);
        curve = curve.max(r.curve_excess);
    }
    let elapsed = start.elapsed();
    Ok((
        rate <= 1e-6 && curve <= 1e-6 && elapsed < Duration::from_secs(300),
        format!("50 models: max rate excess {rate:.2e}, max curve excess {curve:.2e}, {:.1} s", elapsed.as_secs_f64()),
    ))
}

fn hnls_asymptotics() -> Outcome {
    let (c0, c1, c2) = (0.5, 1.0, 1.0);
    let k = BoundConstants::hnls(c0, c1, c2).map_err(err)?;
    let mut ks = Vec::new();
    let mut ratios = Vec::new();
    for m in [1e2, 1e3, 1e4] {
        let t = m * k.t_c;
        let r = hnls_curve(c0, c1, c2, t).map_err(err)? / (4.0 * c0 * c0 * t * t);
        ratios.push(r);
        ks.push((r - 1.0) * t.sqrt());
    }
    let fitted = ks.iter().cloned().fold(0.0, f64::max);
    let mut inside = true;
    for (m, r) in [1e2, 1e3, 1e4].iter().zip(&ratios) {
        let t = m * k.t_c;
        inside &= *r >= 1.0 && *r <= 1.0 + fitted * t.powf(-0.5) * (1.0 + 1e-12);
    }
    // (r - 1) sqrt(t) non-increasing: the envelope fitted at the first time covers later ones
    let shrinking = ks.windows(2).all(|w| w[1] <= w[0]);
    let mut reduction: f64 = 0.0;
    for i in 0..200 {
        let t = 0.05 * i as f64;
        let a = hnls_curve(0.0, 1.0, 1.0, t).map_err(err)?;
        let b = hls_curve(1.0, 1.0, t).map_err(err)?;
        reduction = reduction.max((a - b).abs() / b.max(1.0));
    }
    Ok((
        inside && shrinking && reduction <= 1e-10,
        format!(
            "ratios {:.5}, {:.5}, {:.5}; K = {fitted:.4}, (r - 1) sqrt(t) non-increasing: {shrinking}; c0 = 0 reduction {reduction:.1e}",
            ratios[0], ratios[1], ratios[2]
        ),
    ))
}

fn lambert() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        // log-spaced |x| from 1e-8 up to just below 1/e
        let s = i as f64 / 999.0;
        let x = -(-8.0 * LN_10 * (1.0 - s) - s).exp() * (1.0 - 1e-12);
        let w = lambert_w_m1(x).map_err(err)?;
        worst = worst.max(rel(w * w.exp(), x));
    }
    let mut sandwich = true;
    for i in 0..1000 {
        let u = 1e-3 * (2e4f64).powf(i as f64 / 999.0);
        let z = neg_wm1_of_u(u).map_err(err)?;
        sandwich &= sandwich_lower(u) <= z && z <= sandwich_upper(u);
    }
    let edge = lambert_w_m1(-1.0 / E * (1.0 - 1e-15)).map_err(err)?;
    Ok((
        worst <= 1e-12 && sandwich,
        format!("max relative residual {worst:.1e}, sandwich on [1e-3, 20]: {sandwich}, W(-1/e+) = {edge:.6}"),
    ))
}

fn fisher_facts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = [0.0f64; 3];
    for _ in 0..200 {
        let n = rng.random_range(2..=4);
        let rank = rng.random_range(1..=n);
        let rho = random_density(n, rank, &mut rng);
        let a = random_hermitian(n, &mut rng);
        let b = random_hermitian(n, &mut rng);
        let (sa, sb) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let fa = qfi_wrt_operator(&rho, &a, DEFAULT_RANK_TOL).map_err(err)?;
        let shifted = Hermitian::symmetrize(&(a.as_mat() * c(sa, 0.0) + identity(n) * c(sb, 0.0)));
        let fs = qfi_wrt_operator(&rho, &shifted, DEFAULT_RANK_TOL).map_err(err)?;
        worst[0] = worst[0].max((fs - sa * sa * fa).abs() / fa.max(1.0));
        let gap = fa - 4.0 * variance(&rho, &a).map_err(err)?;
        worst[1] = worst[1].max(if rank == 1 { gap.abs() } else { gap.max(0.0) });
        let fb = qfi_wrt_operator(&rho, &b, DEFAULT_RANK_TOL).map_err(err)?;
        let sum = Hermitian::symmetrize(&(a.as_mat() + b.as_mat()));
        let fab = qfi_wrt_operator(&rho, &sum, DEFAULT_RANK_TOL).map_err(err)?;
        worst[2] = worst[2].max(fab.sqrt() - fa.sqrt() - fb.sqrt());
    }
    Ok((
        worst[0] <= 1e-9 && worst[1] <= 1e-8 && worst[2] <= 1e-8,
        format!(
            "200 instances: affine {:.1e}, variance {:.1e}, triangle {:.1e}",
            worst[0], worst[1], worst[2]
        ),
    ))
}

fn continuity() -> Outcome {
    let spec = OscillatorSpec { n_max: 10, ..Default::default() };
    let model = damped_oscillator(&spec).map_err(err)?;
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [1, 2] {
        let rho = make_state(&StateSpec::fock(n), spec.n_max).map_err(err)?;
        let r = continuity_jump(&model, &rho, 6.0, 0.02, 3, DEFAULT_RANK_TOL).map_err(err)?;
        ok &= r.jump() < 1e-4;
        lines.push(format!("Fock {n}: jump {:.1e} at spacing {:.4}", r.jump(), r.spacings[2]));
    }
    Ok((ok, lines.join("; ")))
}

fn tightness() -> Outcome {
    let mut below = true;
    for i in 1..=1000 {
        let t = 10.0 * i as f64 / 1000.0;
        below &= hls_curve(1.0, 1.0, t).map_err(err)? < 4.0 * t;
    }
    let eps = 0.7;
    let h = Hermitian::new(sigma_z().mapv(|v| v * eps)).map_err(err)?;
    let q = quadratic_prior_constant(&h);
    let model = dephasing_qubit(eps, 0.5).map_err(err)?;
    let grid = uniform_grid(4.0, 201);
    let sim = simulate(&model, &plus_state(), 0.0, &grid, &IntegratorConfig::default(), DEFAULT_RANK_TOL).map_err(err)?;
    let mut equal: f64 = 0.0;
    let mut exceeds = true;
    for (&t, f) in grid.iter().zip(sim.qfi()) {
        let prior = prior_quadratic(q, t).map_err(err)?;
        equal = equal.max((prior - 4.0 * eps * eps * t * t).abs());
        exceeds &= prior + 1e-12 >= f;
    }
    Ok((
        below && equal <= 1e-12 && exceeds,
        format!("HLS < 4t on (0, 10]: {below}; quadratic prior vs 4 eps^2 t^2: {equal:.1e}; prior above simulation: {exceeds}"),
    ))
}

fn figures() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let start = Instant::now();
    let one = fig1(&dir.path().join("fig1")).map_err(err)?;
    let t1 = start.elapsed();
    let two = fig2(&dir.path().join("fig2")).map_err(err)?;
    let total = start.elapsed();
    let failed: Vec<&str> = one.checks.iter().chain(&two.checks).filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let checks = one.checks.len() + two.checks.len();
    Ok((
        failed.is_empty() && total < Duration::from_secs(900),
        format!(
            "fig1 {:.1} s, fig2 {:.1} s, {} of {checks} embedded checks pass{}",
            t1.as_secs_f64(),
            (total - t1).as_secs_f64(),
            checks - failed.len(),
            if failed.is_empty() { String::new() } else { format!(" (failed: {})", failed.join(", ")) }
        ),
    ))
}

fn lindblad_parameters() -> Outcome {
    let mut excess = f64::NEG_INFINITY;
    let gamma = 0.8;
    let grid = uniform_grid(3.0, 61);
    for f_prime in [0.5, 1.0, 2.0] {
        let model = magnitude_dephasing_model(gamma, f_prime, 0.6).map_err(err)?;
        let sim = simulate(&model, &plus_state(), 0.0, &grid, &IntegratorConfig::default(), DEFAULT_RANK_TOL).map_err(err)?;
        // <L^dag L> = gamma for L = sqrt(gamma) sigma_z
        let bound = lindblad_magnitude_bound(&[f_prime], &[gamma]).map_err(err)?;
        for r in sim.rates() {
            excess = excess.max(r - bound);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut slope_gap: f64 = 0.0;
    let mut min_slope = f64::INFINITY;
    for _ in 0..20 {
        let rho = random_density(2, 2, &mut rng);
        let h = random_hermitian(2, &mut rng);
        let sy = (rho.dot(&sigma_y())).diag().iter().map(|z| z.re).sum::<f64>();
        if sy.abs() < 1e-3 {
            continue;
        }
        let alpha = rng.random_range(-1.0..1.0);
        let f1 = dephasing_direction_demo(gamma, &rho, &h, alpha, 1.0).map_err(err)?;
        let f3 = dephasing_direction_demo(gamma, &rho, &h, alpha, 3.0).map_err(err)?;
        let slope = 0.5 * (f3 - f1);
        let predicted = dephasing_direction_formula(gamma, &rho, &h, 1.0).map_err(err)?;
        slope_gap = slope_gap.max((slope - predicted).abs());
        let intercept = f1 - slope;
        slope_gap = slope_gap.max(intercept.abs());
        min_slope = min_slope.min(slope.abs());
    }
    let half_y = Density::new((identity(2) + sigma_y().mapv(|v| v * 0.5)).mapv(|v| v * 0.5)).map_err(err)?;
    let demo = dephasing_direction_demo(1.0, &half_y, &Hermitian::zeros(2), 0.0, 10.0).map_err(err)?;
    Ok((
        excess <= 1e-6 && slope_gap <= 1e-8 && min_slope > 0.0,
        format!(
            "magnitude bound excess {excess:.2e}; direction slope vs formula {slope_gap:.1e}; rate at beta = 10, <sigma_y> = 1/2: {demo:.6}"
        ),
    ))
}

fn main() {
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("coherent-state exact QFI", coherent_exact_qfi),
        ("HLS curve values", hls_values),
        ("saturation up to crossover", saturation),
        ("short-time law", short_time),
        ("dominance suite", dominance_suite),
        ("HNLS asymptotics", hnls_asymptotics),
        ("Lambert W", lambert),
        ("Fisher facts", fisher_facts),
        ("continuity", continuity),
        ("tightness vs prior bounds", tightness),
        ("figure reproduction", figures),
        ("parameter-dependent Lindblad operators", lindblad_parameters),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let (passed, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let known = KNOWN_DEVIATIONS.contains(&id);
        let tag = match (passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known deviation)",
            (false, false) => "FAIL",
        };
        println!("{tag} [{id:>2}] {name}: {detail}");
        if !passed && !known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("failed criteria: {unexpected:?}");
        std::process::exit(1);
    }
}
