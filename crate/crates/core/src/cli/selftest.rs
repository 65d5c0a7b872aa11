//! Quick property checks across all modules, one line per group.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::lambert::{sandwich_lower, sandwich_upper};
use crate::bounds::{hls_curve, hnls_curve, lambert_w_m1, neg_wm1_of_u, project_to_span, BoundCurve};
use crate::dynamics::{uniform_grid, IntegratorConfig};
use crate::error::Result;
use crate::fisher::{qfi_wrt_operator, variance};
use crate::linalg::{random_density, random_hermitian, Hermitian};
use crate::scenarios::{
    analytic_coherent_qfi, continuity_jump, damped_oscillator, dephasing_closed_form, dephasing_direction_demo,
    dephasing_qubit, dominance_trial, make_state, plus_state, simulate, ForcingKind, OscillatorSpec, StateSpec,
};

#[derive(Clone, Debug)]
pub struct GroupResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Group = fn(f64) -> Result<(bool, String)>;

const GROUPS: [(&str, Group); 9] = [
    ("lambert", lambert),
    ("curves", curves),
    ("fisher-facts", fisher_facts),
    ("span", span),
    ("dephasing-qubit", dephasing),
    ("coherent-saturation", coherent),
    ("dominance", dominance),
    ("continuity", continuity),
    ("lindblad-parameters", lindblad_parameters),
];

pub fn group_names() -> Vec<&'static str> {
    GROUPS.iter().map(|g| g.0).collect()
}

/// Runs every group (or only `only`) with the given SLD rank tolerance.
pub fn selftest(rank_tol: f64, only: Option<&str>) -> Vec<GroupResult> {
    GROUPS
        .iter()
        .filter(|(name, _)| only.is_none_or(|o| o == *name))
        .map(|(name, run)| match run(rank_tol) {
            Ok((passed, detail)) => GroupResult { name, passed, detail },
            Err(e) => GroupResult { name, passed: false, detail: format!("error: {e}") },
        })
        .collect()
}

fn lambert(_: f64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        // log-spaced |x| in (1e-8, 1/e)
        let s = i as f64 / 999.0;
        let x = -(-8.0 * std::f64::consts::LN_10 * (1.0 - s) - s).exp() * (1.0 - 1e-12);
        let w = lambert_w_m1(x)?;
        worst = worst.max(((w * w.exp() - x) / x).abs());
    }
    let mut sandwich = true;
    for u in [0.1, 0.3, 1.0, 3.0, 10.0] {
        let z = neg_wm1_of_u(u)?;
        sandwich &= sandwich_lower(u) <= z && z <= sandwich_upper(u);
    }
    Ok((worst <= 1e-12 && sandwich, format!("max relative residual {worst:.1e}, sandwich {sandwich}")))
}

fn curves(_: f64) -> Result<(bool, String)> {
    BoundCurve::hls(1.0, 1.0)?;
    BoundCurve::hls(5f64.sqrt(), 1.0)?;
    BoundCurve::hnls(0.5, 1.0, 1.0)?;
    let at_tc = hls_curve(1.0, 1.0, 2.0 * std::f64::consts::LN_2)?;
    let mut reduction: f64 = 0.0;
    for t in [0.1, 1.0, 3.0, 10.0] {
        reduction = reduction.max((hnls_curve(0.0, 1.0, 1.0, t)? - hls_curve(1.0, 1.0, t)?).abs());
    }
    let ok = (at_tc - 4.0).abs() < 1e-9 && reduction < 1e-10;
    Ok((ok, format!("F(t_c) = {at_tc:.12}, HNLS(c0 = 0) - HLS = {reduction:.1e}")))
}

fn fisher_facts(rank_tol: f64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = [0.0f64; 3];
    for _ in 0..50 {
        let n = rng.random_range(2..=4);
        let rank = rng.random_range(1..=n);
        let rho = random_density(n, rank, &mut rng);
        let a = random_hermitian(n, &mut rng);
        let b = random_hermitian(n, &mut rng);
        let (sa, sb) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let fa = qfi_wrt_operator(&rho, &a, rank_tol)?;
        let shifted = Hermitian::symmetrize(&(a.as_mat() * crate::linalg::c(sa, 0.0) + Hermitian::identity(n).as_mat() * crate::linalg::c(sb, 0.0)));
        worst[0] = worst[0].max((qfi_wrt_operator(&rho, &shifted, rank_tol)? - sa * sa * fa).abs() / fa.max(1.0));
        let var = variance(&rho, &a)?;
        let gap = fa - 4.0 * var;
        worst[1] = worst[1].max(if rank == 1 { gap.abs() } else { gap.max(0.0) });
        let fb = qfi_wrt_operator(&rho, &b, rank_tol)?;
        let sum = Hermitian::symmetrize(&(a.as_mat() + b.as_mat()));
        let fab = qfi_wrt_operator(&rho, &sum, rank_tol)?;
        worst[2] = worst[2].max(fab.sqrt() - fa.sqrt() - fb.sqrt());
    }
    let ok = worst[0] <= 1e-9 && worst[1] <= 1e-8 && worst[2] <= 1e-8;
    Ok((ok, format!("scaling {:.1e}, variance {:.1e}, triangle {:.1e}", worst[0], worst[1], worst[2])))
}

fn span(_: f64) -> Result<(bool, String)> {
    let qubit = dephasing_qubit(1.0, 1.0)?;
    let q = project_to_span(&qubit.hamiltonian_deriv(0.0, 0.0)?, &qubit.noise_lindblads(0.0, 0.0)?)?;
    let linear = damped_oscillator(&OscillatorSpec { n_max: 10, ..Default::default() })?;
    let l = project_to_span(&linear.hamiltonian_deriv(0.0, 0.0)?, &linear.noise_lindblads(0.0, 0.0)?)?;
    let spec = OscillatorSpec { n_max: 10, epsilon: crate::linalg::ZERO, forcing: ForcingKind::TwoPhoton { f: crate::linalg::ONE }, ..Default::default() };
    let two = damped_oscillator(&spec)?;
    let t = project_to_span(&two.hamiltonian_deriv(0.0, 0.0)?, &two.noise_lindblads(0.0, 0.0)?)?;
    let ok = q.in_span() && l.in_span() && !t.in_span();
    Ok((ok, format!("qubit {}, linear forcing {}, two-photon {}", q.in_span(), l.in_span(), t.in_span())))
}

fn dephasing(rank_tol: f64) -> Result<(bool, String)> {
    let model = dephasing_qubit(1.0, 1.0)?;
    let grid = uniform_grid(1.0, 11);
    let sim = simulate(&model, &plus_state(), 0.0, &grid, &IntegratorConfig::with_step(1e-3), rank_tol)?;
    let worst = grid.iter().zip(sim.qfi()).map(|(t, f)| (f - dephasing_closed_form(1.0, 1.0, *t)).abs()).fold(0.0, f64::max);
    Ok((worst <= 1e-8, format!("max deviation from 4 t^2 e^(-4t): {worst:.1e}")))
}

fn coherent(rank_tol: f64) -> Result<(bool, String)> {
    let spec = OscillatorSpec { n_max: 22, ..Default::default() };
    let model = damped_oscillator(&spec)?;
    let grid = uniform_grid(4.0, 41);
    let mut worst: f64 = 0.0;
    for alpha in [crate::linalg::ZERO, crate::linalg::c(1.0, 0.0), crate::linalg::c(1.0, 1.0)] {
        let rho = make_state(&StateSpec::coherent(alpha), spec.n_max)?;
        let sim = simulate(&model, &rho, 0.0, &grid, &IntegratorConfig::default(), rank_tol)?;
        for (t, f) in grid.iter().zip(sim.qfi()).skip(1) {
            let exact = analytic_coherent_qfi(1.0, 1.0, *t)?;
            worst = worst.max((f - exact).abs() / exact);
        }
    }
    Ok((worst <= 1e-6, format!("max relative deviation {worst:.1e}")))
}

fn dominance(rank_tol: f64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut rate, mut curve) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..8 {
        let r = dominance_trial(&mut rng, 4, 3, 1.5, 16, &IntegratorConfig::default(), rank_tol)?;
        rate = rate.max(r.rate_excess);
        curve = curve.max(r.curve_excess);
    }
    Ok((rate <= 1e-6 && curve <= 1e-6, format!("8 random models: rate excess {rate:.1e}, curve excess {curve:.1e}")))
}

fn continuity(rank_tol: f64) -> Result<(bool, String)> {
    let spec = OscillatorSpec { n_max: 10, ..Default::default() };
    let rho = make_state(&StateSpec::fock(1), spec.n_max)?;
    let r = continuity_jump(&damped_oscillator(&spec)?, &rho, 6.0, 0.02, 3, rank_tol)?;
    Ok((r.jump() < 1e-4, format!("finest-grid jump {:.1e}", r.jump())))
}

fn lindblad_parameters(_: f64) -> Result<(bool, String)> {
    let half_y = crate::linalg::Density::new(
        (crate::linalg::identity(2) + crate::linalg::sigma_y().mapv(|v| v * 0.5)).mapv(|v| v * 0.5),
    )?;
    let zero = Hermitian::zeros(2);
    let f10 = dephasing_direction_demo(1.0, &half_y, &zero, 0.0, 10.0)?;
    let f20 = dephasing_direction_demo(1.0, &half_y, &zero, 0.0, 20.0)?;
    let ok = (f10 - 20.0).abs() < 1e-9 && (f20 - 2.0 * f10).abs() < 1e-9;
    Ok((ok, format!("rate {f10:.6} at beta = 10, {f20:.6} at beta = 20")))
}
