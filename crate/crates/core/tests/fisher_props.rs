//! Property tests for the SLD, QFI and operator QFI.

use proptest::prelude::*;
use qfigrowth::fisher::{
    classical_fi, expectation, qfi, qfi_from_sld, qfi_wrt_operator, sld_residual, solve_sld, variance,
};
use qfigrowth::linalg::{c, random_density, random_hermitian, Density, Hermitian};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random state of random rank with a consistent `rho'` generated by a
/// Hermitian direction `i[rho, A]`.
fn state_and_derivative(seed: u64) -> (Density, Hermitian, usize) {
    let mut r = rng(seed);
    let n = r.random_range(2..=5);
    let rank = r.random_range(1..=n);
    let rho = random_density(n, rank, &mut r);
    let a = random_hermitian(n, &mut r);
    let comm = rho.dot(a.as_mat()) - a.as_mat().dot(&**rho);
    let rp = Hermitian::symmetrize(&comm.mapv(|z| z * c(0.0, 1.0)));
    (rho, rp, rank)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn operator_qfi_affine_invariance(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut r = rng(seed);
        let n = r.random_range(2..=4);
        let rho = random_density(n, r.random_range(1..=n), &mut r);
        let op = random_hermitian(n, &mut r);
        let f = qfi_wrt_operator(&rho, &op, 1e-12).unwrap();
        let shifted = Hermitian::symmetrize(&(op.as_mat().mapv(|z| z * a) + Hermitian::identity(n).as_mat().mapv(|z| z * b)));
        let g = qfi_wrt_operator(&rho, &shifted, 1e-12).unwrap();
        prop_assert!((g - a * a * f).abs() <= 1e-9 * (1.0 + a * a * f));
        prop_assert!(qfi_wrt_operator(&rho, &Hermitian::identity(n), 1e-12).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn operator_qfi_below_four_variance(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(2..=4);
        let rank = r.random_range(1..=n);
        let rho = random_density(n, rank, &mut r);
        let op = random_hermitian(n, &mut r);
        let f = qfi_wrt_operator(&rho, &op, 1e-12).unwrap();
        let v = variance(&rho, &op).unwrap();
        prop_assert!(f >= -1e-12);
        prop_assert!(f <= 4.0 * v + 1e-8);
        if rank == 1 {
            prop_assert!((f - 4.0 * v).abs() <= 1e-8);
        }
    }

    #[test]
    fn operator_qfi_triangle_inequality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(2..=4);
        let rho = random_density(n, r.random_range(1..=n), &mut r);
        let a = random_hermitian(n, &mut r);
        let b = random_hermitian(n, &mut r);
        let sum = Hermitian::symmetrize(&(a.as_mat() + b.as_mat()));
        let fa = qfi_wrt_operator(&rho, &a, 1e-12).unwrap();
        let fb = qfi_wrt_operator(&rho, &b, 1e-12).unwrap();
        let fab = qfi_wrt_operator(&rho, &sum, 1e-12).unwrap();
        prop_assert!(fab.sqrt() <= fa.sqrt() + fb.sqrt() + 1e-8);
    }

    #[test]
    fn sld_solves_lyapunov_equation(seed in any::<u64>()) {
        let (rho, rp, _) = state_and_derivative(seed);
        let sld = solve_sld(&rho, &rp, 1e-12).unwrap();
        prop_assert!(sld_residual(&rho, &rp, &sld, 1e-12) <= 1e-8);
        let f = qfi(&rho, &rp, 1e-12).unwrap();
        prop_assert!((f - qfi_from_sld(&rho, &sld)).abs() <= 1e-9 * f.max(1.0));
        prop_assert!(f >= -1e-12);
    }

    #[test]
    fn unitary_direction_matches_operator_qfi(seed in any::<u64>()) {
        // rho' = -i[A, rho] gives F = F_A
        let mut r = rng(seed);
        let n = r.random_range(2..=4);
        let rho = random_density(n, r.random_range(1..=n), &mut r);
        let a = random_hermitian(n, &mut r);
        let comm = a.as_mat().dot(&**rho) - rho.dot(a.as_mat());
        let rp = Hermitian::symmetrize(&comm.mapv(|z| z * c(0.0, -1.0)));
        let f = qfi(&rho, &rp, 1e-12).unwrap();
        let fa = qfi_wrt_operator(&rho, &a, 1e-12).unwrap();
        prop_assert!((f - fa).abs() <= 1e-9 * fa.max(1.0));
    }

    #[test]
    fn sld_has_zero_mean(seed in any::<u64>()) {
        let (rho, rp, _) = state_and_derivative(seed);
        let sld = solve_sld(&rho, &rp, 1e-12).unwrap();
        let mean = expectation(&rho, sld.operator.as_mat()).unwrap();
        prop_assert!(mean.norm() <= 1e-9);
    }

    #[test]
    fn measurement_bounded_by_qfi(seed in any::<u64>()) {
        let (rho, rp, _) = state_and_derivative(seed);
        let p: Vec<f64> = rho.diag().iter().map(|z| z.re).collect();
        let dp: Vec<f64> = rp.diag().iter().map(|z| z.re).collect();
        let cfi = classical_fi(&p, &dp, 1e-12).unwrap();
        let f = qfi(&rho, &rp, 1e-12).unwrap();
        prop_assert!(cfi <= f + 1e-6);
    }
}
