//! Symmetric logarithmic derivative, quantum Fisher information, its exact
//! growth rate, and classical Fisher information of outcome distributions.

use crate::dynamics::{ParamModel, TrajectoryPoint};
use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, comm, eigh_unchecked, trace, trace_product, CMat, Density, Hermitian,
    SpectralDecomposition, C64, IM,
};

/// Pairs with `p_j + p_k <= rank_tol * tr(rho)` are treated as kernel.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;
/// Largest kernel-block entry of `rho'` accepted by [`solve_sld`].
pub const KERNEL_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct Sld {
    pub operator: Hermitian,
    /// Number of `(j, k)` pairs whose entries were set to zero.
    pub kernel_dim: usize,
    pub qfi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QfiSample {
    pub t: f64,
    pub qfi: f64,
    pub qfi_rate: f64,
    pub fg: Option<f64>,
}

fn check_pair(rho: &CMat, other: &CMat) -> Result<()> {
    if rho.dim() != other.dim() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), got: other.nrows() });
    }
    Ok(())
}

fn clipped_spectrum(rho: &Density) -> (SpectralDecomposition, Vec<f64>, f64) {
    let spec = eigh_unchecked(rho);
    let p: Vec<f64> = spec.values.iter().map(|&x| x.max(0.0)).collect();
    let tr = trace(rho).re;
    (spec, p, tr)
}

pub fn solve_sld(rho: &Density, rho_prime: &Hermitian, rank_tol: f64) -> Result<Sld> {
    check_pair(rho, rho_prime)?;
    let (spec, p, tr) = clipped_spectrum(rho);
    let n = p.len();
    let rp = spec.to_eigenbasis(rho_prime);
    let mut l = CMat::zeros((n, n));
    let mut kernel_dim = 0;
    let mut qfi = 0.0;
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let s = p[j] + p[k];
            if s <= rank_tol * tr {
                kernel_dim += 1;
                worst = worst.max(rp[[j, k]].norm());
                continue;
            }
            l[[j, k]] = rp[[j, k]] * (2.0 / s);
            qfi += 2.0 * rp[[j, k]].norm_sqr() / s;
        }
    }
    if worst > KERNEL_TOL {
        return Err(Error::InconsistentKernel { magnitude: worst });
    }
    Ok(Sld { operator: Hermitian::symmetrize(&spec.from_eigenbasis(&l)), kernel_dim, qfi })
}

pub fn qfi(rho: &Density, rho_prime: &Hermitian, rank_tol: f64) -> Result<f64> {
    Ok(solve_sld(rho, rho_prime, rank_tol)?.qfi)
}

/// `tr(rho L^2)` for an already solved SLD.
pub fn qfi_from_sld(rho: &Density, sld: &Sld) -> f64 {
    let l2 = sld.operator.dot(&*sld.operator);
    trace_product(rho, &l2).re
}

/// QFI of `rho` with respect to the generator `A`,
/// `sum 2 (p_j - p_k)^2 |A_jk|^2 / (p_j + p_k)`.
pub fn qfi_wrt_operator(rho: &Density, a: &Hermitian, rank_tol: f64) -> Result<f64> {
    check_pair(rho, a)?;
    let (spec, p, tr) = clipped_spectrum(rho);
    Ok(qfi_wrt_operator_in_basis(&spec, &p, tr, a, rank_tol))
}

pub(crate) fn qfi_wrt_operator_in_basis(
    spec: &SpectralDecomposition,
    p: &[f64],
    tr: f64,
    a: &CMat,
    rank_tol: f64,
) -> f64 {
    qfi_from_eigenbasis(p, tr, &spec.to_eigenbasis(a), rank_tol)
}

fn qfi_from_eigenbasis(p: &[f64], tr: f64, ae: &CMat, rank_tol: f64) -> f64 {
    let n = p.len();
    let mut f = 0.0;
    for j in 0..n {
        for k in (j + 1)..n {
            let s = p[j] + p[k];
            if s <= rank_tol * tr {
                continue;
            }
            let d = p[j] - p[k];
            f += 4.0 * d * d * ae[[j, k]].norm_sqr() / s;
        }
    }
    f
}

/// Cached spectrum of a state for repeated `F_A` evaluations.
pub struct StateSpectrum {
    spec: SpectralDecomposition,
    p: Vec<f64>,
    tr: f64,
    rank_tol: f64,
}

impl StateSpectrum {
    pub fn new(rho: &Density, rank_tol: f64) -> Self {
        let (spec, p, tr) = clipped_spectrum(rho);
        StateSpectrum { spec, p, tr, rank_tol }
    }

    pub fn qfi_wrt(&self, a: &CMat) -> f64 {
        qfi_wrt_operator_in_basis(&self.spec, &self.p, self.tr, a, self.rank_tol)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.p
    }

    /// `V^dag A V` in the eigenbasis of the state.
    pub fn to_eigenbasis(&self, a: &CMat) -> CMat {
        self.spec.to_eigenbasis(a)
    }

    /// `F_A` for an operator already expressed in the eigenbasis.
    pub fn qfi_wrt_eigenbasis(&self, ae: &CMat) -> f64 {
        qfi_from_eigenbasis(&self.p, self.tr, ae, self.rank_tol)
    }
}

/// SLD of the unitary family generated by `A`: `2 (i[rho, A])_jk / (p_j + p_k)`.
pub fn sld_wrt_operator(rho: &Density, a: &Hermitian, rank_tol: f64) -> Result<Hermitian> {
    check_pair(rho, a)?;
    let (spec, p, tr) = clipped_spectrum(rho);
    let ae = spec.to_eigenbasis(a);
    let n = p.len();
    let mut l = CMat::zeros((n, n));
    for j in 0..n {
        for k in 0..n {
            let s = p[j] + p[k];
            if s > rank_tol * tr {
                l[[j, k]] = IM * ae[[j, k]] * (2.0 * (p[j] - p[k]) / s);
            }
        }
    }
    Ok(Hermitian::symmetrize(&spec.from_eigenbasis(&l)))
}

pub fn expectation(rho: &Density, a: &CMat) -> Result<C64> {
    check_pair(rho, a)?;
    Ok(trace_product(rho, a))
}

/// `Var(A) = <A^2> - <A>^2`.
pub fn variance(rho: &Density, a: &Hermitian) -> Result<f64> {
    check_pair(rho, a)?;
    let m = trace_product(rho, a).re;
    let m2 = trace_product(rho, &a.dot(&**a)).re;
    Ok((m2 - m * m).max(0.0))
}

/// Exact `dF/dt` at `(t, g)` given the SLD of the current `(rho, rho')`.
/// Accessible channels are left out of the dissipative terms, so the result
/// is the growth rate of the information held by the system and the
/// collected emissions together.
pub fn qfi_rate(rho: &Density, sld: &Sld, model: &ParamModel, t: f64, g: f64) -> Result<f64> {
    rate_terms(rho, sld, model, t, g).map(|(hamiltonian, noise, _)| hamiltonian - noise)
}

/// `dF/dt` of the system state alone: every channel counts as loss.
pub fn system_qfi_rate(rho: &Density, sld: &Sld, model: &ParamModel, t: f64, g: f64) -> Result<f64> {
    rate_terms(rho, sld, model, t, g).map(|(hamiltonian, noise, accessible)| hamiltonian - noise - accessible)
}

/// Rate at which information leaves the system through accessible channels,
/// `sum tr(rho [L, SLD]^dag [L, SLD])` over those channels.
pub fn accessible_flux(rho: &Density, sld: &Sld, model: &ParamModel, t: f64, g: f64) -> Result<f64> {
    rate_terms(rho, sld, model, t, g).map(|(_, _, accessible)| accessible)
}

/// `(Hamiltonian term, noise loss, accessible loss)`.
fn rate_terms(rho: &Density, sld: &Sld, model: &ParamModel, t: f64, g: f64) -> Result<(f64, f64, f64)> {
    check_pair(rho, &sld.operator)?;
    if rho.nrows() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: rho.nrows() });
    }
    let gen = model.generator(t, g)?;
    let l = &*sld.operator;
    let hamiltonian = (IM * trace_product(rho, &comm(&gen.h_prime, l))).re * 2.0;
    let (mut noise, mut accessible) = (0.0, 0.0);
    for ch in &gen.channels {
        let x = comm(&ch.l, l);
        let mut loss = trace_product(rho, &adjoint(&x).dot(&x)).re;
        if let Some(dl) = &ch.dl {
            let y = ch.l_dag.dot(&comm(dl, l)) + adjoint(&x).dot(dl);
            loss += 2.0 * trace_product(rho, &y).re;
        }
        if ch.accessible {
            accessible += loss;
        } else {
            noise += loss;
        }
    }
    Ok((hamiltonian, noise, accessible))
}

/// Fills `qfi` and `qfi_rate` along a propagated trajectory.
pub fn annotate_trajectory(
    traj: &mut [TrajectoryPoint],
    model: &ParamModel,
    g: f64,
    rank_tol: f64,
) -> Result<()> {
    for p in traj.iter_mut() {
        let sld = solve_sld(&p.rho, &p.rho_prime, rank_tol)?;
        p.qfi_rate = Some(qfi_rate(&p.rho, &sld, model, p.t, g)?);
        p.qfi = Some(sld.qfi);
    }
    Ok(())
}

pub fn samples(traj: &[TrajectoryPoint]) -> Vec<QfiSample> {
    traj.iter()
        .map(|p| QfiSample {
            t: p.t,
            qfi: p.qfi.unwrap_or(f64::NAN),
            qfi_rate: p.qfi_rate.unwrap_or(f64::NAN),
            fg: None,
        })
        .collect()
}

fn check_distribution(p: &[f64], dp: &[f64]) -> Result<()> {
    if p.len() != dp.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: dp.len() });
    }
    if let Some(&bad) = p.iter().find(|&&x| x < -1e-12 || !x.is_finite()) {
        return Err(Error::Domain { value: bad, domain: "probabilities >= 0" });
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain { value: total, domain: "sum of probabilities = 1" });
    }
    let dsum: f64 = dp.iter().sum();
    if dsum.abs() > 1e-8 {
        return Err(Error::Domain { value: dsum, domain: "sum of derivatives = 0" });
    }
    Ok(())
}

/// `sum (p_k')^2 / p_k` over outcomes with `p_k > rank_tol`.
pub fn classical_fi(p: &[f64], dp: &[f64], rank_tol: f64) -> Result<f64> {
    check_distribution(p, dp)?;
    Ok(p.iter().zip(dp).filter(|(&pk, _)| pk > rank_tol).map(|(pk, dk)| dk * dk / pk).sum())
}

/// Classical FI in the limit where some `p_k` vanish together with `p_k'`:
/// such outcomes contribute `2 p_k''`.
pub fn classical_fi_limit(p: &[f64], dp: &[f64], ddp: &[f64], rank_tol: f64) -> Result<f64> {
    check_distribution(p, dp)?;
    if ddp.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: ddp.len() });
    }
    let mut f = 0.0;
    for k in 0..p.len() {
        if p[k] > rank_tol {
            f += dp[k] * dp[k] / p[k];
        } else {
            f += 2.0 * ddp[k].max(0.0);
        }
    }
    Ok(f)
}

/// Diagonal of a matrix as real probabilities.
pub fn diagonal(m: &CMat) -> Vec<f64> {
    m.diag().iter().map(|z| z.re).collect()
}

/// Largest deviation of `rho L + L rho` from `2 rho'` projected on the support.
pub fn sld_residual(rho: &Density, rho_prime: &Hermitian, sld: &Sld, rank_tol: f64) -> f64 {
    let (spec, p, tr) = clipped_spectrum(rho);
    let lhs = rho.dot(&*sld.operator) + sld.operator.dot(&**rho);
    let diff = spec.to_eigenbasis(&(lhs - rho_prime.mapv(|z| z * 2.0)));
    let n = p.len();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            if p[j] + p[k] > rank_tol * tr {
                worst = worst.max(diff[[j, k]].norm());
            }
        }
    }
    worst
}

#[cfg(test)]
pub(crate) fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{propagate, uniform_grid, IntegratorConfig, ParamModel};
    use crate::linalg::{identity, max_abs, random_hermitian, sigma_x, sigma_y, sigma_z, zeros, CVec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_state(a: f64, b: f64) -> Density {
        let mut m = zeros(2);
        m[[0, 0]] = real(a);
        m[[1, 1]] = real(b);
        Density::new(m).unwrap()
    }

    #[test]
    fn mixed_qubit_sld() {
        let rho = diag_state(0.75, 0.25);
        let rp = Hermitian::new(sigma_x().mapv(|z| z / 8.0)).unwrap();
        let sld = solve_sld(&rho, &rp, DEFAULT_RANK_TOL).unwrap();
        assert!(max_abs(&(&*sld.operator - &sigma_x().mapv(|z| z / 4.0))) < 1e-15);
        assert!(sld_residual(&rho, &rp, &sld, DEFAULT_RANK_TOL) < 1e-14);
        assert!((sld.qfi - qfi_from_sld(&rho, &sld)).abs() < 1e-15);
    }

    #[test]
    fn pure_state_sld_is_twice_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = crate::linalg::random_state_vector(4, &mut rng);
        let rho = Density::pure(&psi).unwrap();
        // rho' = |phi><psi| + |psi><phi| with <psi|phi> = 0
        let h = random_hermitian(4, &mut rng);
        let hpsi: CVec = h.dot(&psi);
        let overlap: C64 = psi.iter().zip(hpsi.iter()).map(|(a, b)| a.conj() * b).sum();
        let perp: CVec = &hpsi - &psi.mapv(|z| z * overlap);
        let mut rp = zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                rp[[i, j]] = perp[i] * psi[j].conj() + psi[i] * perp[j].conj();
            }
        }
        let rp = Hermitian::new(rp).unwrap();
        let sld = solve_sld(&rho, &rp, DEFAULT_RANK_TOL).unwrap();
        assert!(max_abs(&(&*sld.operator - &rp.mapv(|z| z * 2.0))) < 1e-8);
        let norm2: f64 = perp.iter().map(|z| z.norm_sqr()).sum();
        assert!((sld.qfi - 4.0 * norm2).abs() < 1e-10);
    }

    #[test]
    fn zero_derivative_gives_zero() {
        let rho = diag_state(0.6, 0.4);
        let sld = solve_sld(&rho, &Hermitian::zeros(2), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(max_abs(&sld.operator), 0.0);
        assert_eq!(sld.qfi, 0.0);
    }

    #[test]
    fn kernel_weight_is_rejected() {
        let rho = diag_state(1.0, 0.0);
        let mut m = zeros(2);
        m[[1, 1]] = real(1e-3);
        m[[0, 0]] = real(-1e-3);
        let e = solve_sld(&rho, &Hermitian::new(m).unwrap(), DEFAULT_RANK_TOL);
        assert!(matches!(e, Err(Error::InconsistentKernel { .. })));
    }

    #[test]
    fn operator_qfi_examples() {
        let ground = diag_state(1.0, 0.0);
        let sx = Hermitian::new(sigma_x()).unwrap();
        assert!((qfi_wrt_operator(&ground, &sx, DEFAULT_RANK_TOL).unwrap() - 4.0).abs() < 1e-12);
        assert!((variance(&ground, &sx).unwrap() - 1.0).abs() < 1e-12);
        let id = Hermitian::identity(2);
        assert_eq!(qfi_wrt_operator(&ground, &id, DEFAULT_RANK_TOL).unwrap(), 0.0);
        let mixed = Density::maximally_mixed(2);
        assert_eq!(qfi_wrt_operator(&mixed, &sx, DEFAULT_RANK_TOL).unwrap(), 0.0);
        let l = sld_wrt_operator(&ground, &sx, DEFAULT_RANK_TOL).unwrap();
        assert!((qfi_from_sld(&ground, &Sld { operator: l, kernel_dim: 0, qfi: 0.0 }) - 4.0).abs() < 1e-12);
    }

    fn dephasing_trajectory(t_end: f64, points: usize) -> (ParamModel, Vec<TrajectoryPoint>) {
        let m = ParamModel::linear(zeros(2), sigma_z()).unwrap().with_constant_channel("z", sigma_z());
        let plus = Density::new(identity(2).mapv(|_| real(0.5))).unwrap();
        let mut traj = propagate(&m, &plus, &Hermitian::zeros(2), 0.0, &uniform_grid(t_end, points), &IntegratorConfig::with_step(1e-3))
            .unwrap();
        annotate_trajectory(&mut traj, &m, 0.0, DEFAULT_RANK_TOL).unwrap();
        (m, traj)
    }

    #[test]
    fn dephasing_closed_form_and_rate() {
        let (_, traj) = dephasing_trajectory(1.0, 101);
        for p in &traj {
            let exact = 4.0 * p.t * p.t * (-4.0 * p.t).exp();
            assert!((p.qfi.unwrap() - exact).abs() < 1e-9, "t = {}", p.t);
            let rate = (8.0 * p.t - 16.0 * p.t * p.t) * (-4.0 * p.t).exp();
            assert!((p.qfi_rate.unwrap() - rate).abs() < 1e-5, "t = {}", p.t);
        }
        assert!((traj[50].qfi.unwrap() - 0.1353).abs() < 1e-4);
        assert_eq!(traj[0].qfi_rate.unwrap(), 0.0);
    }

    #[test]
    fn classical_fi_examples() {
        assert_eq!(classical_fi(&[0.3, 0.7], &[0.0, 0.0], 1e-12).unwrap(), 0.0);
        let s = 0.2;
        assert!((classical_fi(&[0.5, 0.5], &[s, -s], 1e-12).unwrap() - 4.0 * s * s).abs() < 1e-15);
        assert!(classical_fi(&[-0.1, 1.1], &[0.0, 0.0], 1e-12).is_err());
        assert!((classical_fi_limit(&[1.0, 0.0], &[0.0, 0.0], &[-0.5, 0.5], 1e-12).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_y_generator_variance() {
        let rho = diag_state(0.9, 0.1);
        let sy = Hermitian::new(sigma_y()).unwrap();
        let f = qfi_wrt_operator(&rho, &sy, DEFAULT_RANK_TOL).unwrap();
        // 4 (p0 - p1)^2 / (p0 + p1) with |<0|sy|1>| = 1
        assert!((f - 4.0 * 0.64).abs() < 1e-12);
        assert!(f <= 4.0 * variance(&rho, &sy).unwrap() + 1e-12);
    }
}
