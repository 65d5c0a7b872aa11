//! Dense complex linear algebra: Hermitian eigendecomposition, operator
//! algebra, norms and the matrix exponential.
//!
//! Everything here works on `ndarray::Array2<Complex64>`. The validated
//! newtypes [`Hermitian`] and [`Density`] carry the invariants the rest of
//! the crate relies on and deref to the underlying matrix.

use std::ops::Deref;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub const IM: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Relative tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute tolerance on `tr(rho) = 1`.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue tolerated in a freshly constructed density operator.
pub const POSITIVITY_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 60;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    Array2::eye(n).mapv(|x: f64| c(x, 0.0))
}

pub fn zeros(n: usize) -> CMat {
    Array2::zeros((n, n))
}

pub fn adjoint(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn trace(a: &CMat) -> C64 {
    a.diag().iter().sum()
}

/// `[A, B]` without dimension checks; callers guarantee matching shapes.
pub(crate) fn comm(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

/// `{A, B}` without dimension checks.
pub(crate) fn anticomm(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) + b.dot(a)
}

fn check_square(a: &CMat) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    Ok(r)
}

fn check_same(a: &CMat, b: &CMat) -> Result<()> {
    let n = check_square(a)?;
    let m = check_square(b)?;
    if n != m {
        return Err(Error::DimensionMismatch { expected: n, got: m });
    }
    Ok(())
}

pub fn commutator(a: &CMat, b: &CMat) -> Result<CMat> {
    check_same(a, b)?;
    Ok(comm(a, b))
}

pub fn anticommutator(a: &CMat, b: &CMat) -> Result<CMat> {
    check_same(a, b)?;
    Ok(anticomm(a, b))
}

/// Hilbert-Schmidt inner product `tr(A^dag B)`.
pub fn trace_inner(a: &CMat, b: &CMat) -> Result<C64> {
    check_same(a, b)?;
    Ok(trace_inner_unchecked(a, b))
}

pub(crate) fn trace_inner_unchecked(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[[i, k]] * b[[k, i]];
        }
    }
    acc
}

pub fn frobenius_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn one_norm(a: &CMat) -> f64 {
    a.columns()
        .into_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value.
pub fn operator_norm(a: &CMat) -> Result<f64> {
    check_square(a)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let gram = adjoint(a).dot(a);
    let spec = eigh_unchecked(&hermitian_part(&gram));
    Ok(spec.values[spec.values.len() - 1].max(0.0).sqrt())
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + &adjoint(a)).mapv(|z| z * 0.5)
}

pub fn hermiticity_defect(a: &CMat) -> f64 {
    frobenius_norm(&(a - &adjoint(a)))
}

fn all_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Hermitian operator, `A = A^dag` within `1e-12 ||A||`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMat);

impl Hermitian {
    pub fn new(a: CMat) -> Result<Self> {
        check_square(&a)?;
        if !all_finite(&a) {
            return Err(Error::NonFinite);
        }
        let norm = frobenius_norm(&a);
        let deviation = hermiticity_defect(&a);
        if deviation > HERMITIAN_TOL * norm.max(f64::MIN_POSITIVE) && deviation > 0.0 {
            return Err(Error::NotHermitian { deviation, norm });
        }
        Ok(Hermitian(hermitian_part(&a)))
    }

    /// Projects onto the Hermitian part, `(A + A^dag) / 2`.
    pub fn symmetrize(a: &CMat) -> Self {
        Hermitian(hermitian_part(a))
    }

    pub fn zeros(n: usize) -> Self {
        Hermitian(zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Hermitian(identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    /// `<A> = tr(rho A)`.
    pub fn expectation(&self, rho: &Density) -> f64 {
        trace_product(rho, &self.0).re
    }

    pub fn scaled(&self, s: f64) -> Self {
        Hermitian(self.0.mapv(|z| z * s))
    }
}

impl Deref for Hermitian {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

/// Density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct Density(Hermitian);

impl Density {
    pub fn new(a: CMat) -> Result<Self> {
        Self::with_positivity_tol(a, POSITIVITY_TOL, f64::NAN)
    }

    /// Accepts eigenvalues down to `-tol`; `t` is only used for diagnostics.
    pub(crate) fn with_positivity_tol(a: CMat, tol: f64, t: f64) -> Result<Self> {
        let h = Hermitian::new(a)?;
        let tr = trace(&h).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace: tr });
        }
        if h.dim() == 0 {
            return Err(Error::ZeroDimension);
        }
        let spec = eigh_unchecked(&h);
        let min = spec.values[0];
        if min < -tol {
            return Err(Error::NotPositive { min_eigenvalue: min, t });
        }
        Ok(Density(h))
    }

    /// Skips the spectral check; used on hot paths where the matrix is
    /// known to come from a positive state.
    pub(crate) fn trusted(a: CMat) -> Self {
        Density(Hermitian(a))
    }

    pub fn pure(psi: &CVec) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("state vector has zero norm".into()));
        }
        let v = psi.mapv(|z| z / norm);
        let n = v.len();
        let mut m = zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = v[i] * v[j].conj();
            }
        }
        Ok(Density(Hermitian(m)))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Density(Hermitian(identity(n).mapv(|z| z / n as f64)))
    }

    pub fn purity(&self) -> f64 {
        trace_product(self, self).re
    }

    pub fn as_hermitian(&self) -> &Hermitian {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0.into_inner()
    }
}

impl Deref for Density {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

/// `A = V diag(values) V^dag`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub values: Array1<f64>,
    pub vectors: CMat,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let p = self.values[j];
            scaled.column_mut(j).mapv_inplace(|z| z * p);
        }
        scaled.dot(&adjoint(&self.vectors))
    }

    /// `V^dag A V`.
    pub fn to_eigenbasis(&self, a: &CMat) -> CMat {
        adjoint(&self.vectors).dot(a).dot(&self.vectors)
    }

    /// `V A V^dag`.
    pub fn from_eigenbasis(&self, a: &CMat) -> CMat {
        self.vectors.dot(a).dot(&adjoint(&self.vectors))
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
pub fn eig_hermitian(a: &CMat) -> Result<SpectralDecomposition> {
    check_square(a)?;
    if !all_finite(a) {
        return Err(Error::NonFinite);
    }
    let norm = frobenius_norm(a);
    let deviation = hermiticity_defect(a);
    if deviation > HERMITIAN_TOL * norm && deviation > 0.0 {
        return Err(Error::NotHermitian { deviation, norm });
    }
    Ok(eigh_unchecked(&hermitian_part(a)))
}

fn off_diagonal_norm(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[[i, j]].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Jacobi sweep on an input that is already exactly Hermitian.
pub(crate) fn eigh_unchecked(a: &CMat) -> SpectralDecomposition {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = identity(n);
    let scale = frobenius_norm(&m);
    if scale == 0.0 {
        return SpectralDecomposition { values: Array1::zeros(n), vectors: v };
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&m) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                let abs = apq.norm();
                if abs <= 1e-300 || abs <= 1e-18 * scale {
                    continue;
                }
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let phase = apq / abs;
                let theta = (aqq - app) / (2.0 * abs);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // U = diag(1, e^{-i phi}) * [[c, s], [-s, c]]
                let u_pp = c(cs, 0.0);
                let u_pq = c(sn, 0.0);
                let u_qp = -phase.conj() * sn;
                let u_qq = phase.conj() * cs;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = mkp * u_pp + mkq * u_qp;
                    m[[k, q]] = mkp * u_pq + mkq * u_qq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = u_pp.conj() * mpk + u_qp.conj() * mqk;
                    m[[q, k]] = u_pq.conj() * mpk + u_qq.conj() * mqk;
                }
                m[[p, p]] = c(app - t * abs, 0.0);
                m[[q, q]] = c(aqq + t * abs, 0.0);
                m[[p, q]] = ZERO;
                m[[q, p]] = ZERO;
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp * u_pp + vkq * u_qp;
                    v[[k, q]] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].re.total_cmp(&m[[j, j]].re));
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]].re));
    let mut vectors = zeros(n);
    for (new, &old) in order.iter().enumerate() {
        vectors.column_mut(new).assign(&v.column(old));
    }
    SpectralDecomposition { values, vectors }
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn matrix_exp(a: &CMat) -> Result<CMat> {
    let n = check_square(a)?;
    if !all_finite(a) {
        return Err(Error::NonFinite);
    }
    let norm = one_norm(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let b = a.mapv(|z| z * scale);
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=40 {
        term = term.dot(&b).mapv(|z| z / k as f64);
        result = result + &term;
        if one_norm(&term) <= 1e-18 * one_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    Ok(result)
}

pub fn sigma_x() -> CMat {
    ndarray::arr2(&[[ZERO, ONE], [ONE, ZERO]])
}

pub fn sigma_y() -> CMat {
    ndarray::arr2(&[[ZERO, -IM], [IM, ZERO]])
}

pub fn sigma_z() -> CMat {
    ndarray::arr2(&[[ONE, ZERO], [ZERO, -ONE]])
}

/// Truncated annihilation operator on Fock levels `0..dim`.
pub fn annihilation(dim: usize) -> CMat {
    let mut a = zeros(dim);
    for n in 1..dim {
        a[[n - 1, n]] = c((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn number_operator(dim: usize) -> CMat {
    let mut m = zeros(dim);
    for n in 0..dim {
        m[[n, n]] = c(n as f64, 0.0);
    }
    m
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

pub fn scale(a: &CMat, s: C64) -> CMat {
    a.mapv(|z| z * s)
}

// Random generators for property suites.

pub fn random_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    Array2::from_shape_fn((n, n), |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Hermitian {
    Hermitian::symmetrize(&random_matrix(n, rng))
}

pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let h = random_hermitian(n, rng);
    matrix_exp(&scale(&h, IM * 3.0)).expect("finite input")
}

pub fn random_state_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    let v = Array1::from_shape_fn(n, |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv(|z| z / norm)
}

/// Random density operator of the given rank (`rank = 1` gives a pure state).
pub fn random_density<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Density {
    let rank = rank.clamp(1, n);
    let mut m = zeros(n);
    let mut total = 0.0;
    for _ in 0..rank {
        let w: f64 = rng.random_range(0.05..1.0);
        let v = random_state_vector(n, rng);
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] += v[i] * v[j].conj() * w;
            }
        }
        total += w;
    }
    Density::trusted(hermitian_part(&m.mapv(|z| z / total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    #[test]
    fn pauli_spectra() {
        let s = eig_hermitian(&sigma_z()).unwrap();
        assert!((s.values[0] + 1.0).abs() < 1e-14 && (s.values[1] - 1.0).abs() < 1e-14);
        let s = eig_hermitian(&sigma_x()).unwrap();
        assert!((s.values[0] + 1.0).abs() < 1e-14 && (s.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 6, 9, 16] {
            let a = random_hermitian(n, &mut rng);
            let s = eig_hermitian(&a).unwrap();
            let norm = frobenius_norm(&a);
            assert!(frobenius_norm(&(s.reconstruct() - a.as_mat())) <= 1e-10 * norm);
            let vv = adjoint(&s.vectors).dot(&s.vectors);
            assert!(close(&vv, &identity(n), 1e-10));
            for w in s.values.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = sigma_x();
        a[[0, 1]] = c(2.0, 0.0);
        match eig_hermitian(&a) {
            Err(Error::NotHermitian { deviation, .. }) => assert!(deviation > 0.9),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn pauli_algebra() {
        let cxy = commutator(&sigma_x(), &sigma_y()).unwrap();
        assert!(close(&cxy, &scale(&sigma_z(), c(0.0, 2.0)), 1e-15));
        let azz = anticommutator(&sigma_z(), &sigma_z()).unwrap();
        assert!(close(&azz, &scale(&identity(2), c(2.0, 0.0)), 1e-15));
        assert!((operator_norm(&sigma_z()).unwrap() - 1.0).abs() < 1e-14);
        assert!(commutator(&sigma_x(), &identity(3)).is_err());
    }

    #[test]
    fn exp_examples() {
        assert!(close(&matrix_exp(&zeros(3)).unwrap(), &identity(3), 0.0));
        let a = scale(&sigma_x(), IM * std::f64::consts::FRAC_PI_2);
        assert!(close(&matrix_exp(&a).unwrap(), &scale(&sigma_x(), IM), 1e-14));
    }

    #[test]
    fn exp_inverse_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 4, 7] {
            let mut a = random_matrix(n, &mut rng);
            let s = 10.0 / operator_norm(&a).unwrap();
            a.mapv_inplace(|z| z * s);
            let e = matrix_exp(&a).unwrap();
            let einv = matrix_exp(&a.mapv(|z| -z)).unwrap();
            assert!(close(&e.dot(&einv), &identity(n), 1e-9));
        }
    }

    #[test]
    fn displacement_composition() {
        // D(b) D(d) = exp((b d* - b* d)/2) D(b + d), compared on the vacuum.
        let n = 41;
        let a = annihilation(n);
        let ad = adjoint(&a);
        let disp = |beta: C64| matrix_exp(&(scale(&ad, beta) - scale(&a, beta.conj()))).unwrap();
        let mut vac = CVec::zeros(n);
        vac[0] = ONE;
        for (b, d) in [(c(0.3, -0.7), c(-0.5, 0.2)), (c(1.0, 0.0), c(0.0, 1.0))] {
            let lhs = disp(b).dot(&disp(d)).dot(&vac);
            let phase = ((b * d.conj() - b.conj() * d) * 0.5).exp();
            let rhs = disp(b + d).dot(&vac).mapv(|z| z * phase);
            let err = lhs.iter().zip(rhs.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "err = {err}");
        }
    }

    #[test]
    fn density_validation() {
        assert!(Density::new(sigma_z()).is_err());
        let mut m = zeros(2);
        m[[0, 0]] = c(1.2, 0.0);
        m[[1, 1]] = c(-0.2, 0.0);
        assert!(matches!(Density::new(m), Err(Error::NotPositive { .. })));
        assert!(Density::new(Density::maximally_mixed(3).into_inner()).is_ok());
    }
}
