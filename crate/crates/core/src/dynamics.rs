//! Parameter-dependent Lindblad models and joint propagation of `(rho, rho')`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, frobenius_norm, hermitian_part, max_abs, trace, CMat, Density, Hermitian, C64, IM,
};

/// Operator-valued map `(t, g) -> matrix`.
pub type OpFn = Arc<dyn Fn(f64, f64) -> CMat + Send + Sync>;

pub fn op_fn<F>(f: F) -> OpFn
where
    F: Fn(f64, f64) -> CMat + Send + Sync + 'static,
{
    Arc::new(f)
}

/// Constant operator map.
pub fn constant(m: CMat) -> OpFn {
    Arc::new(move |_, _| m.clone())
}

#[derive(Clone)]
pub struct Channel {
    pub op: OpFn,
    /// `dL/dg`; `None` means identically zero.
    pub deriv: Option<OpFn>,
    /// Emissions into this channel are collected by the experimenter. The
    /// channel acts in the dynamics but is left out of the noise set used
    /// by the rate formula and the span bound.
    pub accessible: bool,
    pub label: String,
}

#[derive(Clone)]
pub struct ParamModel {
    dim: usize,
    hamiltonian: OpFn,
    hamiltonian_deriv: OpFn,
    channels: Vec<Channel>,
    leakage_indices: Vec<usize>,
    time_independent: bool,
    pub label: String,
}

impl fmt::Debug for ParamModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamModel")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("channels", &self.channels.iter().map(|c| c.label.as_str()).collect::<Vec<_>>())
            .field("time_independent", &self.time_independent)
            .finish()
    }
}

impl ParamModel {
    pub fn new(dim: usize, hamiltonian: OpFn, hamiltonian_deriv: OpFn) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(ParamModel {
            dim,
            hamiltonian,
            hamiltonian_deriv,
            channels: Vec::new(),
            leakage_indices: Vec::new(),
            time_independent: false,
            label: String::new(),
        })
    }

    /// `H(g) = H0 + g H1` with constant operators.
    pub fn linear(h0: CMat, h1: CMat) -> Result<Self> {
        let dim = h0.nrows();
        if h1.dim() != h0.dim() {
            return Err(Error::DimensionMismatch { expected: dim, got: h1.nrows() });
        }
        let h1c = h1.clone();
        let h = op_fn(move |_, g| &h0 + &h1c.mapv(|z| z * g));
        let mut m = Self::new(dim, h, constant(h1))?;
        m.time_independent = true;
        Ok(m)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_channel(mut self, label: impl Into<String>, op: OpFn, deriv: Option<OpFn>) -> Self {
        self.channels.push(Channel { op, deriv, accessible: false, label: label.into() });
        self
    }

    pub fn with_constant_channel(self, label: impl Into<String>, l: CMat) -> Self {
        self.with_channel(label, constant(l), None)
    }

    pub fn with_accessible_channel(mut self, label: impl Into<String>, op: OpFn) -> Self {
        self.channels.push(Channel { op, deriv: None, accessible: true, label: label.into() });
        self
    }

    /// Basis indices whose total population must stay below
    /// [`LEAKAGE_LIMIT`] during propagation.
    pub fn with_leakage_monitor(mut self, indices: Vec<usize>) -> Self {
        self.leakage_indices = indices;
        self
    }

    /// Declares that no operator depends on `t`, so generators can be cached.
    pub fn time_independent(mut self, flag: bool) -> Self {
        self.time_independent = flag;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn is_time_independent(&self) -> bool {
        self.time_independent
    }

    pub fn leakage_indices(&self) -> &[usize] {
        &self.leakage_indices
    }

    pub fn hamiltonian(&self, t: f64, g: f64) -> Result<Hermitian> {
        Hermitian::new(self.eval(&self.hamiltonian, t, g)?)
    }

    pub fn hamiltonian_deriv(&self, t: f64, g: f64) -> Result<Hermitian> {
        Hermitian::new(self.eval(&self.hamiltonian_deriv, t, g)?)
    }

    /// Lindblad operators at `(t, g)`; accessible channels included.
    pub fn lindblads(&self, t: f64, g: f64) -> Result<Vec<CMat>> {
        self.channels.iter().map(|c| self.eval(&c.op, t, g)).collect()
    }

    /// Lindblad operators of the noise set, i.e. excluding accessible channels.
    pub fn noise_lindblads(&self, t: f64, g: f64) -> Result<Vec<CMat>> {
        self.channels
            .iter()
            .filter(|c| !c.accessible)
            .map(|c| self.eval(&c.op, t, g))
            .collect()
    }

    fn eval(&self, f: &OpFn, t: f64, g: f64) -> Result<CMat> {
        let m = f(t, g);
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: m.nrows() });
        }
        if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    /// Snapshot of every operator at `(t, g)` with the products the
    /// right-hand sides need.
    pub fn generator(&self, t: f64, g: f64) -> Result<Generator> {
        let h = self.hamiltonian(t, g)?.into_inner();
        let h_prime = self.hamiltonian_deriv(t, g)?.into_inner();
        let mut k = h.mapv(|z| -IM * z);
        let mut channels = Vec::with_capacity(self.channels.len());
        for ch in &self.channels {
            let l = self.eval(&ch.op, t, g)?;
            let l_dag = adjoint(&l);
            let ldl = l_dag.dot(&l);
            k = k - ldl.mapv(|z| z * 0.5);
            let dl = match &ch.deriv {
                Some(f) => {
                    let d = self.eval(f, t, g)?;
                    if max_abs(&d) == 0.0 {
                        None
                    } else {
                        Some(d)
                    }
                }
                None => None,
            };
            channels.push(ChannelSnapshot { l, l_dag, ldl, dl, accessible: ch.accessible });
        }
        let k_dag = adjoint(&k);
        Ok(Generator { h, h_prime, k, k_dag, channels })
    }

    /// Compares `H'` and every `L_j'` with central differences of their parents.
    pub fn check_derivatives(&self, samples: &[(f64, f64)]) -> Result<()> {
        for &(t, g) in samples {
            let d = 1e-5 * g.abs().max(1.0);
            let fd = |f: &OpFn| -> Result<CMat> {
                let plus = self.eval(f, t, g + d)?;
                let minus = self.eval(f, t, g - d)?;
                Ok((plus - minus).mapv(|z| z / (2.0 * d)))
            };
            let compare = |what: &str, exact: CMat, approx: CMat| -> Result<()> {
                let err = frobenius_norm(&(exact - &approx));
                let tol = 1e-6 * frobenius_norm(&approx).max(1.0);
                if err > tol {
                    return Err(Error::InconsistentDerivative { what: what.into(), error: err, t, g });
                }
                Ok(())
            };
            compare("H", self.eval(&self.hamiltonian_deriv, t, g)?, fd(&self.hamiltonian)?)?;
            for ch in &self.channels {
                let exact = match &ch.deriv {
                    Some(f) => self.eval(f, t, g)?,
                    None => crate::linalg::zeros(self.dim),
                };
                compare(&ch.label, exact, fd(&ch.op)?)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ChannelSnapshot {
    pub l: CMat,
    pub l_dag: CMat,
    pub ldl: CMat,
    pub dl: Option<CMat>,
    pub accessible: bool,
}

/// Operators of a model frozen at one `(t, g)`.
#[derive(Clone, Debug)]
pub struct Generator {
    pub h: CMat,
    pub h_prime: CMat,
    /// `-iH - 1/2 sum L^dag L`.
    k: CMat,
    k_dag: CMat,
    pub channels: Vec<ChannelSnapshot>,
}

impl Generator {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// `K X + X K^dag + sum L X L^dag`, the Lindbladian applied to `X`.
    pub fn apply(&self, x: &CMat) -> CMat {
        let mut out = self.k.dot(x) + x.dot(&self.k_dag);
        for ch in &self.channels {
            out = out + ch.l.dot(x).dot(&ch.l_dag);
        }
        out
    }

    pub fn rho_dot(&self, rho: &CMat) -> CMat {
        self.apply(rho)
    }

    pub fn rho_prime_dot(&self, rho: &CMat, rho_prime: &CMat) -> CMat {
        let hr = self.h_prime.dot(rho);
        // -i[H', rho] = -i (H' rho - (H' rho)^dag) for Hermitian H', rho
        let mut out = (&hr - &adjoint(&hr)).mapv(|z| -IM * z) + self.apply(rho_prime);
        for ch in &self.channels {
            if let Some(dl) = &ch.dl {
                let dl_dag = adjoint(dl);
                let x = dl.dot(rho).dot(&ch.l_dag);
                let cross = dl_dag.dot(&ch.l) + ch.l_dag.dot(dl);
                let cr = cross.dot(rho);
                out = out + &x + &adjoint(&x) - (&cr + &adjoint(&cr)).mapv(|z| z * 0.5);
            }
        }
        out
    }
}

fn check_dim(expected: usize, m: &CMat) -> Result<()> {
    if m.nrows() != expected || m.ncols() != expected {
        return Err(Error::DimensionMismatch { expected, got: m.nrows() });
    }
    Ok(())
}

/// Right-hand side of the master equation.
pub fn lindblad_rhs(model: &ParamModel, t: f64, g: f64, rho: &Density) -> Result<Hermitian> {
    check_dim(model.dim(), rho)?;
    let gen = model.generator(t, g)?;
    Ok(Hermitian::symmetrize(&gen.rho_dot(rho)))
}

/// Right-hand side of the equation for `rho' = d rho / dg`.
pub fn derivative_rhs(
    model: &ParamModel,
    t: f64,
    g: f64,
    rho: &Density,
    rho_prime: &Hermitian,
) -> Result<Hermitian> {
    check_dim(model.dim(), rho)?;
    check_dim(model.dim(), rho_prime)?;
    let gen = model.generator(t, g)?;
    Ok(Hermitian::symmetrize(&gen.rho_prime_dot(rho, rho_prime)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub substep_refinement: usize,
    pub hermitize_each_step: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { step: 0.01, substep_refinement: 1, hermitize_each_step: true }
    }
}

impl IntegratorConfig {
    pub fn with_step(step: f64) -> Self {
        IntegratorConfig { step, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!("integrator step must be positive, got {}", self.step)));
        }
        if self.substep_refinement == 0 {
            return Err(Error::InvalidArgument("substep_refinement must be at least 1".into()));
        }
        Ok(())
    }

    fn substeps(&self, dt: f64) -> usize {
        ((dt / self.step).ceil().max(1.0) as usize) * self.substep_refinement
    }
}

/// Eigenvalues below this abort propagation.
pub const POSITIVITY_ABORT: f64 = 1e-6;
/// Population allowed in the monitored top Fock levels.
pub const LEAKAGE_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub rho: Density,
    pub rho_prime: Hermitian,
    pub qfi: Option<f64>,
    pub qfi_rate: Option<f64>,
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    for (i, w) in t_grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NonMonotoneGrid { index: i + 1 });
        }
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Generator lookup that reuses snapshots for time-independent models and
/// the shared endpoint of consecutive RK4 steps otherwise.
struct GenCache<'a> {
    model: &'a ParamModel,
    g: f64,
    fixed: Option<Arc<Generator>>,
    last: Option<(f64, Arc<Generator>)>,
}

impl<'a> GenCache<'a> {
    fn new(model: &'a ParamModel, g: f64) -> Result<Self> {
        let fixed = if model.is_time_independent() {
            Some(Arc::new(model.generator(0.0, g)?))
        } else {
            None
        };
        Ok(GenCache { model, g, fixed, last: None })
    }

    fn at(&mut self, t: f64) -> Result<Arc<Generator>> {
        if let Some(f) = &self.fixed {
            return Ok(f.clone());
        }
        if let Some((tl, gen)) = &self.last {
            if *tl == t {
                return Ok(gen.clone());
            }
        }
        let gen = Arc::new(self.model.generator(t, self.g)?);
        self.last = Some((t, gen.clone()));
        Ok(gen)
    }
}

fn axpy(y: &CMat, a: f64, x: &CMat) -> CMat {
    y + &x.mapv(|z| z * a)
}

fn rk4_step(
    cache: &mut GenCache<'_>,
    t: f64,
    h: f64,
    rho: &CMat,
    rho_prime: Option<&CMat>,
) -> Result<(CMat, Option<CMat>)> {
    let g0 = cache.at(t)?;
    let gm = cache.at(t + 0.5 * h)?;
    // left limit at the step end, so a switch at a grid time only acts after it
    let g1 = cache.at(t + h - 1e-12 * h)?;
    let f = |gen: &Generator, r: &CMat, rp: Option<&CMat>| -> (CMat, Option<CMat>) {
        let dr = gen.rho_dot(r);
        let drp = rp.map(|rp| gen.rho_prime_dot(r, rp));
        (dr, drp)
    };
    let (k1, p1) = f(&g0, rho, rho_prime);
    let r2 = axpy(rho, 0.5 * h, &k1);
    let q2 = rho_prime.zip(p1.as_ref()).map(|(rp, p)| axpy(rp, 0.5 * h, p));
    let (k2, p2) = f(&gm, &r2, q2.as_ref());
    let r3 = axpy(rho, 0.5 * h, &k2);
    let q3 = rho_prime.zip(p2.as_ref()).map(|(rp, p)| axpy(rp, 0.5 * h, p));
    let (k3, p3) = f(&gm, &r3, q3.as_ref());
    let r4 = axpy(rho, h, &k3);
    let q4 = rho_prime.zip(p3.as_ref()).map(|(rp, p)| axpy(rp, h, p));
    let (k4, p4) = f(&g1, &r4, q4.as_ref());
    let w = h / 6.0;
    let new_rho = rho + &(k1 + &k2.mapv(|z| z * 2.0) + &k3.mapv(|z| z * 2.0) + &k4).mapv(|z| z * w);
    let new_rp = match (rho_prime, p1, p2, p3, p4) {
        (Some(rp), Some(p1), Some(p2), Some(p3), Some(p4)) => {
            Some(rp + &(p1 + &p2.mapv(|z| z * 2.0) + &p3.mapv(|z| z * 2.0) + &p4).mapv(|z| z * w))
        }
        _ => None,
    };
    Ok((new_rho, new_rp))
}

fn check_leakage(model: &ParamModel, rho: &CMat, t: f64) -> Result<()> {
    if model.leakage_indices.is_empty() {
        return Ok(());
    }
    let population: f64 = model.leakage_indices.iter().map(|&i| rho[[i, i]].re).sum();
    if population > LEAKAGE_LIMIT {
        return Err(Error::Leakage { population, t });
    }
    Ok(())
}

fn integrate(
    model: &ParamModel,
    rho0: &Density,
    rho_prime0: Option<&Hermitian>,
    g: f64,
    t_grid: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<(Density, Option<Hermitian>)>> {
    config.validate()?;
    check_grid(t_grid)?;
    check_dim(model.dim(), rho0)?;
    if let Some(rp) = rho_prime0 {
        check_dim(model.dim(), rp)?;
    }
    let mut cache = GenCache::new(model, g)?;
    let mut rho: CMat = (**rho0).clone();
    let mut rp: Option<CMat> = rho_prime0.map(|r| (**r).clone());
    check_leakage(model, &rho, t_grid[0])?;
    let mut out = Vec::with_capacity(t_grid.len());
    out.push((rho0.clone(), rho_prime0.cloned()));
    for w in t_grid.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        let n = config.substeps(tb - ta);
        let h = (tb - ta) / n as f64;
        for s in 0..n {
            let t = ta + s as f64 * h;
            let (r, p) = rk4_step(&mut cache, t, h, &rho, rp.as_ref())?;
            rho = r;
            rp = p;
            if config.hermitize_each_step {
                rho = hermitian_part(&rho);
                rp = rp.map(|p| hermitian_part(&p));
            }
        }
        if !rho.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        // renormalize away the O(h^5) trace drift
        let tr = trace(&rho).re;
        rho.mapv_inplace(|z| z / tr);
        check_leakage(model, &rho, tb)?;
        let density = Density::with_positivity_tol(hermitian_part(&rho), POSITIVITY_ABORT, tb)?;
        let prime = rp.as_ref().map(|p| Hermitian::symmetrize(p));
        out.push((density, prime));
    }
    Ok(out)
}

/// Integrates `(rho, rho')` jointly and samples them on `t_grid`.
pub fn propagate(
    model: &ParamModel,
    rho0: &Density,
    rho_prime0: &Hermitian,
    g: f64,
    t_grid: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<TrajectoryPoint>> {
    let raw = integrate(model, rho0, Some(rho_prime0), g, t_grid, config)?;
    Ok(raw
        .into_iter()
        .zip(t_grid)
        .map(|((rho, rp), &t)| TrajectoryPoint {
            t,
            rho,
            rho_prime: rp.expect("derivative propagated"),
            qfi: None,
            qfi_rate: None,
        })
        .collect())
}

/// Integrates `rho` alone.
pub fn propagate_state(
    model: &ParamModel,
    rho0: &Density,
    g: f64,
    t_grid: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<Density>> {
    Ok(integrate(model, rho0, None, g, t_grid, config)?.into_iter().map(|(r, _)| r).collect())
}

pub fn default_fd_delta(g: f64) -> f64 {
    1e-4 * g.abs().max(1.0)
}

/// Central finite difference `[rho(t, g + d) - rho(t, g - d)] / 2d`.
pub fn fd_rho_prime(
    model: &ParamModel,
    rho0: &Density,
    g: f64,
    delta_g: f64,
    t_grid: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<Hermitian>> {
    if !(delta_g > 0.0) {
        return Err(Error::Domain { value: delta_g, domain: "delta_g > 0" });
    }
    let plus = propagate_state(model, rho0, g + delta_g, t_grid, config)?;
    let minus = propagate_state(model, rho0, g - delta_g, t_grid, config)?;
    Ok(plus
        .iter()
        .zip(minus.iter())
        .map(|(p, m)| Hermitian::symmetrize(&(&**p - &**m).mapv(|z: C64| z / (2.0 * delta_g))))
        .collect())
}

/// Evenly spaced grid with `points` samples on `[0, t_end]`.
pub fn uniform_grid(t_end: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![0.0];
    }
    (0..points).map(|i| t_end * i as f64 / (points - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity, random_density, random_hermitian, random_matrix, sigma_z, zeros};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus_state() -> Density {
        Density::new(identity(2).mapv(|_| c(0.5, 0.0))).unwrap()
    }

    fn dephasing(eps: f64, gamma: f64) -> ParamModel {
        ParamModel::linear(zeros(2), sigma_z().mapv(|z| z * eps))
            .unwrap()
            .with_constant_channel("dephasing", sigma_z().mapv(|z| z * gamma.sqrt()))
    }

    #[test]
    fn dephasing_rhs_example() {
        let m = dephasing(1.0, 0.7);
        let r = lindblad_rhs(&m, 0.0, 0.0, &plus_state()).unwrap();
        assert!((r[[0, 1]].re + 0.7).abs() < 1e-14);
        assert!(r[[0, 0]].norm() < 1e-14);
    }

    #[test]
    fn identity_is_stationary_without_dissipation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(4, &mut rng).into_inner();
        let m = ParamModel::linear(h, zeros(4)).unwrap();
        let r = lindblad_rhs(&m, 0.3, 0.0, &Density::maximally_mixed(4)).unwrap();
        assert!(max_abs(&r) < 1e-14);
    }

    #[test]
    fn rhs_is_traceless() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = ParamModel::linear(random_hermitian(3, &mut rng).into_inner(), random_hermitian(3, &mut rng).into_inner())
            .unwrap()
            .with_constant_channel("a", random_matrix(3, &mut rng))
            .with_constant_channel("b", random_matrix(3, &mut rng));
        let rho = random_density(3, 3, &mut rng);
        let r = lindblad_rhs(&m, 0.0, 0.2, &rho).unwrap();
        assert!(trace(&r).norm() < 1e-12);
        let rp = Hermitian::symmetrize(&random_matrix(3, &mut rng));
        let rp = Hermitian::symmetrize(&(&*rp - &identity(3).mapv(|z| z * trace(&rp) / 3.0)));
        let d = derivative_rhs(&m, 0.0, 0.2, &rho, &rp).unwrap();
        assert!(trace(&d).norm() < 1e-12);
    }

    #[test]
    fn derivative_rhs_examples() {
        let m = dephasing(0.8, 0.0);
        let rho = plus_state();
        let d = derivative_rhs(&m, 0.0, 0.0, &rho, &Hermitian::zeros(2)).unwrap();
        let hz = sigma_z().mapv(|z| z * 0.8);
        let expected = (hz.dot(&*rho) - rho.dot(&hz)).mapv(|z| -IM * z);
        assert!(max_abs(&(&*d - &expected)) < 1e-15);
        let still = ParamModel::linear(sigma_z(), zeros(2)).unwrap();
        let d = derivative_rhs(&still, 0.0, 0.0, &rho, &Hermitian::zeros(2)).unwrap();
        assert!(max_abs(&d) == 0.0);
    }

    #[test]
    fn dephasing_coherence_decay() {
        let m = dephasing(1.0, 1.0);
        let grid = uniform_grid(2.0, 21);
        let traj = propagate(&m, &plus_state(), &Hermitian::zeros(2), 0.0, &grid, &IntegratorConfig::default()).unwrap();
        for p in &traj {
            assert!((p.rho[[0, 1]].re - 0.5 * (-2.0 * p.t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn frozen_model_keeps_state() {
        let m = ParamModel::linear(zeros(3), zeros(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_density(3, 2, &mut rng);
        let traj = propagate_state(&m, &rho, 0.0, &[0.0, 0.5, 1.0], &IntegratorConfig::default()).unwrap();
        assert!(max_abs(&(&*traj[2] - &*rho)) < 1e-15);
    }

    #[test]
    fn rejects_bad_grid() {
        let m = dephasing(1.0, 1.0);
        let e = propagate_state(&m, &plus_state(), 0.0, &[0.0, 1.0, 1.0], &IntegratorConfig::default());
        assert!(matches!(e, Err(Error::NonMonotoneGrid { index: 2 })));
    }

    #[test]
    fn derivative_check_flags_wrong_map() {
        let h = op_fn(|_, g| sigma_z().mapv(|z| z * g * g));
        let bad = ParamModel::new(2, h.clone(), constant(sigma_z())).unwrap();
        assert!(bad.check_derivatives(&[(0.0, 1.0)]).is_err());
        let good = ParamModel::new(2, h, op_fn(|_, g| sigma_z().mapv(|z| z * 2.0 * g))).unwrap();
        assert!(good.check_derivatives(&[(0.0, 1.0), (1.0, -0.5)]).is_ok());
    }
}
