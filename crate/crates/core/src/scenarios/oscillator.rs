//! Damped, forced harmonic oscillator in a truncated Fock basis.

use crate::bounds::{project_to_span, BoundConstants};
use crate::dynamics::{op_fn, ParamModel};
use crate::error::{Error, Result};
use crate::fisher::variance;
use crate::linalg::{
    adjoint, annihilation, c, matrix_exp, number_operator, trace_product, zeros, CMat, CVec,
    Density, Hermitian, C64, IM, ONE, ZERO,
};

/// Shape of `H' = dH/dg`. Every kind also carries the linear term
/// `i eps a^dag + h.c.` when `epsilon` is nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForcingKind {
    Linear,
    /// Adds `omega_f N`.
    Quadratic { omega_f: f64 },
    /// Adds `f a^2 + h.c.`.
    TwoPhoton { f: C64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorSpec {
    pub n_max: usize,
    pub gamma: f64,
    pub n_thermal: f64,
    pub epsilon: C64,
    /// Signal detuning; enters `H` as `detuning * N`.
    pub detuning: f64,
    pub forcing: ForcingKind,
    /// Rate of the accessible readout channel.
    pub extra_damping: f64,
    /// Time at which the readout channel is switched on.
    pub extra_damping_from: f64,
    /// Variance amplification `G_s >= 1` of the field driving the readout
    /// channel; 1 is vacuum.
    pub source_squeeze: f64,
    /// Orientation of the source squeezing.
    pub source_phase: f64,
}

impl Default for OscillatorSpec {
    fn default() -> Self {
        OscillatorSpec {
            n_max: 40,
            gamma: 1.0,
            n_thermal: 0.0,
            epsilon: ONE,
            detuning: 0.0,
            forcing: ForcingKind::Linear,
            extra_damping: 0.0,
            extra_damping_from: 0.0,
            source_squeeze: 1.0,
            source_phase: 0.0,
        }
    }
}

fn finite_non_negative(value: f64, domain: &'static str) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::Domain { value, domain });
    }
    Ok(())
}

impl OscillatorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 8 {
            return Err(Error::InvalidArgument(format!("n_max must be at least 8, got {}", self.n_max)));
        }
        finite_non_negative(self.gamma, "gamma >= 0")?;
        finite_non_negative(self.n_thermal, "n_T >= 0")?;
        finite_non_negative(self.extra_damping, "extra_damping >= 0")?;
        if !(self.source_squeeze >= 1.0) || !self.source_squeeze.is_finite() {
            return Err(Error::Domain { value: self.source_squeeze, domain: "G_s >= 1" });
        }
        let finite = [self.epsilon.re, self.epsilon.im, self.detuning, self.extra_damping_from, self.source_phase];
        if !finite.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        match self.forcing {
            ForcingKind::Quadratic { omega_f } if !omega_f.is_finite() => Err(Error::NonFinite),
            ForcingKind::TwoPhoton { f } if !(f.re.is_finite() && f.im.is_finite()) => Err(Error::NonFinite),
            _ => Ok(()),
        }
    }

    /// `gamma (2 n_T + 1)`.
    pub fn gamma_thermal(&self) -> f64 {
        self.gamma * (2.0 * self.n_thermal + 1.0)
    }

    fn linear_part(&self, a: &CMat) -> CMat {
        let ad = adjoint(a);
        let eps = self.epsilon;
        ad.mapv(|z| z * IM * eps) - a.mapv(|z| z * IM * eps.conj())
    }

    pub fn forcing_operator(&self) -> Hermitian {
        let a = annihilation(self.n_max);
        let mut h = self.linear_part(&a);
        match self.forcing {
            ForcingKind::Linear => {}
            ForcingKind::Quadratic { omega_f } => h = h + number_operator(self.n_max).mapv(|z| z * omega_f),
            ForcingKind::TwoPhoton { f } => {
                let a2 = a.dot(&a);
                h = h + a2.mapv(|z| z * f) + adjoint(&a2).mapv(|z| z * f.conj());
            }
        }
        Hermitian::symmetrize(&h)
    }

    /// Readout channel operator `sqrt(k) (cosh r a - e^{i phi} sinh r a^dag)`.
    fn readout_operator(&self, a: &CMat) -> CMat {
        let r = 0.5 * self.source_squeeze.ln();
        let k = self.extra_damping.sqrt();
        let mix = C64::from_polar(r.sinh(), self.source_phase);
        a.mapv(|z| z * k * r.cosh()) - adjoint(a).mapv(|z| z * k * mix)
    }
}

/// `H = g H' + detuning N` with thermal damping channels and an optional
/// accessible readout channel. The top two Fock levels are monitored for
/// leakage.
pub fn damped_oscillator(spec: &OscillatorSpec) -> Result<ParamModel> {
    spec.validate()?;
    let n = spec.n_max;
    let a = annihilation(n);
    let h0 = number_operator(n).mapv(|z| z * spec.detuning);
    let mut model = ParamModel::linear(h0, spec.forcing_operator().into_inner())?
        .with_label("damped oscillator")
        .with_leakage_monitor(vec![n - 2, n - 1]);
    let down = spec.gamma * (spec.n_thermal + 1.0);
    if down > 0.0 {
        model = model.with_constant_channel("decay", a.mapv(|z| z * down.sqrt()));
    }
    let up = spec.gamma * spec.n_thermal;
    if up > 0.0 {
        model = model.with_constant_channel("excitation", adjoint(&a).mapv(|z| z * up.sqrt()));
    }
    if spec.extra_damping > 0.0 {
        let l = spec.readout_operator(&a);
        let from = spec.extra_damping_from;
        if from > 0.0 {
            let off = zeros(n);
            model = model
                .with_accessible_channel("readout", op_fn(move |t, _| if t >= from { l.clone() } else { off.clone() }))
                .time_independent(false);
        } else {
            model = model.with_accessible_channel("readout", crate::dynamics::constant(l));
        }
    }
    Ok(model)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateKind {
    Ground,
    Coherent,
    Fock,
    SqueezedCoherent,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateSpec {
    pub kind: StateKind,
    pub amplitude: C64,
    pub n: usize,
    /// `G_s >= 1`: the `p` quadrature variance is `G_s / 2`, the `x`
    /// quadrature variance `1 / (2 G_s)`.
    pub squeeze: f64,
}

impl StateSpec {
    pub fn ground() -> Self {
        StateSpec { kind: StateKind::Ground, amplitude: ZERO, n: 0, squeeze: 1.0 }
    }

    pub fn coherent(alpha: C64) -> Self {
        StateSpec { kind: StateKind::Coherent, amplitude: alpha, ..Self::ground() }
    }

    pub fn fock(n: usize) -> Self {
        StateSpec { kind: StateKind::Fock, n, ..Self::ground() }
    }

    pub fn squeezed(alpha: C64, squeeze: f64) -> Self {
        StateSpec { kind: StateKind::SqueezedCoherent, amplitude: alpha, squeeze, ..Self::ground() }
    }
}

/// Largest weight allowed outside the truncated space.
const TRUNCATION_LOSS: f64 = 1e-9;
/// Extra levels used while building states by matrix exponentials.
const PADDING: usize = 24;

fn truncation_error(what: String) -> Error {
    Error::InvalidArgument(format!("state does not fit the truncation: {what}"))
}

/// Builds the initial oscillator state on `n_max` levels.
pub fn make_state(spec: &StateSpec, n_max: usize) -> Result<Density> {
    if n_max == 0 {
        return Err(Error::ZeroDimension);
    }
    let alpha = spec.amplitude;
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let psi = match spec.kind {
        StateKind::Ground => fock_vector(0, n_max),
        StateKind::Fock => {
            if spec.n + 6 > n_max {
                return Err(truncation_error(format!("Fock n = {} needs n <= n_max - 6 = {}", spec.n, n_max as i64 - 6)));
            }
            fock_vector(spec.n, n_max)
        }
        StateKind::Coherent => {
            check_mean_occupation(alpha.norm_sqr(), n_max)?;
            coherent_vector(alpha, n_max)?
        }
        StateKind::SqueezedCoherent => {
            if !(spec.squeeze >= 1.0) || !spec.squeeze.is_finite() {
                return Err(Error::Domain { value: spec.squeeze, domain: "G_s >= 1" });
            }
            let r = 0.5 * spec.squeeze.ln();
            check_mean_occupation(alpha.norm_sqr() + r.sinh().powi(2), n_max)?;
            squeezed_vector(alpha, r, n_max)?
        }
    };
    Density::pure(&psi)
}

fn check_mean_occupation(mean: f64, n_max: usize) -> Result<()> {
    let need = mean + 6.0 * mean.sqrt() + 10.0;
    if need > n_max as f64 {
        return Err(truncation_error(format!("mean occupation {mean} needs n_max >= {need:.1}, got {n_max}")));
    }
    Ok(())
}

fn fock_vector(n: usize, dim: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[n] = ONE;
    v
}

fn truncate(full: &CVec, dim: usize) -> Result<CVec> {
    let total: f64 = full.iter().map(|z| z.norm_sqr()).sum();
    let kept: f64 = full.iter().take(dim).map(|z| z.norm_sqr()).sum();
    if total - kept > TRUNCATION_LOSS * total {
        return Err(truncation_error(format!("weight {} above level {}", (total - kept) / total, dim - 1)));
    }
    let norm = kept.sqrt();
    Ok(full.iter().take(dim).map(|z| z / norm).collect())
}

fn coherent_vector(alpha: C64, dim: usize) -> Result<CVec> {
    let full = dim + PADDING;
    let mut v = CVec::zeros(full);
    v[0] = c((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for k in 1..full {
        v[k] = v[k - 1] * alpha / (k as f64).sqrt();
    }
    truncate(&v, dim)
}

fn squeezed_vector(alpha: C64, r: f64, dim: usize) -> Result<CVec> {
    let full = dim + PADDING;
    let a = annihilation(full);
    let ad = adjoint(&a);
    let a2 = a.dot(&a);
    let ad2 = ad.dot(&ad);
    // S(r) = exp(r/2 (a^2 - a^dag^2)) squeezes x = (a + a^dag)/sqrt 2
    let s = matrix_exp(&(&a2 - &ad2).mapv(|z| z * 0.5 * r))?;
    let d = matrix_exp(&(ad.mapv(|z| z * alpha) - a.mapv(|z| z * alpha.conj())))?;
    let vac = fock_vector(0, full);
    truncate(&d.dot(&s.dot(&vac)), dim)
}

/// `(sigma_x^2, sigma_p^2)` for the quadratures `x = (eps a^dag + h.c.)/(sqrt 2 |eps|)`
/// and `p = H'_lin / (sqrt 2 |eps|)`; real positive `eps` when `epsilon = 0`.
pub fn quadrature_variances(rho: &Density, epsilon: C64) -> Result<(f64, f64)> {
    let n = rho.nrows();
    let a = annihilation(n);
    let ad = adjoint(&a);
    let phase = if epsilon.norm() > 0.0 { epsilon / epsilon.norm() } else { ONE };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = Hermitian::symmetrize(&(ad.mapv(|z| z * phase * s) + a.mapv(|z| z * phase.conj() * s)));
    let p = Hermitian::symmetrize(&(ad.mapv(|z| z * IM * phase * s) - a.mapv(|z| z * IM * phase.conj() * s)));
    Ok((variance(rho, &x)?, variance(rho, &p)?))
}

/// Largest quadrature variance over all orientations.
fn max_quadrature_variance(rho: &Density) -> Result<f64> {
    let n = rho.nrows();
    let a = annihilation(n);
    let ad = adjoint(&a);
    let ma = trace_product(rho, &a);
    let maa = trace_product(rho, &a.dot(&a)) - ma * ma;
    let mn = trace_product(rho, &ad.dot(&a)).re - ma.norm_sqr();
    // Var(x_theta) = (2 Var_N + 1)/2 + Re(e^{-2i theta} C_aa), C_aa = <aa> - <a>^2
    Ok(mn + 0.5 + maa.norm())
}

/// `1/2 + N + sqrt(N (N + 1))`, the largest quadrature variance at mean
/// occupation `N`.
pub fn quadrature_cap(n_bar: f64) -> Result<f64> {
    finite_non_negative(n_bar, "N >= 0")?;
    Ok(0.5 + n_bar + (n_bar * (n_bar + 1.0)).sqrt())
}

/// `16 |eps|^2 / gamma^2 (1 - e^{-gamma t / 2})^2`.
pub fn analytic_coherent_qfi(eps_abs: f64, gamma: f64, t: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain { value: gamma, domain: "gamma > 0" });
    }
    finite_non_negative(t, "t >= 0")?;
    let e = -(-0.5 * gamma * t).exp_m1();
    Ok(16.0 * eps_abs * eps_abs / (gamma * gamma) * e * e)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorConstants {
    pub constants: BoundConstants,
    /// `false` for two-photon forcing, whose constants come from the
    /// least-squares span projection at the given state.
    pub in_span: bool,
    /// `p` quadrature variance of the given state.
    pub sigma2_p: f64,
}

/// Bound constants for a spec started in `state`.
///
/// For linear forcing, `c2 = |eps|^2 / gamma_T` and `c1^2 = 2 |eps|^2 s`
/// where `s` is the larger of the initial quadrature variance and the
/// relaxation target, so `c1` holds along the whole `g = 0` trajectory.
/// Quadratic forcing uses the occupation cap `n_cap` when given (else the
/// state's `<N>`); two-photon forcing falls back to the span projection.
pub fn oscillator_constants(spec: &OscillatorSpec, state: &Density, n_cap: Option<f64>) -> Result<OscillatorConstants> {
    spec.validate()?;
    if state.nrows() != spec.n_max {
        return Err(Error::DimensionMismatch { expected: spec.n_max, got: state.nrows() });
    }
    if !(spec.gamma > 0.0) {
        return Err(Error::Domain { value: spec.gamma, domain: "gamma > 0" });
    }
    let eps2 = spec.epsilon.norm_sqr();
    let (_, sigma2_p) = quadrature_variances(state, spec.epsilon)?;
    let relaxed = {
        let k = spec.extra_damping;
        (spec.gamma_thermal() + k * spec.source_squeeze) / (2.0 * (spec.gamma + k))
    };
    let initial = if spec.detuning == 0.0 && spec.source_squeeze == 1.0 {
        sigma2_p
    } else {
        max_quadrature_variance(state)?
    };
    let c1_lin = (2.0 * eps2 * initial.max(relaxed)).sqrt();
    let c2_lin = eps2 / spec.gamma_thermal();
    let h_prime = spec.forcing_operator();
    match spec.forcing {
        ForcingKind::Linear => Ok(OscillatorConstants {
            constants: BoundConstants::hls(c1_lin, c2_lin)?,
            in_span: true,
            sigma2_p,
        }),
        ForcingKind::Quadratic { omega_f } => {
            let number = Hermitian::symmetrize(&number_operator(spec.n_max));
            let n_mean = number.expectation(state);
            let n_bar = match n_cap {
                Some(cap) => {
                    finite_non_negative(cap, "N cap >= 0")?;
                    cap
                }
                None => n_mean,
            };
            let quad = omega_f.abs() * (n_bar / (spec.gamma * (spec.n_thermal + 1.0))).sqrt();
            let c2 = (c2_lin.sqrt() + quad).powi(2);
            let var_n = variance(state, &number)?;
            let c1 = match n_cap {
                Some(cap) if eps2 > 0.0 => {
                    (2.0 * eps2 * quadrature_cap(cap)?).sqrt() + omega_f.abs() * var_n.sqrt()
                }
                _ => variance(state, &h_prime)?.sqrt(),
            };
            Ok(OscillatorConstants { constants: BoundConstants::hls(c1, c2)?, in_span: true, sigma2_p })
        }
        ForcingKind::TwoPhoton { .. } => {
            let model = damped_oscillator(spec)?;
            let ls = model.noise_lindblads(0.0, 0.0)?;
            let proj = project_to_span(&h_prime, &ls)?;
            let decomposition = proj.decomposition(&h_prime, &ls)?;
            let c2: f64 = decomposition
                .a_ops
                .iter()
                .map(|a| trace_product(state, &adjoint(a).dot(a)).re)
                .sum();
            let c1 = variance(state, &h_prime)?.sqrt();
            let c0 = variance(state, &proj.g0)?.sqrt().min(c1);
            Ok(OscillatorConstants {
                constants: BoundConstants::hnls(c0, c1, c2.max(0.0))?,
                in_span: proj.in_span(),
                sigma2_p,
            })
        }
    }
}
