//! Decompositions of `H'` over the Lindblad span
//! `{I, L_j, L_j^dag, L_j^dag L_k}` and the rate bound they induce.

use super::neldermead::{self, NelderMeadOptions};
use crate::error::{Error, Result};
use crate::fisher::StateSpectrum;
use crate::linalg::{
    adjoint, c, eigh_unchecked, frobenius_norm, hermitian_part, identity, trace_inner_unchecked,
    trace_product, CMat, Density, Hermitian, C64, IM, ZERO,
};

/// `H' = G + a I + sum_j (b_j^* L_j + b_j L_j^dag) + sum_jk g_jk L_j^dag L_k`.
#[derive(Clone, Debug)]
pub struct SpanDecomposition {
    pub alpha: f64,
    pub beta: Vec<C64>,
    pub gamma: CMat,
    pub g: Hermitian,
    /// `A_j = i (b_j I + sum_k g_jk L_k)`.
    pub a_ops: Vec<CMat>,
}

fn span_combination(ls: &[CMat], beta: &[C64], gamma: &CMat, n: usize) -> CMat {
    let mut s = CMat::zeros((n, n));
    for (j, l) in ls.iter().enumerate() {
        s = s + l.mapv(|z| z * beta[j].conj()) + adjoint(l).mapv(|z| z * beta[j]);
    }
    for j in 0..ls.len() {
        let ldj = adjoint(&ls[j]);
        for k in 0..ls.len() {
            if gamma[[j, k]] != ZERO {
                s = s + ldj.dot(&ls[k]).mapv(|z| z * gamma[[j, k]]);
            }
        }
    }
    s
}

fn check_ops(h_prime: &Hermitian, ls: &[CMat]) -> Result<usize> {
    let n = h_prime.dim();
    for l in ls {
        if l.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, got: l.nrows() });
        }
    }
    Ok(n)
}

pub fn build_decomposition(
    h_prime: &Hermitian,
    ls: &[CMat],
    alpha: f64,
    beta: &[C64],
    gamma: &CMat,
) -> Result<SpanDecomposition> {
    let n = check_ops(h_prime, ls)?;
    let m = ls.len();
    if beta.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: beta.len() });
    }
    if gamma.dim() != (m, m) {
        return Err(Error::DimensionMismatch { expected: m, got: gamma.nrows() });
    }
    let defect = frobenius_norm(&(gamma - &adjoint(gamma)));
    if defect > 1e-12 * frobenius_norm(gamma).max(1.0) {
        return Err(Error::NotHermitian { deviation: defect, norm: frobenius_norm(gamma) });
    }
    let span = span_combination(ls, beta, gamma, n);
    let g = &**h_prime - &span - &identity(n).mapv(|z| z * alpha);
    let a_ops = (0..m)
        .map(|j| {
            let mut a = identity(n).mapv(|z| z * beta[j]);
            for k in 0..m {
                a = a + ls[k].mapv(|z| z * gamma[[j, k]]);
            }
            a.mapv(|z| z * IM)
        })
        .collect();
    Ok(SpanDecomposition {
        alpha,
        beta: beta.to_vec(),
        gamma: gamma.clone(),
        g: Hermitian::symmetrize(&g),
        a_ops,
    })
}

/// Number of real parameters describing `(beta, gamma)` for `m` channels.
pub fn parameter_count(m: usize) -> usize {
    2 * m + m * m
}

/// Real parameterization: `(Re b_j, Im b_j)` pairs, then `g_jj`, then
/// `(Re g_jk, Im g_jk)` for `j < k`.
pub fn unpack(m: usize, x: &[f64]) -> (Vec<C64>, CMat) {
    let beta: Vec<C64> = (0..m).map(|j| c(x[2 * j], x[2 * j + 1])).collect();
    let mut gamma = CMat::zeros((m, m));
    let mut i = 2 * m;
    for j in 0..m {
        gamma[[j, j]] = c(x[i], 0.0);
        i += 1;
    }
    for j in 0..m {
        for k in (j + 1)..m {
            gamma[[j, k]] = c(x[i], x[i + 1]);
            gamma[[k, j]] = c(x[i], -x[i + 1]);
            i += 2;
        }
    }
    (beta, gamma)
}

pub fn pack(beta: &[C64], gamma: &CMat) -> Vec<f64> {
    let m = beta.len();
    let mut x = Vec::with_capacity(parameter_count(m));
    for b in beta {
        x.push(b.re);
        x.push(b.im);
    }
    for j in 0..m {
        x.push(gamma[[j, j]].re);
    }
    for j in 0..m {
        for k in (j + 1)..m {
            x.push(gamma[[j, k]].re);
            x.push(gamma[[j, k]].im);
        }
    }
    x
}

/// Hermitian basis operators `B_i` with `span_combination = sum_i x_i B_i`.
fn basis_operators(ls: &[CMat]) -> Vec<CMat> {
    let m = ls.len();
    let mut out = Vec::with_capacity(parameter_count(m));
    for l in ls {
        let ld = adjoint(l);
        out.push(l + &ld);
        out.push((&ld - l).mapv(|z| z * IM));
    }
    for l in ls {
        out.push(adjoint(l).dot(l));
    }
    for j in 0..m {
        for k in (j + 1)..m {
            let jk = adjoint(&ls[j]).dot(&ls[k]);
            let kj = adjoint(&jk);
            out.push(&jk + &kj);
            out.push((&jk - &kj).mapv(|z| z * IM));
        }
    }
    out.into_iter().map(|b| hermitian_part(&b)).collect()
}

#[derive(Clone, Debug)]
pub struct SpanProjection {
    pub alpha: f64,
    pub beta: Vec<C64>,
    pub gamma: CMat,
    pub g0: Hermitian,
    pub residual_norm: f64,
}

impl SpanProjection {
    pub fn decomposition(&self, h_prime: &Hermitian, ls: &[CMat]) -> Result<SpanDecomposition> {
        build_decomposition(h_prime, ls, self.alpha, &self.beta, &self.gamma)
    }

    /// `true` when `H'` lies in the span (residual below `1e-9`).
    pub fn in_span(&self) -> bool {
        self.residual_norm <= 1e-9
    }
}

/// Least-squares projection of `H'` onto the Lindblad span under the
/// Hilbert-Schmidt inner product.
pub fn project_to_span(h_prime: &Hermitian, ls: &[CMat]) -> Result<SpanProjection> {
    let n = check_ops(h_prime, ls)?;
    let m = ls.len();
    let mut basis = vec![identity(n)];
    basis.extend(basis_operators(ls));
    let k = basis.len();
    let mut gram = CMat::zeros((k, k));
    let mut rhs = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            gram[[i, j]] = c(trace_inner_unchecked(&basis[i], &basis[j]).re, 0.0);
        }
        rhs[i] = trace_inner_unchecked(&basis[i], h_prime).re;
    }
    // pseudo-inverse through the spectrum of the real symmetric Gram matrix
    let spec = eigh_unchecked(&gram);
    let top = spec.values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut x = vec![0.0; k];
    for (idx, &lam) in spec.values.iter().enumerate() {
        if lam.abs() <= 1e-12 * top {
            continue;
        }
        let v = spec.vectors.column(idx);
        let proj: f64 = (0..k).map(|i| v[i].re * rhs[i]).sum::<f64>() / lam;
        for i in 0..k {
            x[i] += proj * v[i].re;
        }
    }
    let alpha = x[0];
    let (beta, gamma) = unpack(m, &x[1..]);
    let mut g0 = (**h_prime).clone() - identity(n).mapv(|z| z * alpha);
    for (xi, b) in x[1..].iter().zip(&basis[1..]) {
        g0 = g0 - b.mapv(|z| z * *xi);
    }
    let g0 = Hermitian::symmetrize(&g0);
    let residual_norm = frobenius_norm(&g0);
    Ok(SpanProjection { alpha, beta, gamma, g0, residual_norm })
}

/// `4 (sqrt(F_G F / 4) + sum_j <A_j^dag A_j>)`.
pub fn rate_bound(rho: &Density, qfi_value: f64, decomp: &SpanDecomposition, rank_tol: f64) -> Result<f64> {
    if !(qfi_value >= 0.0) {
        return Err(Error::Domain { value: qfi_value, domain: "F >= 0" });
    }
    if rho.nrows() != decomp.g.dim() {
        return Err(Error::DimensionMismatch { expected: decomp.g.nrows(), got: rho.nrows() });
    }
    let fg = StateSpectrum::new(rho, rank_tol).qfi_wrt(&decomp.g);
    let channel: f64 = decomp.a_ops.iter().map(|a| trace_product(rho, &adjoint(a).dot(a)).re).sum();
    Ok(4.0 * ((0.25 * fg * qfi_value).sqrt() + channel))
}

/// State data for fast evaluation of the bound over the real parameters.
pub struct BoundObjective {
    m: usize,
    qfi: f64,
    spectrum: StateSpectrum,
    h_e: CMat,
    basis_e: Vec<CMat>,
    mean_l: Vec<C64>,
    mean_ldl: CMat,
}

impl BoundObjective {
    pub fn new(rho: &Density, qfi_value: f64, h_prime: &Hermitian, ls: &[CMat], rank_tol: f64) -> Result<Self> {
        check_ops(h_prime, ls)?;
        if rho.nrows() != h_prime.dim() {
            return Err(Error::DimensionMismatch { expected: h_prime.nrows(), got: rho.nrows() });
        }
        if !(qfi_value >= 0.0) {
            return Err(Error::Domain { value: qfi_value, domain: "F >= 0" });
        }
        let m = ls.len();
        let spectrum = StateSpectrum::new(rho, rank_tol);
        let to_e = |a: &CMat| spectrum.to_eigenbasis(a);
        let h_e = to_e(h_prime);
        let basis_e = basis_operators(ls).iter().map(to_e).collect();
        let mean_l = ls.iter().map(|l| trace_product(rho, l)).collect();
        let mut mean_ldl = CMat::zeros((m, m));
        for k in 0..m {
            let ldk = adjoint(&ls[k]);
            for l in 0..m {
                mean_ldl[[k, l]] = trace_product(rho, &ldk.dot(&ls[l]));
            }
        }
        Ok(BoundObjective { m, qfi: qfi_value, spectrum, h_e, basis_e, mean_l, mean_ldl })
    }

    pub fn channels(&self) -> usize {
        self.m
    }

    /// `F_G` for the remainder at parameters `x`.
    pub fn fg(&self, x: &[f64]) -> f64 {
        let mut g = self.h_e.clone();
        for (xi, b) in x.iter().zip(&self.basis_e) {
            if *xi != 0.0 {
                g.scaled_add(c(-*xi, 0.0), b);
            }
        }
        self.spectrum.qfi_wrt_eigenbasis(&g)
    }

    /// `sum_j <A_j^dag A_j>` at parameters `x`.
    pub fn channel_term(&self, x: &[f64]) -> f64 {
        let (beta, gamma) = unpack(self.m, x);
        let mut total = 0.0;
        for j in 0..self.m {
            let mut v = beta[j].norm_sqr();
            let mut cross = ZERO;
            for k in 0..self.m {
                cross += gamma[[j, k]] * self.mean_l[k];
                for l in 0..self.m {
                    v += (gamma[[j, k]].conj() * gamma[[j, l]] * self.mean_ldl[[k, l]]).re;
                }
            }
            v += 2.0 * (beta[j].conj() * cross).re;
            total += v;
        }
        total.max(0.0)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        4.0 * ((0.25 * self.fg(x) * self.qfi).sqrt() + self.channel_term(x))
    }
}

#[derive(Clone, Debug)]
pub struct OptimizedBound {
    pub decomposition: SpanDecomposition,
    pub bound: f64,
    /// Bound at zero coefficients, `2 sqrt(F_{H'} F)`.
    pub bound_at_zero: f64,
    /// Bound at the least-squares projection coefficients.
    pub bound_at_projection: f64,
    /// Simplex search met its tolerance; the bound is valid either way.
    pub converged: bool,
    pub parameters: Vec<f64>,
}

/// Minimizes the rate bound over `(beta, gamma)` by Nelder-Mead with starts
/// at zero, the full projection and their midpoint. `alpha` centers the
/// spectrum of `G`.
pub fn optimize_rate_bound(
    rho: &Density,
    qfi_value: f64,
    h_prime: &Hermitian,
    ls: &[CMat],
    rank_tol: f64,
) -> Result<OptimizedBound> {
    let objective = BoundObjective::new(rho, qfi_value, h_prime, ls, rank_tol)?;
    let projection = project_to_span(h_prime, ls)?;
    let m = ls.len();
    let p = parameter_count(m);
    let zero = vec![0.0; p];
    let full = pack(&projection.beta, &projection.gamma);
    let mid: Vec<f64> = full.iter().map(|x| 0.5 * x).collect();
    let bound_at_zero = objective.value(&zero);
    let bound_at_projection = objective.value(&full);

    let mut best = if bound_at_zero <= bound_at_projection {
        (zero.clone(), bound_at_zero)
    } else {
        (full.clone(), bound_at_projection)
    };
    let mut converged = true;
    if p > 0 {
        let scale = full.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(0.1);
        let opts = NelderMeadOptions { max_evals: 400 * (p + 1), ..Default::default() };
        for x0 in [zero, full, mid] {
            let step: Vec<f64> = x0.iter().map(|x| 0.2 * x.abs().max(scale)).collect();
            let r = neldermead::minimize(|x| objective.value(x), &x0, &step, &opts);
            if r.f < best.1 {
                best = (r.x, r.f);
            }
            converged &= r.converged;
        }
        // restarts from the incumbent guard against simplex collapse
        for shrink in [0.05, 0.01] {
            let step: Vec<f64> = best.0.iter().map(|x| shrink * x.abs().max(scale)).collect();
            let r = neldermead::minimize(|x| objective.value(x), &best.0, &step, &opts);
            if r.f < best.1 {
                best = (r.x, r.f);
            }
            converged &= r.converged;
        }
    }
    let (beta, gamma) = unpack(m, &best.0);
    let span = span_combination(ls, &beta, &gamma, h_prime.dim());
    let g_raw = Hermitian::symmetrize(&(&**h_prime - &span));
    let spec = eigh_unchecked(&g_raw);
    let alpha = if spec.values.is_empty() {
        0.0
    } else {
        0.5 * (spec.values[0] + spec.values[spec.values.len() - 1])
    };
    let decomposition = build_decomposition(h_prime, ls, alpha, &beta, &gamma)?;
    Ok(OptimizedBound {
        decomposition,
        bound: best.1,
        bound_at_zero,
        bound_at_projection,
        converged,
        parameters: best.0,
    })
}
