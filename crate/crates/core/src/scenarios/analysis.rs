//! Bound columns along a simulated trajectory.

use crate::bounds::{
    hnls_curve, hnls_rate, integrate_rate_bound, optimize_rate_bound, project_to_span, BoundConstants,
};
use crate::dynamics::{check_grid, ParamModel};
use crate::error::{Error, Result};
use crate::fisher::StateSpectrum;
use crate::linalg::{adjoint, trace_product, Density};

use super::Simulation;

/// Rate bound `a sqrt(F) + b` valid at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundLine {
    pub a: f64,
    pub b: f64,
}

impl BoundLine {
    pub fn rate(&self, f: f64) -> f64 {
        self.a * f.max(0.0).sqrt() + self.b
    }

    fn max(self, other: BoundLine) -> BoundLine {
        BoundLine { a: self.a.max(other.a), b: self.b.max(other.b) }
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryBounds {
    pub times: Vec<f64>,
    /// Optimized instantaneous rate bound at the simulated `F`.
    pub rate_bound: Vec<f64>,
    /// Per time: lines from the optimized, zero and projection decompositions.
    pub lines: Vec<[BoundLine; 3]>,
    /// Largest `sqrt(F_{G0} / 4)` seen on the grid.
    pub c0: f64,
    /// Largest `sqrt(F_{H'} / 4)` seen on the grid.
    pub c1: f64,
    /// Largest `sum <A^dag A>` of the projection seen on the grid.
    pub c2: f64,
    /// `H'` lies in the noise span at every grid time.
    pub in_span: bool,
    pub converged: bool,
}

impl TrajectoryBounds {
    /// Constants for the closed-form curves; `c0` is clipped to `c1`.
    pub fn constants(&self) -> Result<BoundConstants> {
        BoundConstants::hnls(self.c0.min(self.c1), self.c1, self.c2)
    }
}

fn check_static_noise(model: &ParamModel) -> Result<()> {
    if model.channels().iter().any(|c| !c.accessible && c.deriv.is_some()) {
        return Err(Error::InvalidArgument(
            "span bounds need g-independent noise channels; this model has L' terms".into(),
        ));
    }
    Ok(())
}

fn channel_sum(rho: &Density, a_ops: &[crate::linalg::CMat]) -> f64 {
    a_ops.iter().map(|a| trace_product(rho, &adjoint(a).dot(a)).re).sum::<f64>().max(0.0)
}

/// Evaluates the span bounds at every point of `sim`, using the total
/// (system plus collected) QFI as `F`.
pub fn trajectory_bounds(model: &ParamModel, sim: &Simulation, g: f64, rank_tol: f64) -> Result<TrajectoryBounds> {
    check_static_noise(model)?;
    let f_total = sim.qfi();
    let mut out = TrajectoryBounds {
        times: sim.times(),
        rate_bound: Vec::with_capacity(f_total.len()),
        lines: Vec::with_capacity(f_total.len()),
        c0: 0.0,
        c1: 0.0,
        c2: 0.0,
        in_span: true,
        converged: true,
    };
    for (p, &f) in sim.points.iter().zip(&f_total) {
        if !f.is_finite() {
            return Err(Error::NonFinite);
        }
        let h_prime = model.hamiltonian_deriv(p.t, g)?;
        let ls = model.noise_lindblads(p.t, g)?;
        let spectrum = StateSpectrum::new(&p.rho, rank_tol);
        let opt = optimize_rate_bound(&p.rho, f.max(0.0), &h_prime, &ls, rank_tol)?;
        let projection = project_to_span(&h_prime, &ls)?;
        let proj = projection.decomposition(&h_prime, &ls)?;
        let f_h = spectrum.qfi_wrt(&h_prime);
        let f_g0 = spectrum.qfi_wrt(&proj.g);
        let c2_proj = channel_sum(&p.rho, &proj.a_ops);
        let optimized = BoundLine {
            a: 2.0 * spectrum.qfi_wrt(&opt.decomposition.g).sqrt(),
            b: 4.0 * channel_sum(&p.rho, &opt.decomposition.a_ops),
        };
        out.lines.push([
            optimized,
            BoundLine { a: 2.0 * f_h.sqrt(), b: 0.0 },
            BoundLine { a: 2.0 * f_g0.sqrt(), b: 4.0 * c2_proj },
        ]);
        out.rate_bound.push(opt.bound);
        out.c0 = out.c0.max((0.25 * f_g0).sqrt());
        out.c1 = out.c1.max((0.25 * f_h).sqrt());
        out.c2 = out.c2.max(c2_proj);
        out.in_span &= projection.in_span();
        out.converged &= opt.converged;
    }
    Ok(out)
}

/// Integrates `dF/dt = min_k (a_k sqrt(F) + b_k)` from `f0`. On each grid
/// interval every line takes the larger of its endpoint coefficients.
pub fn integrate_lines(times: &[f64], lines: &[[BoundLine; 3]], f0: f64) -> Result<Vec<f64>> {
    check_grid(times)?;
    if lines.len() != times.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: lines.len() });
    }
    let mut out = Vec::with_capacity(times.len());
    out.push(f0);
    let mut f = f0;
    for i in 1..times.len() {
        let merged: Vec<BoundLine> = (0..3).map(|k| lines[i - 1][k].max(lines[i][k])).collect();
        let rate = |_: f64, u: f64| merged.iter().map(|l| l.rate(u)).fold(f64::INFINITY, f64::min);
        let curve = integrate_rate_bound(rate, f, &[times[i - 1], times[i]])?;
        f = curve.evaluate(times[i]);
        out.push(f);
    }
    Ok(out)
}

/// Closed-form HNLS curve (HLS when `c0 = 0`) on `times`, shifted to start
/// at `f0`: from a nonzero start the rate bound is integrated numerically.
pub fn integrate_hnls_constants(constants: &BoundConstants, f0: f64, times: &[f64]) -> Result<Vec<f64>> {
    check_grid(times)?;
    let BoundConstants { c0, c1, c2, .. } = *constants;
    if f0 == 0.0 && times[0] == 0.0 {
        return times.iter().map(|&t| hnls_curve(c0, c1, c2, t)).collect();
    }
    let curve = integrate_rate_bound(|_, f| hnls_rate(c0, c1, c2, f).unwrap_or(f64::NAN), f0, times)?;
    Ok(times.iter().map(|&t| curve.evaluate(t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::hls_curve;
    use crate::dynamics::{uniform_grid, IntegratorConfig};
    use crate::scenarios::{damped_oscillator, make_state, simulate, OscillatorSpec, StateSpec};
    use std::f64::consts::LN_2;

    #[test]
    fn coherent_trajectory_constants() {
        let spec = OscillatorSpec { n_max: 16, ..Default::default() };
        let model = damped_oscillator(&spec).unwrap();
        let grid = uniform_grid(3.0, 13);
        let rho = make_state(&StateSpec::ground(), 16).unwrap();
        let sim = simulate(&model, &rho, 0.0, &grid, &IntegratorConfig::default(), 1e-12).unwrap();
        let b = trajectory_bounds(&model, &sim, 0.0, 1e-12).unwrap();
        assert!(b.in_span);
        assert!((b.c1 - 1.0).abs() < 1e-8 && (b.c2 - 1.0).abs() < 1e-8 && b.c0 < 1e-6);
        let k = b.constants().unwrap();
        assert!((k.t_c - 2.0 * LN_2).abs() < 1e-6);
        for ((r, f), rate) in b.rate_bound.iter().zip(sim.qfi()).zip(sim.rates()) {
            assert!(rate <= r + 1e-6, "rate {rate} above bound {r} at F = {f}");
        }
        let curve = integrate_lines(&b.times, &b.lines, 0.0).unwrap();
        for ((t, u), f) in grid.iter().zip(&curve).zip(sim.qfi()) {
            assert!(*u >= f - 1e-6, "t = {t}: {u} < {f}");
        }
        let hls = integrate_hnls_constants(&k, 0.0, &grid).unwrap();
        for (t, h) in grid.iter().zip(hls) {
            assert!((h - hls_curve(1.0, 1.0, *t).unwrap()).abs() < 1e-5);
        }
    }

    #[test]
    fn shifted_start_integrates() {
        let k = BoundConstants::hls(1.0, 1.0).unwrap();
        let v = integrate_hnls_constants(&k, 16.0, &[0.0, 1.0]).unwrap();
        assert!((v[1] - 20.0).abs() < 1e-8);
    }

    #[test]
    fn lines_take_the_minimum() {
        let lines = vec![[BoundLine { a: 0.0, b: 1.0 }, BoundLine { a: 0.0, b: 3.0 }, BoundLine { a: 5.0, b: 5.0 }]; 3];
        let v = integrate_lines(&[0.0, 1.0, 2.0], &lines, 0.5).unwrap();
        assert!((v[2] - 2.5).abs() < 1e-9);
    }
}
