//! Closed-form QFI rate bounds and the curves obtained by integrating them.

use std::f64::consts::LN_2;

use super::lambert::neg_wm1_of_u;
use crate::error::{Error, Result};
use crate::linalg::{eigh_unchecked, Hermitian};

/// Relative tolerance for matching the two branches of a curve at `t_c`.
pub const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundConstants {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub t_c: f64,
}

fn non_negative(value: f64, domain: &'static str) -> Result<f64> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::Domain { value, domain });
    }
    Ok(value)
}

impl BoundConstants {
    pub fn hls(c1: f64, c2: f64) -> Result<Self> {
        non_negative(c1, "c1 >= 0")?;
        non_negative(c2, "c2 >= 0")?;
        if c1 == 0.0 {
            return Err(Error::Domain { value: c1, domain: "c1 > 0" });
        }
        Ok(BoundConstants { c0: 0.0, c1, c2, t_c: hls_crossover(c1, c2) })
    }

    pub fn hnls(c0: f64, c1: f64, c2: f64) -> Result<Self> {
        check_hnls(c0, c1, c2)?;
        Ok(BoundConstants { c0, c1, c2, t_c: hnls_crossover(c0, c1, c2) })
    }
}

fn hls_crossover(c1: f64, c2: f64) -> f64 {
    2.0 * c2 / (c1 * c1) * LN_2
}

fn hnls_crossover(c0: f64, c1: f64, c2: f64) -> f64 {
    let d = c1 - c0;
    if d == 0.0 {
        return f64::INFINITY;
    }
    2.0 * c2 / (d * d) * (2.0 * c1 / (c1 + c0)).ln()
}

fn check_hnls(c0: f64, c1: f64, c2: f64) -> Result<()> {
    non_negative(c0, "c0 >= 0")?;
    non_negative(c1, "c1 >= 0")?;
    non_negative(c2, "c2 >= 0")?;
    if c0 > c1 {
        return Err(Error::Domain { value: c0, domain: "c0 <= c1" });
    }
    Ok(())
}

/// Interpolated rate bound when `H'` lies in the Lindblad span. `c1 = 0`
/// gives the flat `4 c2` branch.
pub fn hls_rate(c1: f64, c2: f64, f: f64) -> Result<f64> {
    non_negative(c1, "c1 >= 0")?;
    non_negative(c2, "c2 >= 0")?;
    non_negative(f, "F >= 0")?;
    if c1 == 0.0 {
        return Ok(4.0 * c2);
    }
    let s = f.sqrt();
    if s <= 2.0 * c2 / c1 {
        Ok(4.0 * c1 * s * (1.0 - c1 * s / (4.0 * c2)))
    } else {
        Ok(4.0 * c2)
    }
}

fn hls_first(c1: f64, c2: f64, t: f64) -> f64 {
    let e = -(-c1 * c1 * t / (2.0 * c2)).exp_m1();
    16.0 * c2 * c2 / (c1 * c1) * e * e
}

fn hls_second(c1: f64, c2: f64, t: f64) -> f64 {
    4.0 * c2 * (c2 / (c1 * c1) + (t - hls_crossover(c1, c2)))
}

/// Solution of `dF/dt = hls_rate(c1, c2, F)` from `F(0) = 0`.
pub fn hls_curve(c1: f64, c2: f64, t: f64) -> Result<f64> {
    let k = BoundConstants::hls(c1, c2)?;
    non_negative(t, "t >= 0")?;
    if c2 == 0.0 {
        return Ok(0.0);
    }
    Ok(if t <= k.t_c { hls_first(c1, c2, t) } else { hls_second(c1, c2, t) })
}

/// Rate bound for `H'` with a component `G_0` outside the Lindblad span.
pub fn hnls_rate(c0: f64, c1: f64, c2: f64, f: f64) -> Result<f64> {
    check_hnls(c0, c1, c2)?;
    non_negative(f, "F >= 0")?;
    let s = f.sqrt();
    let d = c1 - c0;
    if d == 0.0 {
        return Ok(4.0 * c1 * s);
    }
    if c2 == 0.0 {
        return Ok(4.0 * c0 * s);
    }
    if s <= 2.0 * c2 / d {
        Ok(4.0 * c1 * s * (1.0 - d * d / (4.0 * c1 * c2) * s))
    } else {
        Ok(4.0 * (c0 * s + c2))
    }
}

fn hnls_first(c0: f64, c1: f64, c2: f64, t: f64) -> f64 {
    let d = c1 - c0;
    let e = -(-d * d * t / (2.0 * c2)).exp_m1();
    let s = 4.0 * c1 * c2 / (d * d) * e;
    s * s
}

/// `y(tau)` of the late-time branch: `sqrt(F)` a time `tau` after `t_c`.
pub fn hnls_y(c0: f64, c1: f64, c2: f64, tau: f64) -> Result<f64> {
    check_hnls(c0, c1, c2)?;
    non_negative(tau, "tau >= 0")?;
    let d = c1 - c0;
    if c0 == 0.0 {
        return Ok((4.0 * c2 * c2 / (c1 * c1) + 4.0 * c2 * tau).sqrt());
    }
    let u0 = 2.0 * c0 / d - ((c0 + c1) / d).ln();
    let u = 2.0 * c0 * c0 * tau / c2 + u0;
    let z = neg_wm1_of_u(u.max(0.0))?;
    Ok(c2 / c0 * (z - 1.0))
}

/// Solution of `dF/dt = hnls_rate(c0, c1, c2, F)` from `F(0) = 0`.
pub fn hnls_curve(c0: f64, c1: f64, c2: f64, t: f64) -> Result<f64> {
    check_hnls(c0, c1, c2)?;
    non_negative(t, "t >= 0")?;
    if c0 == 0.0 {
        if c1 == 0.0 {
            return Ok(0.0);
        }
        return hls_curve(c1, c2, t);
    }
    if c2 == 0.0 {
        return Ok(4.0 * c0 * c0 * t * t);
    }
    let d = c1 - c0;
    if d == 0.0 {
        return Ok(4.0 * c1 * c1 * t * t);
    }
    let t_c = hnls_crossover(c0, c1, c2);
    if t <= t_c {
        Ok(hnls_first(c0, c1, c2, t))
    } else {
        let y = hnls_y(c0, c1, c2, t - t_c)?;
        Ok(y * y)
    }
}

/// `4 c2 t + 4 t^2 c0 (c0 + 2 sqrt(c2 / t))`, weaker than [`hnls_curve`].
pub fn hnls_curve_simple(c0: f64, c2: f64, t: f64) -> Result<f64> {
    non_negative(c0, "c0 >= 0")?;
    non_negative(c2, "c2 >= 0")?;
    non_negative(t, "t >= 0")?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(4.0 * c2 * t + 4.0 * t * t * c0 * (c0 + 2.0 * (c2 / t).sqrt()))
}

pub fn prior_linear(c2: f64, t: f64) -> Result<f64> {
    non_negative(c2, "c2 >= 0")?;
    Ok(4.0 * c2 * t)
}

pub fn prior_quadratic(constant: f64, t: f64) -> Result<f64> {
    non_negative(constant, "constant >= 0")?;
    Ok(4.0 * constant * t * t)
}

/// `min_a ||H' - a I||^2 = ((l_max - l_min) / 2)^2`.
pub fn quadratic_prior_constant(h_prime: &Hermitian) -> f64 {
    if h_prime.dim() == 0 {
        return 0.0;
    }
    let spec = eigh_unchecked(h_prime);
    let n = spec.values.len();
    let half = 0.5 * (spec.values[n - 1] - spec.values[0]);
    half * half
}

/// Oscillator constants for linear forcing: `c2 = |eps|^2 / gamma_T`,
/// `c1^2 = 2 |eps|^2 sigma_p^2`.
pub fn oscillator_bound_constants(eps_abs: f64, gamma_t: f64, sigma2_p: f64) -> Result<BoundConstants> {
    non_negative(eps_abs, "|eps| >= 0")?;
    non_negative(sigma2_p, "sigma_p^2 >= 0")?;
    if !(gamma_t > 0.0) {
        return Err(Error::Domain { value: gamma_t, domain: "gamma_T > 0" });
    }
    BoundConstants::hls((2.0 * eps_abs * eps_abs * sigma2_p).sqrt(), eps_abs * eps_abs / gamma_t)
}

/// `8|eps|^2/(gamma_T^2 sigma^2) (1 - e^{-gamma_T sigma^2 t})^2` up to `t_c`,
/// linear afterwards.
pub fn oscillator_curve(eps_abs: f64, gamma_t: f64, sigma2_p: f64, t: f64) -> Result<f64> {
    let k = oscillator_bound_constants(eps_abs, gamma_t, sigma2_p)?;
    non_negative(t, "t >= 0")?;
    let e2 = eps_abs * eps_abs;
    let t_c = LN_2 / (gamma_t * sigma2_p);
    debug_assert!((t_c - k.t_c).abs() <= 1e-12 * t_c.max(1.0));
    if t <= t_c {
        let e = -(-gamma_t * sigma2_p * t).exp_m1();
        Ok(8.0 * e2 / (gamma_t * gamma_t * sigma2_p) * e * e)
    } else {
        Ok(4.0 * e2 * t / gamma_t - 2.0 * (4f64.ln() - 1.0) * e2 / (gamma_t * gamma_t * sigma2_p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveFamily {
    HlsPiecewise,
    HnlsLambert,
    HnlsSimple,
    PriorLinear,
    PriorQuadratic,
    Oscillator,
    Integrated,
}

#[derive(Clone, Debug)]
enum Shape {
    Closed,
    Oscillator { eps_abs: f64, gamma_t: f64, sigma2_p: f64 },
    Sampled { ts: Vec<f64>, fs: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct BoundCurve {
    pub family: CurveFamily,
    pub constants: BoundConstants,
    shape: Shape,
}

fn assert_continuous(t_c: f64, left: f64, right: f64) -> Result<()> {
    let mismatch = (left - right).abs();
    if mismatch > CONTINUITY_TOL * left.abs().max(right.abs()).max(1.0) {
        return Err(Error::CurveDiscontinuity { t_c, mismatch });
    }
    Ok(())
}

impl BoundCurve {
    pub fn hls(c1: f64, c2: f64) -> Result<Self> {
        let constants = BoundConstants::hls(c1, c2)?;
        if c2 > 0.0 {
            let t_c = constants.t_c;
            assert_continuous(t_c, hls_first(c1, c2, t_c), hls_second(c1, c2, t_c))?;
        }
        Ok(BoundCurve { family: CurveFamily::HlsPiecewise, constants, shape: Shape::Closed })
    }

    pub fn hnls(c0: f64, c1: f64, c2: f64) -> Result<Self> {
        let constants = BoundConstants::hnls(c0, c1, c2)?;
        let t_c = constants.t_c;
        if c0 > 0.0 && c2 > 0.0 && t_c.is_finite() {
            let y0 = hnls_y(c0, c1, c2, 0.0)?;
            assert_continuous(t_c, hnls_first(c0, c1, c2, t_c), y0 * y0)?;
        }
        Ok(BoundCurve { family: CurveFamily::HnlsLambert, constants, shape: Shape::Closed })
    }

    pub fn hnls_simple(c0: f64, c2: f64) -> Result<Self> {
        non_negative(c0, "c0 >= 0")?;
        non_negative(c2, "c2 >= 0")?;
        let constants = BoundConstants { c0, c1: f64::NAN, c2, t_c: f64::NAN };
        Ok(BoundCurve { family: CurveFamily::HnlsSimple, constants, shape: Shape::Closed })
    }

    pub fn prior_linear(c2: f64) -> Result<Self> {
        non_negative(c2, "c2 >= 0")?;
        let constants = BoundConstants { c0: 0.0, c1: f64::INFINITY, c2, t_c: 0.0 };
        Ok(BoundCurve { family: CurveFamily::PriorLinear, constants, shape: Shape::Closed })
    }

    /// `4 c1^2 t^2` with `c1^2` the squared half-spread of `H'`.
    pub fn prior_quadratic(constant: f64) -> Result<Self> {
        non_negative(constant, "constant >= 0")?;
        let constants = BoundConstants { c0: 0.0, c1: constant.sqrt(), c2: 0.0, t_c: f64::INFINITY };
        Ok(BoundCurve { family: CurveFamily::PriorQuadratic, constants, shape: Shape::Closed })
    }

    pub fn oscillator(eps_abs: f64, gamma_t: f64, sigma2_p: f64) -> Result<Self> {
        let constants = oscillator_bound_constants(eps_abs, gamma_t, sigma2_p)?;
        let t_c = constants.t_c;
        let left = oscillator_curve(eps_abs, gamma_t, sigma2_p, t_c)?;
        let right = oscillator_curve(eps_abs, gamma_t, sigma2_p, t_c * (1.0 + 1e-15))?;
        assert_continuous(t_c, left, right)?;
        Ok(BoundCurve {
            family: CurveFamily::Oscillator,
            constants,
            shape: Shape::Oscillator { eps_abs, gamma_t, sigma2_p },
        })
    }

    /// Curve known only at sample times; evaluated by linear interpolation.
    pub fn sampled(ts: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        if ts.len() != fs.len() || ts.is_empty() {
            return Err(Error::DimensionMismatch { expected: ts.len(), got: fs.len() });
        }
        crate::dynamics::check_grid(&ts)?;
        let constants = BoundConstants { c0: f64::NAN, c1: f64::NAN, c2: f64::NAN, t_c: f64::NAN };
        Ok(BoundCurve { family: CurveFamily::Integrated, constants, shape: Shape::Sampled { ts, fs } })
    }

    pub fn samples(&self) -> Option<(&[f64], &[f64])> {
        match &self.shape {
            Shape::Sampled { ts, fs } => Some((ts, fs)),
            _ => None,
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let k = &self.constants;
        let value = match (&self.shape, self.family) {
            (Shape::Sampled { ts, fs }, _) => interpolate(ts, fs, t),
            (Shape::Oscillator { eps_abs, gamma_t, sigma2_p }, _) => {
                oscillator_curve(*eps_abs, *gamma_t, *sigma2_p, t)
            }
            (_, CurveFamily::HlsPiecewise) => hls_curve(k.c1, k.c2, t),
            (_, CurveFamily::HnlsLambert) => hnls_curve(k.c0, k.c1, k.c2, t),
            (_, CurveFamily::HnlsSimple) => hnls_curve_simple(k.c0, k.c2, t),
            (_, CurveFamily::PriorLinear) => prior_linear(k.c2, t),
            (_, CurveFamily::PriorQuadratic) => prior_quadratic(k.c1 * k.c1, t),
            (_, CurveFamily::Oscillator) | (_, CurveFamily::Integrated) => unreachable!("shape carries data"),
        };
        value.unwrap_or(f64::NAN)
    }
}

fn interpolate(ts: &[f64], fs: &[f64], t: f64) -> Result<f64> {
    if t <= ts[0] {
        return Ok(fs[0]);
    }
    let last = ts.len() - 1;
    if t >= ts[last] {
        return Ok(fs[last]);
    }
    let i = ts.partition_point(|&x| x <= t) - 1;
    let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
    Ok(fs[i] + w * (fs[i + 1] - fs[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sigma_z;

    #[test]
    fn hls_unit_constants() {
        let k = BoundConstants::hls(1.0, 1.0).unwrap();
        assert!((k.t_c - 2.0 * LN_2).abs() < 1e-15);
        assert!((hls_curve(1.0, 1.0, k.t_c).unwrap() - 4.0).abs() < 1e-12);
        assert!((hls_curve(1.0, 1.0, k.t_c + 1.0).unwrap() - 8.0).abs() < 1e-12);
        let k5 = BoundConstants::hls(5f64.sqrt(), 1.0).unwrap();
        assert!((k5.t_c - 0.4 * LN_2).abs() < 1e-15);
        BoundCurve::hls(1.0, 1.0).unwrap();
        BoundCurve::hls(5f64.sqrt(), 1.0).unwrap();
    }

    #[test]
    fn hls_short_time_ratio() {
        for t in [1e-3, 1e-5] {
            let r = hls_curve(2.0, 1.0, t).unwrap() / (4.0 * 4.0 * t * t);
            assert!((r - 1.0).abs() < 10.0 * t);
        }
    }

    #[test]
    fn hls_rate_branches() {
        assert_eq!(hls_rate(0.0, 1.5, 3.0).unwrap(), 6.0);
        assert_eq!(hls_rate(1.0, 1.0, 100.0).unwrap(), 4.0);
        assert!((hls_rate(1.0, 1.0, 4.0).unwrap() - 4.0).abs() < 1e-15);
        assert!(hls_rate(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn hnls_reduces_to_hls() {
        for &(c1, c2, t) in &[(1.0, 1.0, 0.3), (2.0, 0.5, 5.0), (0.7, 3.0, 40.0)] {
            let a = hnls_curve(0.0, c1, c2, t).unwrap();
            let b = hls_curve(c1, c2, t).unwrap();
            assert!((a - b).abs() <= 1e-10 * b.max(1.0));
            assert!((hnls_rate(0.0, c1, c2, t).unwrap() - hls_rate(c1, c2, t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn hnls_equal_constants_take_first_case() {
        for f in [0.0, 1.0, 1e4] {
            assert!((hnls_rate(1.0, 1.0, 2.0, f).unwrap() - 4.0 * f.sqrt()).abs() < 1e-12);
        }
        assert!(hnls_rate(2.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn hnls_continuity_and_branch_rate() {
        let curve = BoundCurve::hnls(0.5, 1.0, 1.0).unwrap();
        let t_c = curve.constants.t_c;
        assert!((t_c - 8.0 * (4.0f64 / 3.0).ln()).abs() < 1e-12);
        // late branch solves dF/dt = 4 (c0 sqrt(F) + c2)
        let t = t_c + 3.0;
        let h = 1e-4;
        let df = (curve.evaluate(t + h) - curve.evaluate(t - h)) / (2.0 * h);
        let f = curve.evaluate(t);
        assert!((df - 4.0 * (0.5 * f.sqrt() + 1.0)).abs() < 1e-6);
    }

    #[test]
    fn simple_curve_examples() {
        assert_eq!(hnls_curve_simple(1.0, 1.0, 1.0).unwrap(), 16.0);
        assert_eq!(hnls_curve_simple(0.0, 2.0, 3.0).unwrap(), 24.0);
        assert_eq!(hnls_curve_simple(1.0, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn prior_curve_examples() {
        assert_eq!(prior_linear(1.0, 3.0).unwrap(), 12.0);
        let hls = hls_curve(1.0, 1.0, 3.0).unwrap();
        assert!((hls - 4.0 * (4.0 - 2.0 * LN_2)).abs() < 1e-12 && hls < 12.0);
        let h = Hermitian::new(sigma_z().mapv(|z| z * 0.7)).unwrap();
        assert!((quadratic_prior_constant(&h) - 0.49).abs() < 1e-14);
        assert_eq!(quadratic_prior_constant(&Hermitian::identity(3)), 0.0);
    }

    #[test]
    fn oscillator_curve_matches_hls_form() {
        for &(e, g, s2) in &[(1.0, 1.0, 0.5), (0.5, 2.0, 2.5), (2.0, 3.0, 1.0)] {
            let k = oscillator_bound_constants(e, g, s2).unwrap();
            for t in [0.01, 0.3, 1.0, 4.0] {
                let a = oscillator_curve(e, g, s2, t).unwrap();
                let b = hls_curve(k.c1, k.c2, t).unwrap();
                assert!((a - b).abs() < 1e-12 * b.max(1.0));
            }
        }
        BoundCurve::oscillator(1.0, 1.0, 0.5).unwrap();
    }
}
