//! Lindblad-span decompositions, the instantaneous QFI rate bound and its
//! optimization, closed-form bound curves, and rate-bound integration.

pub mod curves;
pub mod integrate;
pub mod lambert;
pub mod neldermead;
pub mod span;

pub use curves::{
    hls_curve, hls_rate, hnls_curve, hnls_curve_simple, hnls_rate, hnls_y, oscillator_curve,
    prior_linear, prior_quadratic, quadratic_prior_constant, BoundConstants, BoundCurve, CurveFamily,
};
pub use integrate::{integrate_rate_bound, lindblad_magnitude_bound};
pub use lambert::{lambert_w_m1, neg_wm1_of_u};
pub use span::{
    build_decomposition, optimize_rate_bound, project_to_span, rate_bound, OptimizedBound,
    SpanDecomposition, SpanProjection,
};
