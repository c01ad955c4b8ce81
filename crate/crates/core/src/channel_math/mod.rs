//! Closed-form evaluation of the optimised QFI bound for phase estimation
//! through `n` uses of a lossy thermal-noise channel.
//!
//! Everything here is a pure function of [`ChannelParams`] and [`ProbeMoments`];
//! the phase itself never enters.

mod optimum;
mod params;
mod surface;

pub use optimum::{
    bound_derivative_nbar, cq_star_n, cq_star_single, denominator_n, denominator_single,
    hessian_condition, mse_lower_bound, optimal_gauge_n, optimal_gauge_single, BoundResult,
    Degeneracy,
};
pub use params::{derive_params, ChannelParams, KrausGaugePoint, ProbeMoments};
pub use surface::{
    a_quadratic, cq_quadratic, cq_surface, gauge_coefficients, omega_n, omega_quadratic,
    omega_single, quadratic_a, GaugeCoefficients, Quadratic2,
};
