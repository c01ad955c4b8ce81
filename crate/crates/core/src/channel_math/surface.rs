//! The purification bound as an explicit quadratic in the gauge coordinates.
//!
//! For the Kraus family `e^{iθ(n̂ + l x + k y)} B_k A_l` the expectation values of
//! `Ĥ1` and `Ĥ2` are quadratic polynomials in the input photon number with
//! coefficients `c2, c1, c0, d0`, and the bound collapses to
//! `C(x, y) = 4 [A(x, y) ⟨ΔN²⟩ + Ω(x, y)]`, where `A = c2²` and `Ω` collects the
//! mean-dependent remainder. Both `A` and `Ω` are quadratic in `(x, y)`, so every
//! surface here is a [`Quadratic2`] and its curvature is constant.

use serde::Serialize;

use super::params::{ChannelParams, KrausGaugePoint, ProbeMoments};

/// `xx·x² + yy·y² + xy·x·y + x·x + y·y + c`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Quadratic2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
    pub x: f64,
    pub y: f64,
    pub c: f64,
}

impl Quadratic2 {
    pub fn eval(&self, g: KrausGaugePoint) -> f64 {
        let (x, y) = (g.x, g.y);
        self.xx * x * x + self.yy * y * y + self.xy * x * y + self.x * x + self.y * y + self.c
    }

    pub fn gradient(&self, g: KrausGaugePoint) -> (f64, f64) {
        (
            2.0 * self.xx * g.x + self.xy * g.y + self.x,
            2.0 * self.yy * g.y + self.xy * g.x + self.y,
        )
    }

    /// Second derivatives `(∂²/∂x², ∂²/∂y², ∂²/∂x∂y)`.
    pub fn hessian(&self) -> (f64, f64, f64) {
        (2.0 * self.xx, 2.0 * self.yy, self.xy)
    }

    pub fn hessian_det(&self) -> f64 {
        let (hxx, hyy, hxy) = self.hessian();
        hxx * hyy - hxy * hxy
    }

    /// Solves `∇q = 0` by Cramer's rule; `None` when the Hessian is singular.
    pub fn stationary_point(&self) -> Option<KrausGaugePoint> {
        let (hxx, hyy, hxy) = self.hessian();
        let det = hxx * hyy - hxy * hxy;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let x = (-self.x * hyy + self.y * hxy) / det;
        let y = (-self.y * hxx + self.x * hxy) / det;
        Some(KrausGaugePoint { x, y })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            xx: s * self.xx,
            yy: s * self.yy,
            xy: s * self.xy,
            x: s * self.x,
            y: s * self.y,
            c: s * self.c,
        }
    }

    pub fn plus(&self, o: &Self) -> Self {
        Self {
            xx: self.xx + o.xx,
            yy: self.yy + o.yy,
            xy: self.xy + o.xy,
            x: self.x + o.x,
            y: self.y + o.y,
            c: self.c + o.c,
        }
    }
}

/// The four gauge-dependent coefficients of `⟨Ĥ1⟩ = c2²⟨n̂²⟩ + c1⟨n̂⟩ + c0` and
/// `⟨Ĥ2⟩ = c2⟨n̂⟩ + d0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeCoefficients {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub d0: f64,
}

impl GaugeCoefficients {
    pub fn h1_mean(&self, n_mean: f64, n2_mean: f64) -> f64 {
        self.c2 * self.c2 * n2_mean + self.c1 * n_mean + self.c0
    }

    pub fn h2_mean(&self, n_mean: f64) -> f64 {
        self.c2 * n_mean + self.d0
    }
}

pub fn gauge_coefficients(g: KrausGaugePoint, p: &ChannelParams) -> GaugeCoefficients {
    let (eta, nb) = (p.eta, p.nbar_b);
    let q = 1.0 - eta;
    let gain = 1.0 + q * nb;
    let (x, y) = (g.x, g.y);

    let c2 = (eta + q * ((nb + 1.0) * x + eta * nb * (y + 1.0))) / gain;

    let yy = eta * nb * (1.0 - q * nb * (eta - 4.0 * q * nb - 5.0));
    let c1 = q / (gain * gain)
        * (eta * (nb + 1.0) * x * x
            + yy * y * y
            + 2.0 * q * q * nb * (nb + 1.0).powi(2) * x * y
            + 2.0 * (nb + 1.0) * gain * (q * nb - eta) * x
            + 2.0 * eta * nb * gain * (3.0 - eta + 4.0 * q * nb) * y
            + eta * (4.0 * nb + 1.0) * gain * gain);

    let c0 = q * nb * (2.0 * q * nb + 1.0) * (y + 1.0).powi(2);
    let d0 = q * nb * (y + 1.0);
    GaugeCoefficients { c2, c1, c0, d0 }
}

/// `A(x, y)`, the coefficient of the photon-number variance.
pub fn a_quadratic(p: &ChannelParams) -> Quadratic2 {
    let (eta, nb) = (p.eta, p.nbar_b);
    let q = 1.0 - eta;
    let gain = 1.0 + q * nb;
    Quadratic2 {
        xx: ((nb + 1.0) * q / gain).powi(2),
        yy: (nb * eta * q / gain).powi(2),
        xy: 2.0 * nb * (nb + 1.0) * eta * q * q / (gain * gain),
        x: 2.0 * (nb + 1.0) * eta * q / gain,
        y: 2.0 * nb * eta * eta * q / gain,
        c: eta * eta,
    }
}

pub fn quadratic_a(g: KrausGaugePoint, p: &ChannelParams) -> f64 {
    a_quadratic(p).eval(g)
}

/// `Ω(x, y)` for `n` channel uses carrying total mean photon number `mean`.
///
/// The coefficient of the linear `y` term carries `2 + 2n̄_B(1-η) - η`; this is
/// what the Kraus sums produce and what makes the closed-form stationary
/// point stationary.
pub fn omega_quadratic(p: &ChannelParams, n_modes: f64, mean: f64) -> Quadratic2 {
    let (eta, nb) = (p.eta, p.nbar_b);
    let q = 1.0 - eta;
    let gain = 1.0 + q * nb;
    let g2 = gain * gain;
    let s = mean;
    let n = n_modes;
    Quadratic2 {
        xx: (nb + 1.0) * eta * q * s / g2,
        yy: nb * q * (n * gain.powi(3) + eta * s * (1.0 + q * nb * (3.0 + 2.0 * nb * q - eta)))
            / g2,
        xy: -2.0 * eta * q * q * nb * (nb + 1.0) * s / g2,
        x: -2.0 * eta * q * (nb + 1.0) * s / gain,
        y: 2.0 * nb * q * (n * g2 + eta * s * (2.0 + 2.0 * nb * q - eta)) / gain,
        c: q * (n * nb * nb * q + eta * s + nb * (n + 2.0 * eta * s)),
    }
}

/// Single-mode `ω(x, y)`; `probe.n_modes` is ignored and taken to be one.
pub fn omega_single(g: KrausGaugePoint, p: &ChannelParams, probe: &ProbeMoments) -> f64 {
    omega_quadratic(p, 1.0, probe.mean_total).eval(g)
}

pub fn omega_n(g: KrausGaugePoint, p: &ChannelParams, probe: &ProbeMoments) -> f64 {
    omega_quadratic(p, probe.n(), probe.mean_total).eval(g)
}

/// The bound surface `C(x, y) = 4 [A ⟨ΔN²⟩ + Ω]` as a quadratic.
pub fn cq_quadratic(p: &ChannelParams, probe: &ProbeMoments) -> Quadratic2 {
    a_quadratic(p)
        .scaled(probe.var_total)
        .plus(&omega_quadratic(p, probe.n(), probe.mean_total))
        .scaled(4.0)
}

pub fn cq_surface(g: KrausGaugePoint, p: &ChannelParams, probe: &ProbeMoments) -> f64 {
    cq_quadratic(p, probe).eval(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_math::derive_params;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(eta: f64, nb: f64) -> ChannelParams {
        derive_params(eta, nb).unwrap()
    }

    #[test]
    fn lossless_coefficients() {
        let p = params(1.0, 3.0);
        for &(x, y) in &[(0.0, 0.0), (2.0, -7.0), (-1.5, 0.3)] {
            let c = gauge_coefficients(KrausGaugePoint::new(x, y), &p);
            assert_eq!(c.c2, 1.0);
            assert_eq!((c.c1, c.c0, c.d0), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn y_minus_one_kills_constant_terms() {
        for &(eta, nb, x) in &[(0.2, 0.5, 0.0), (0.7, 4.0, 3.3), (0.5, 1.0, -2.0)] {
            let c = gauge_coefficients(KrausGaugePoint::new(x, -1.0), &params(eta, nb));
            assert_eq!(c.c0, 0.0);
            assert_eq!(c.d0, 0.0);
        }
    }

    // Golden values from an independent symbolic derivation: the loss stage leaves
    // a binomial photon count, the amplifier adds a negative-binomial one, and
    // ⟨(n_out + l x + k y)^p⟩ was averaged in closed form.
    #[test]
    fn coefficients_golden_origin() {
        let c = gauge_coefficients(KrausGaugePoint::ORIGIN, &params(0.5, 1.0));
        assert_relative_eq!(c.c2, 0.5, max_relative = 1e-15);
        assert_relative_eq!(c.c1, 1.25, max_relative = 1e-15);
        assert_relative_eq!(c.c0, 1.0, max_relative = 1e-15);
        assert_relative_eq!(c.d0, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn coefficients_golden_generic() {
        let c = gauge_coefficients(KrausGaugePoint::new(0.4, -1.3), &params(0.3, 1.4));
        assert_relative_eq!(c.c2, 491.0 / 1100.0, max_relative = 1e-14);
        assert_relative_eq!(c.c1, -1354983.0 / 6050000.0, max_relative = 1e-13);
        assert_relative_eq!(c.c0, 16317.0 / 62500.0, max_relative = 1e-14);
        assert_relative_eq!(c.d0, -147.0 / 500.0, max_relative = 1e-14);
    }

    #[test]
    fn a_golden_values() {
        assert_relative_eq!(
            quadratic_a(KrausGaugePoint::new(1.0, -1.0), &params(0.5, 1.0)),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            quadratic_a(KrausGaugePoint::new(0.4, -1.3), &params(0.3, 1.4)),
            241081.0 / 1210000.0,
            max_relative = 1e-14
        );
        let p = params(0.37, 2.2);
        assert_eq!(quadratic_a(KrausGaugePoint::ORIGIN, &p), 0.37 * 0.37);
        assert_eq!(
            quadratic_a(KrausGaugePoint::new(4.0, 9.0), &params(1.0, 2.0)),
            1.0
        );
    }

    #[test]
    fn omega_and_surface_golden() {
        let p = params(0.3, 1.4);
        let g = KrausGaugePoint::new(0.4, -1.3);
        let probe = ProbeMoments::new(3, 2.5, 4.0).unwrap();
        assert_relative_eq!(
            omega_n(g, &p, &probe),
            37519209.0 / 60500000.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            cq_surface(g, &p, &probe),
            85735409.0 / 15125000.0,
            max_relative = 1e-13
        );
        let single = ProbeMoments::new(1, 2.5, 4.0).unwrap();
        assert_relative_eq!(
            omega_single(g, &p, &single),
            16388253.0 / 60500000.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn omega_constant_term() {
        let p = params(0.45, 0.8);
        let probe = ProbeMoments::new(2, 1.7, 0.9).unwrap();
        let (eta, nb, n, s) = (0.45, 0.8, 2.0, 1.7);
        let expected =
            (1.0 - eta) * (n * nb * nb * (1.0 - eta) + eta * s + nb * (n + 2.0 * eta * s));
        assert_relative_eq!(
            omega_n(KrausGaugePoint::ORIGIN, &p, &probe),
            expected,
            max_relative = 1e-15
        );
    }

    #[test]
    fn lossless_surface_is_flat() {
        let p = params(1.0, 0.7);
        let probe = ProbeMoments::new(2, 3.0, 2.5).unwrap();
        for &(x, y) in &[(0.0, 0.0), (5.0, -3.0), (-2.0, 8.0)] {
            let g = KrausGaugePoint::new(x, y);
            assert_eq!(omega_n(g, &p, &probe), 0.0);
            assert_eq!(cq_surface(g, &p, &probe), 10.0);
        }
    }

    #[test]
    fn vacuum_surface_is_four_omega() {
        let p = params(0.6, 1.1);
        let vac = ProbeMoments::new(1, 0.0, 0.0).unwrap();
        let g = KrausGaugePoint::new(0.3, 0.9);
        assert_relative_eq!(
            cq_surface(g, &p, &vac),
            4.0 * omega_n(g, &p, &vac),
            max_relative = 1e-15
        );
    }

    #[test]
    fn stationary_point_of_known_quadratic() {
        // (x-1)² + 2(y+3)² + (x-1)(y+3)
        let q = Quadratic2 {
            xx: 1.0,
            yy: 2.0,
            xy: 1.0,
            x: 1.0,
            y: 11.0,
            c: 0.0,
        };
        let s = q.stationary_point().unwrap();
        assert_relative_eq!(s.x, 1.0, epsilon = 1e-14);
        assert_relative_eq!(s.y, -3.0, epsilon = 1e-14);
        assert_eq!(q.hessian_det(), 7.0);
        assert!(Quadratic2 {
            xx: 1.0,
            ..Default::default()
        }
        .stationary_point()
        .is_none());
    }

    proptest! {
        #[test]
        fn a_is_c2_squared(eta in 0.01f64..1.0, nb in 0.0f64..6.0, x in -6.0f64..6.0, y in -6.0f64..6.0) {
            let p = params(eta, nb);
            let g = KrausGaugePoint::new(x, y);
            let c2 = gauge_coefficients(g, &p).c2;
            let a = quadratic_a(g, &p);
            prop_assert!((a - c2 * c2).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        // Ω must equal the mean-linear part of Σ_m (⟨Ĥ1⟩ - ⟨Ĥ2⟩²) once the variance is split off.
        #[test]
        fn omega_matches_coefficient_composition(
            eta in 0.01f64..1.0, nb in 0.0f64..6.0, x in -6.0f64..6.0, y in -6.0f64..6.0,
            n in 1u32..5, s in 0.0f64..10.0,
        ) {
            let p = params(eta, nb);
            let g = KrausGaugePoint::new(x, y);
            let c = gauge_coefficients(g, &p);
            let nf = f64::from(n);
            let composed = (c.c1 - 2.0 * c.c2 * c.d0) * s + nf * (c.c0 - c.d0 * c.d0);
            let probe = ProbeMoments::new(n, s, 1.0).unwrap();
            let om = omega_n(g, &p, &probe);
            let scale = 1.0 + composed.abs() + c.c1.abs() * s + nf * c.c0.abs();
            prop_assert!((om - composed).abs() <= 1e-11 * scale, "{om} vs {composed}");
        }

        #[test]
        fn omega_n_reduces_to_single(eta in 0.01f64..1.0, nb in 0.0f64..6.0, x in -6.0f64..6.0, y in -6.0f64..6.0, s in 0.0f64..10.0) {
            let p = params(eta, nb);
            let g = KrausGaugePoint::new(x, y);
            let probe = ProbeMoments::new(1, s, 2.0).unwrap();
            prop_assert_eq!(omega_n(g, &p, &probe), omega_single(g, &p, &probe));
        }
    }
}
