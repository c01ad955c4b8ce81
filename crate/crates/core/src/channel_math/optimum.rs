use serde::Serialize;

use super::params::{ChannelParams, KrausGaugePoint, ProbeMoments};
use super::surface::cq_quadratic;
use crate::error::{Error, Result};

/// Why a reported optimum is not a strict, isolated minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// `η = 1`: the surface is constant in `(x, y)`.
    Lossless,
    /// `n̄_B = 0`: the amplifier is the identity and the surface does not depend on `y`.
    NoThermalNoise,
    /// The stationary-point denominator vanishes (vacuum-like probe); the
    /// optimum is reported through its algebraic limit at `(0, 0)`.
    ZeroDenominator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    pub cq_star: f64,
    pub x0: f64,
    pub y0: f64,
    pub hessian_ok: bool,
    /// `1 / cq_star`, `+∞` when the bound is zero.
    pub mse_lower: f64,
    pub degeneracy: Option<Degeneracy>,
}

impl BoundResult {
    pub fn gauge(&self) -> KrausGaugePoint {
        KrausGaugePoint::new(self.x0, self.y0)
    }
}

pub fn mse_lower_bound(cq_star: f64) -> f64 {
    if cq_star == 0.0 {
        f64::INFINITY
    } else {
        1.0 / cq_star
    }
}

fn require_single(probe: &ProbeMoments) -> Result<()> {
    probe.validate()?;
    if probe.n_modes != 1 {
        return Err(Error::domain(format!(
            "single-mode bound needs a one-mode probe, got {} modes",
            probe.n_modes
        )));
    }
    Ok(())
}

/// Single-mode stationary-point denominator `D`.
pub fn denominator_single(p: &ChannelParams, probe: &ProbeMoments) -> f64 {
    let (eta, nb, s, v) = (p.eta, p.nbar_b, probe.mean_total, probe.var_total);
    let q = 1.0 - eta;
    q * v * (eta * s * (2.0 * nb + 1.0) - eta * nb * (nb + 1.0) + (nb + 1.0).powi(2))
        + eta * s * (eta * s + q * nb + 1.0)
}

/// `n`-mode stationary-point denominator `D_n`.
pub fn denominator_n(p: &ChannelParams, probe: &ProbeMoments) -> f64 {
    let (eta, nb, s, v, n) = (
        p.eta,
        p.nbar_b,
        probe.mean_total,
        probe.var_total,
        probe.n(),
    );
    let q = 1.0 - eta;
    let gain = 1.0 + q * nb;
    eta * eta * s * s + eta * n * s * gain + q * eta * v * s * (1.0 + 2.0 * nb)
        - q * eta * v * n * nb * (1.0 + nb)
        + q * n * v * (1.0 + nb).powi(2)
}

fn degenerate(what: &str) -> Error {
    Error::DegenerateDenominator(format!("{what}: stationary-point denominator is zero"))
}

pub fn optimal_gauge_single(p: &ChannelParams, probe: &ProbeMoments) -> Result<KrausGaugePoint> {
    require_single(probe)?;
    let d = denominator_single(p, probe);
    if d == 0.0 {
        return Err(degenerate("single-mode optimum"));
    }
    let (eta, nb, s, v) = (p.eta, p.nbar_b, probe.mean_total, probe.var_total);
    let x0 = eta * (s - v) * (eta * s + (1.0 - eta) * nb + 1.0) / d;
    let y0 = -1.0 - eta * v * s / d;
    Ok(KrausGaugePoint::new(x0, y0))
}

pub fn optimal_gauge_n(p: &ChannelParams, probe: &ProbeMoments) -> Result<KrausGaugePoint> {
    probe.validate()?;
    let d = denominator_n(p, probe);
    if d == 0.0 {
        return Err(degenerate("n-mode optimum"));
    }
    let (eta, nb, s, v, n) = (
        p.eta,
        p.nbar_b,
        probe.mean_total,
        probe.var_total,
        probe.n(),
    );
    let q = 1.0 - eta;
    let gain = 1.0 + q * nb;
    let x0 = -(eta * eta * s * (v - s) + eta * n * (v - s) * gain) / d;
    let y0 =
        (eta * eta * s * (v - s) - (n * v * (1.0 + nb) * q + eta * s * (n + 2.0 * v)) * gain) / d;
    Ok(KrausGaugePoint::new(x0, y0))
}

/// Closed-form single-mode optimum `4η⟨Δn²⟩n̄[ηn̄ + (1-η)n̄_B + 1] / D`.
pub fn cq_star_single(p: &ChannelParams, probe: &ProbeMoments) -> Result<BoundResult> {
    require_single(probe)?;
    let d = denominator_single(p, probe);
    let (eta, nb, s, v) = (p.eta, p.nbar_b, probe.mean_total, probe.var_total);
    let value = || 4.0 * eta * v * s * (eta * s + (1.0 - eta) * nb + 1.0) / d;
    finish(p, probe, d, value, || optimal_gauge_single(p, probe))
}

/// Closed-form `n`-mode optimum `[4nη⟨ΔN²⟩⟨N⟩G + 4η²⟨ΔN²⟩⟨N⟩²] / D_n`.
pub fn cq_star_n(p: &ChannelParams, probe: &ProbeMoments) -> Result<BoundResult> {
    probe.validate()?;
    let d = denominator_n(p, probe);
    let (eta, nb, s, v, n) = (
        p.eta,
        p.nbar_b,
        probe.mean_total,
        probe.var_total,
        probe.n(),
    );
    let gain = 1.0 + (1.0 - eta) * nb;
    let value = || (4.0 * n * eta * v * s * gain + 4.0 * eta * eta * v * s * s) / d;
    finish(p, probe, d, value, || optimal_gauge_n(p, probe))
}

fn finish(
    p: &ChannelParams,
    probe: &ProbeMoments,
    denominator: f64,
    value: impl FnOnce() -> f64,
    gauge: impl FnOnce() -> Result<KrausGaugePoint>,
) -> Result<BoundResult> {
    let hessian_ok = hessian_condition(p, probe);
    let (cq_star, g, degeneracy) = if denominator == 0.0 {
        // D = 0 only when ⟨N⟩ = 0 and (⟨ΔN²⟩ = 0 or η = 1); both limits are finite.
        let limit = if p.is_lossless() {
            4.0 * probe.var_total
        } else {
            0.0
        };
        (
            limit,
            KrausGaugePoint::ORIGIN,
            Some(Degeneracy::ZeroDenominator),
        )
    } else {
        let deg = if p.is_lossless() {
            Some(Degeneracy::Lossless)
        } else if p.nbar_b == 0.0 {
            Some(Degeneracy::NoThermalNoise)
        } else {
            None
        };
        (value(), gauge()?, deg)
    };
    if !(cq_star.is_finite() && g.x.is_finite() && g.y.is_finite()) {
        return Err(Error::DegenerateDenominator(format!(
            "closed form is not finite (D = {denominator:e})"
        )));
    }
    // Round-off can leave a zero-variance optimum at -1e-17.
    let cq_star = cq_star.max(0.0);
    Ok(BoundResult {
        cq_star,
        x0: g.x,
        y0: g.y,
        hessian_ok,
        mse_lower: mse_lower_bound(cq_star),
        degeneracy,
    })
}

/// Second-derivative test for the bound surface. The surface is quadratic in
/// the gauge coordinates, so the Hessian is the same at every point and the
/// test needs no evaluation point.
pub fn hessian_condition(p: &ChannelParams, probe: &ProbeMoments) -> bool {
    cq_quadratic(p, probe).hessian_det() > 0.0
}

/// `dC*/dn̄_B` of the `n`-mode optimum.
pub fn bound_derivative_nbar(p: &ChannelParams, probe: &ProbeMoments) -> Result<f64> {
    probe.validate()?;
    let (eta, nb, s, v, n) = (
        p.eta,
        p.nbar_b,
        probe.mean_total,
        probe.var_total,
        probe.n(),
    );
    let q = 1.0 - eta;
    if q == 0.0 || v == 0.0 || s == 0.0 {
        return Ok(0.0);
    }
    let d = denominator_n(p, probe);
    let gain = 1.0 + nb * q;
    let bracket =
        n * eta * s * (3.0 + 2.0 * nb * q) + 2.0 * eta * eta * s * s + n * n * gain * gain;
    Ok(-4.0 * eta * q * s * v * v / (d * d) * bracket)
}
