use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lossy thermal-noise channel, stored together with its decomposition into
/// a pure-loss stage (transmissivity `tau`) followed by a quantum-limited
/// amplifier (gain `gain`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub eta: f64,
    pub nbar_b: f64,
    pub gain: f64,
    pub tau: f64,
}

impl ChannelParams {
    pub fn new(eta: f64, nbar_b: f64) -> Result<Self> {
        derive_params(eta, nbar_b)
    }

    /// `1 - eta`, the fraction of the signal coupled into the environment.
    #[inline]
    pub fn loss(&self) -> f64 {
        1.0 - self.eta
    }

    #[inline]
    pub fn is_lossless(&self) -> bool {
        self.eta == 1.0
    }
}

/// Derives the loss/amplifier decomposition `G = 1 + (1-η)n̄_B`, `τ = η/G`.
pub fn derive_params(eta: f64, nbar_b: f64) -> Result<ChannelParams> {
    if !(eta.is_finite() && eta > 0.0 && eta <= 1.0) {
        return Err(Error::domain(format!(
            "transmissivity must lie in (0, 1], got {eta}"
        )));
    }
    if !(nbar_b.is_finite() && nbar_b >= 0.0) {
        return Err(Error::domain(format!(
            "thermal occupancy must be finite and non-negative, got {nbar_b}"
        )));
    }
    let gain = 1.0 + (1.0 - eta) * nbar_b;
    Ok(ChannelParams {
        eta,
        nbar_b,
        gain,
        tau: eta / gain,
    })
}

/// Phase multipliers selecting one member of the family of equivalent Kraus
/// representations. `x` rotates the loss environment, `y` the amplifier
/// environment. The single-parameter family of phase placements is the line
/// `x = -γ, y = γ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KrausGaugePoint {
    pub x: f64,
    pub y: f64,
}

impl KrausGaugePoint {
    pub const ORIGIN: KrausGaugePoint = KrausGaugePoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Gauge point equivalent to placing the phase with offset `gamma`
    /// (`-1`: phase before the channel, `0`: after it).
    pub fn from_gamma(gamma: f64) -> Self {
        Self {
            x: -gamma,
            y: gamma,
        }
    }
}

/// Photon-number statistics of an `n_modes`-mode probe: total mean and total
/// variance of `N_S = Σ_m n̂_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeMoments {
    pub n_modes: u32,
    pub mean_total: f64,
    pub var_total: f64,
}

impl ProbeMoments {
    pub fn new(n_modes: u32, mean_total: f64, var_total: f64) -> Result<Self> {
        let m = Self {
            n_modes,
            mean_total,
            var_total,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn single(mean: f64, var: f64) -> Result<Self> {
        Self::new(1, mean, var)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(Error::domain("probe must have at least one mode"));
        }
        if !(self.mean_total.is_finite() && self.mean_total >= 0.0) {
            return Err(Error::domain(format!(
                "mean photon number must be >= 0, got {}",
                self.mean_total
            )));
        }
        if !(self.var_total.is_finite() && self.var_total >= 0.0) {
            return Err(Error::domain(format!(
                "photon-number variance must be >= 0, got {}",
                self.var_total
            )));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn n(&self) -> f64 {
        f64::from(self.n_modes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_channel_has_unit_gain() {
        let p = derive_params(1.0, 5.0).unwrap();
        assert_eq!(p.gain, 1.0);
        assert_eq!(p.tau, 1.0);
    }

    #[test]
    fn half_transmissivity_one_thermal_photon() {
        let p = derive_params(0.5, 1.0).unwrap();
        assert_eq!(p.gain, 1.5);
        assert!((p.tau - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn zero_occupancy_is_pure_loss() {
        let p = derive_params(0.5, 0.0).unwrap();
        assert_eq!(p.gain, 1.0);
        assert_eq!(p.tau, 0.5);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(derive_params(0.0, 1.0).is_err());
        assert!(derive_params(1.2, 1.0).is_err());
        assert!(derive_params(-0.1, 1.0).is_err());
        assert!(derive_params(0.5, -1e-9).is_err());
        assert!(derive_params(f64::NAN, 1.0).is_err());
        assert!(derive_params(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn tau_times_gain_recovers_eta() {
        for &eta in &[0.01, 0.3, 0.77, 1.0] {
            for &nb in &[0.0, 0.4, 3.0, 100.0] {
                let p = derive_params(eta, nb).unwrap();
                assert!(p.gain >= 1.0);
                assert!(p.tau > 0.0 && p.tau <= 1.0);
                assert!((p.tau * p.gain - eta).abs() <= 4.0 * f64::EPSILON * eta);
            }
        }
    }

    #[test]
    fn gamma_line() {
        let g = KrausGaugePoint::from_gamma(0.37);
        assert_eq!((g.x, g.y), (-0.37, 0.37));
    }

    #[test]
    fn moments_validation() {
        assert!(ProbeMoments::new(0, 1.0, 1.0).is_err());
        assert!(ProbeMoments::new(1, -1.0, 1.0).is_err());
        assert!(ProbeMoments::new(1, 1.0, -1.0).is_err());
        assert!(ProbeMoments::new(3, 0.0, 0.0).is_ok());
    }
}
