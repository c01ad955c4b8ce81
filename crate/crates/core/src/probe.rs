//! Photon-number statistics of standard probe families.
//!
//! Single-mode families describe one mode; with `n_modes > 1` the probe is the
//! product of `n_modes` identical copies, so mean and variance add.

use serde::{Deserialize, Serialize};

use crate::channel_math::ProbeMoments;
use crate::error::{Error, Result};
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProbeFamily {
    /// Coherent state `|α⟩` with real amplitude `alpha = |α|`.
    Coherent { alpha: f64 },
    /// Number state `|m⟩`.
    Fock { photons: u32 },
    /// Thermal (geometric) photon distribution with mean `mean`.
    Thermal { mean: f64 },
    /// Squeezed vacuum with squeezing parameter `squeeze = r`.
    SqueezedVacuum { squeeze: f64 },
    /// Two-mode entangled coherent state `(|α,0⟩ + |0,α⟩)/norm`.
    EntangledCoherent { alpha: f64 },
    /// Moments given directly; has no Fock-space construction.
    Custom { mean: f64, var: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub family: ProbeFamily,
    pub n_modes: u32,
}

/// How to obtain the entangled-coherent-state moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMode {
    /// `⟨N⟩ = ⟨ΔN²⟩ = |α|²/(1+e^{-|α|²})`, the published closed form.
    #[default]
    PublishedMoments,
    /// Moments computed on the truncated Fock-space state.
    OracleMoments,
}

impl ProbeSpec {
    pub fn single(family: ProbeFamily) -> Self {
        Self { family, n_modes: 1 }
    }

    pub fn ecs(alpha: f64) -> Self {
        Self {
            family: ProbeFamily::EntangledCoherent { alpha },
            n_modes: 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            ProbeFamily::Coherent { .. } => "coherent",
            ProbeFamily::Fock { .. } => "fock",
            ProbeFamily::Thermal { .. } => "thermal",
            ProbeFamily::SqueezedVacuum { .. } => "squeezed",
            ProbeFamily::EntangledCoherent { .. } => "ecs",
            ProbeFamily::Custom { .. } => "custom",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(Error::domain("probe must have at least one mode"));
        }
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!(
                    "{name} must be finite and >= 0, got {v}"
                )))
            }
        };
        match self.family {
            ProbeFamily::Coherent { alpha } => nonneg("alpha", alpha),
            ProbeFamily::Fock { .. } => Ok(()),
            ProbeFamily::Thermal { mean } => nonneg("mean", mean),
            ProbeFamily::SqueezedVacuum { squeeze } => nonneg("squeeze", squeeze),
            ProbeFamily::EntangledCoherent { alpha } => {
                if self.n_modes != 2 {
                    return Err(Error::domain(
                        "the entangled coherent state is a two-mode probe",
                    ));
                }
                nonneg("alpha", alpha)
            }
            ProbeFamily::Custom { mean, var } => nonneg("mean", mean).and(nonneg("var", var)),
        }
    }

    /// Per-mode moments of the single-mode families.
    fn single_mode_moments(&self) -> Option<(f64, f64)> {
        match self.family {
            ProbeFamily::Coherent { alpha } => Some((alpha * alpha, alpha * alpha)),
            ProbeFamily::Fock { photons } => Some((f64::from(photons), 0.0)),
            ProbeFamily::Thermal { mean } => Some((mean, mean * mean + mean)),
            ProbeFamily::SqueezedVacuum { squeeze } => {
                let nbar = squeeze.sinh().powi(2);
                Some((nbar, 2.0 * nbar * (nbar + 1.0)))
            }
            _ => None,
        }
    }
}

/// Total photon-number moments of the probe.
pub fn moments(spec: &ProbeSpec, mode: MomentMode) -> Result<ProbeMoments> {
    spec.validate()?;
    let n = spec.n_modes;
    match spec.family {
        ProbeFamily::EntangledCoherent { alpha } => match mode {
            MomentMode::PublishedMoments => {
                let m = ecs_mean(alpha);
                ProbeMoments::new(n, m, ecs_variance_published(alpha))
            }
            MomentMode::OracleMoments => {
                let d = oracle::default_dim(spec)?;
                let state = oracle::build_state(spec, d)?;
                Ok(oracle::state_moments(&state))
            }
        },
        ProbeFamily::Custom { mean, var } => ProbeMoments::new(n, mean, var),
        _ => {
            let (m, v) = spec.single_mode_moments().expect("single-mode family");
            let nf = f64::from(n);
            ProbeMoments::new(n, nf * m, nf * v)
        }
    }
}

/// `|α|²/(1+e^{-|α|²})`.
pub fn ecs_mean(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    a2 / (1.0 + (-a2).exp())
}

/// Published ECS variance, equal to the mean.
pub fn ecs_variance_published(alpha: f64) -> f64 {
    ecs_mean(alpha)
}

/// ECS variance from `⟨N²⟩ - ⟨N⟩²` on the normalised state. The cross terms
/// `⟨α,0|N^p|0,α⟩` vanish for `p ≥ 1`, so
/// `⟨N²⟩ = (|α|² + |α|⁴)/(1+e^{-|α|²})`.
pub fn ecs_variance_direct(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    let z = 1.0 + (-a2).exp();
    (a2 + a2 * a2) / z - (a2 * a2) / (z * z)
}
