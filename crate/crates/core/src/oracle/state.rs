use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::ladder::ModeLayout;
use crate::channel_math::ProbeMoments;
use crate::error::{Error, Result};
use crate::probe::{ProbeFamily, ProbeSpec};

/// Largest norm a probe may lose to truncation before construction fails.
pub const TAIL_BUDGET: f64 = 1e-10;

/// Default dimensions grow until the discarded norm is below this.
const DIM_TAIL_TARGET: f64 = 1e-14;

/// Per-mode cap for two-mode states (1024-dimensional density matrices).
pub const MAX_TWO_MODE_DIM: usize = 32;

const MAX_SINGLE_MODE_DIM: usize = 4096;

/// Density matrix of one or two bosonic modes, each truncated to `dim` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    n_modes: usize,
    dim: usize,
    density: DMatrix<Complex64>,
}

impl TruncatedState {
    pub fn from_density(n_modes: usize, dim: usize, density: DMatrix<Complex64>) -> Result<Self> {
        if !(1..=2).contains(&n_modes) || dim == 0 {
            return Err(Error::domain(format!(
                "unsupported layout: {n_modes} modes of {dim} levels"
            )));
        }
        let total = dim.pow(n_modes as u32);
        if density.nrows() != total || density.ncols() != total {
            return Err(Error::domain(format!(
                "density is {}x{}, expected {total}x{total}",
                density.nrows(),
                density.ncols()
            )));
        }
        let scale = density.norm().max(1.0);
        let asym = (&density - density.adjoint()).norm();
        if asym > 1e-12 * scale {
            return Err(Error::Numerical(format!(
                "density is not Hermitian (deviation {asym:e})"
            )));
        }
        Ok(Self {
            n_modes,
            dim,
            density,
        })
    }

    pub fn from_amplitudes(n_modes: usize, dim: usize, amps: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(amps);
        Self::from_density(n_modes, dim, &v * v.adjoint())
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn density(&self) -> &DMatrix<Complex64> {
        &self.density
    }

    pub fn into_density(self) -> DMatrix<Complex64> {
        self.density
    }

    pub(crate) fn layout(&self) -> ModeLayout {
        ModeLayout {
            dim: self.dim,
            n_modes: self.n_modes,
        }
    }

    pub fn trace(&self) -> f64 {
        self.density.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.density.diagonal().iter().map(|z| z.re).collect()
    }

    /// Photon number of mode `mode` at flat index `idx`.
    pub fn level(&self, idx: usize, mode: usize) -> usize {
        match (self.n_modes, mode) {
            (1, _) => idx,
            (_, 0) => idx / self.dim,
            _ => idx % self.dim,
        }
    }

    /// Total photon number at each flat index.
    pub fn total_number(&self) -> Vec<f64> {
        (0..self.density.nrows())
            .map(|i| (0..self.n_modes).map(|m| self.level(i, m)).sum::<usize>() as f64)
            .collect()
    }

    /// Photon number of one mode at each flat index.
    pub fn mode_number(&self, mode: usize) -> Vec<f64> {
        (0..self.density.nrows())
            .map(|i| self.level(i, mode) as f64)
            .collect()
    }

    /// Population on the top level of any mode.
    pub fn tail_mass(&self) -> f64 {
        let top = self.dim - 1;
        self.populations()
            .iter()
            .enumerate()
            .filter(|(i, _)| (0..self.n_modes).any(|m| self.level(*i, m) == top))
            .map(|(_, p)| p)
            .sum()
    }

    /// Highest per-mode level carrying population above `tol`.
    pub fn effective_support(&self, tol: f64) -> usize {
        self.populations()
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > tol)
            .map(|(i, _)| {
                (0..self.n_modes)
                    .map(|m| self.level(i, m))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Zero-pads every mode to `new_dim` levels.
    pub fn embed(&self, new_dim: usize) -> Self {
        assert!(new_dim >= self.dim, "embed cannot shrink a state");
        if new_dim == self.dim {
            return self.clone();
        }
        let n = new_dim.pow(self.n_modes as u32);
        let map = |i: usize| -> usize {
            match self.n_modes {
                1 => i,
                _ => (i / self.dim) * new_dim + i % self.dim,
            }
        };
        let mut out = DMatrix::zeros(n, n);
        let old = self.density.nrows();
        for c in 0..old {
            let mc = map(c);
            for r in 0..old {
                out[(map(r), mc)] = self.density[(r, c)];
            }
        }
        Self {
            n_modes: self.n_modes,
            dim: new_dim,
            density: out,
        }
    }

    /// Smallest eigenvalue, for validity checks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.density
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

pub fn coherent_amplitudes(alpha: f64, d: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(d);
    let mut c = (-alpha * alpha / 2.0).exp();
    for m in 0..d {
        out.push(real(c));
        c *= alpha / ((m + 1) as f64).sqrt();
    }
    out
}

/// `S(r)|0⟩` with real squeezing, `c_{2k} = (-tanh r)^k sqrt((2k)!) / (2^k k! sqrt(cosh r))`.
pub fn squeezed_amplitudes(r: f64, d: usize) -> Vec<Complex64> {
    let mut out = vec![real(0.0); d];
    let t = -r.tanh();
    let mut c = 1.0 / r.cosh().sqrt();
    let mut k = 0usize;
    while 2 * k < d {
        out[2 * k] = real(c);
        c *= t * (((2 * k + 1) as f64) / ((2 * k + 2) as f64)).sqrt();
        k += 1;
    }
    out
}

fn fock_amplitudes(m: usize, d: usize) -> Vec<Complex64> {
    let mut out = vec![real(0.0); d];
    if m < d {
        out[m] = real(1.0);
    }
    out
}

fn thermal_populations(mean: f64, d: usize) -> Vec<f64> {
    let q = mean / (1.0 + mean);
    let mut p = 1.0 / (1.0 + mean);
    (0..d)
        .map(|_| {
            let v = p;
            p *= q;
            v
        })
        .collect()
}

fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

enum RawState {
    Pure(Vec<Complex64>),
    Mixed(Vec<f64>),
}

fn raw_state(spec: &ProbeSpec, d: usize) -> Result<(usize, RawState)> {
    spec.validate()?;
    let n_modes = spec.n_modes as usize;
    if n_modes > 2 {
        return Err(Error::domain(format!(
            "{n_modes}-mode probes exceed the two-mode oracle"
        )));
    }
    let single = match spec.family {
        ProbeFamily::Coherent { alpha } => RawState::Pure(coherent_amplitudes(alpha, d)),
        ProbeFamily::Fock { photons } => RawState::Pure(fock_amplitudes(photons as usize, d)),
        ProbeFamily::SqueezedVacuum { squeeze } => RawState::Pure(squeezed_amplitudes(squeeze, d)),
        ProbeFamily::Thermal { mean } => RawState::Mixed(thermal_populations(mean, d)),
        ProbeFamily::EntangledCoherent { alpha } => {
            let c = coherent_amplitudes(alpha, d);
            let norm = 1.0 / (2.0 * (1.0 + (-alpha * alpha).exp())).sqrt();
            let mut v = vec![real(0.0); d * d];
            for (a, ca) in c.iter().enumerate() {
                v[a * d] += ca * norm;
                v[a] += ca * norm;
            }
            return Ok((2, RawState::Pure(v)));
        }
        ProbeFamily::Custom { .. } => return Err(Error::NotConstructible("custom".into())),
    };
    let state = match (n_modes, single) {
        (1, s) => s,
        (_, RawState::Pure(v)) => RawState::Pure(kron_vec(&v, &v)),
        (_, RawState::Mixed(p)) => RawState::Mixed(
            p.iter()
                .flat_map(|a| p.iter().map(move |b| a * b))
                .collect(),
        ),
    };
    Ok((n_modes, state))
}

fn captured_norm(raw: &RawState) -> f64 {
    match raw {
        RawState::Pure(v) => v.iter().map(|z| z.norm_sqr()).sum(),
        RawState::Mixed(p) => p.iter().sum(),
    }
}

/// Builds the probe at `d` levels per mode, also returning the norm captured
/// before renormalisation.
pub fn build_state_with_norm(spec: &ProbeSpec, d: usize) -> Result<(TruncatedState, f64)> {
    if d == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let (n_modes, raw) = raw_state(spec, d)?;
    let norm = captured_norm(&raw);
    let deficit = 1.0 - norm;
    if deficit > TAIL_BUDGET {
        return Err(Error::TruncationBudget {
            deficit,
            budget: TAIL_BUDGET,
        });
    }
    let state = match raw {
        RawState::Pure(v) => {
            let s = 1.0 / norm.sqrt();
            let v: Vec<Complex64> = v.into_iter().map(|z| z * s).collect();
            TruncatedState::from_amplitudes(n_modes, d, &v)?
        }
        RawState::Mixed(p) => {
            let diag = DVector::from_iterator(p.len(), p.iter().map(|x| real(x / norm)));
            TruncatedState::from_density(n_modes, d, DMatrix::from_diagonal(&diag))?
        }
    };
    Ok((state, norm))
}

/// Normalised truncated probe state with `d` levels per mode.
pub fn build_state(spec: &ProbeSpec, d: usize) -> Result<TruncatedState> {
    build_state_with_norm(spec, d).map(|(s, _)| s)
}

fn per_mode_moments(spec: &ProbeSpec) -> Result<(f64, f64)> {
    Ok(match spec.family {
        ProbeFamily::Coherent { alpha } | ProbeFamily::EntangledCoherent { alpha } => {
            (alpha * alpha, alpha * alpha)
        }
        ProbeFamily::Fock { photons } => (f64::from(photons), 0.0),
        ProbeFamily::Thermal { mean } => (mean, mean * mean + mean),
        ProbeFamily::SqueezedVacuum { squeeze } => {
            let n = squeeze.sinh().powi(2);
            (n, 2.0 * n * (n + 1.0))
        }
        ProbeFamily::Custom { .. } => return Err(Error::NotConstructible("custom".into())),
    })
}

/// Per-mode dimension for a probe: at least `mean + 8·sqrt(var) + 10`, grown
/// until the discarded norm is negligible. Two-mode probes are capped at
/// [`MAX_TWO_MODE_DIM`].
pub fn default_dim(spec: &ProbeSpec) -> Result<usize> {
    spec.validate()?;
    let (mean, var) = per_mode_moments(spec)?;
    let mut d = (mean + 8.0 * var.sqrt() + 10.0).ceil() as usize;
    let cap = if spec.n_modes >= 2 {
        MAX_TWO_MODE_DIM
    } else {
        MAX_SINGLE_MODE_DIM
    };
    loop {
        if d >= cap {
            return Ok(cap);
        }
        let (_, raw) = raw_state(
            &ProbeSpec {
                n_modes: 1,
                ..*spec
            }
            .single_mode_view(),
            d,
        )?;
        if 1.0 - captured_norm(&raw) < DIM_TAIL_TARGET {
            return Ok(d);
        }
        d += (d / 8).max(1);
    }
}

impl ProbeSpec {
    /// A single mode carrying the per-mode marginal's tail behaviour.
    fn single_mode_view(&self) -> ProbeSpec {
        match self.family {
            ProbeFamily::EntangledCoherent { alpha } => {
                ProbeSpec::single(ProbeFamily::Coherent { alpha })
            }
            f => ProbeSpec::single(f),
        }
    }
}

/// Total photon-number mean and variance of a (possibly sub-normalised) state.
pub fn state_moments(state: &TruncatedState) -> ProbeMoments {
    let tail = state.tail_mass();
    if tail > TAIL_BUDGET {
        log::warn!("state has {tail:e} population on its truncation edge; moments may be biased");
    }
    let pops = state.populations();
    let tr: f64 = pops.iter().sum();
    let n = state.total_number();
    let mean: f64 = pops.iter().zip(&n).map(|(p, k)| p * k).sum::<f64>() / tr;
    let second: f64 = pops.iter().zip(&n).map(|(p, k)| p * k * k).sum::<f64>() / tr;
    ProbeMoments {
        n_modes: state.n_modes as u32,
        mean_total: mean,
        var_total: (second - mean * mean).max(0.0),
    }
}

/// `½‖a − b‖₁` between two states of identical layout.
pub fn trace_distance(a: &TruncatedState, b: &TruncatedState) -> Result<f64> {
    if a.n_modes != b.n_modes || a.dim != b.dim {
        return Err(Error::domain(
            "trace distance needs states of identical layout",
        ));
    }
    let diff = &a.density - &b.density;
    let diff = (&diff + diff.adjoint()).map(|z| z * 0.5);
    Ok(0.5
        * diff
            .symmetric_eigenvalues()
            .iter()
            .map(|l| l.abs())
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::{ecs_mean, ecs_variance_direct, ecs_variance_published};

    fn coherent(alpha: f64) -> ProbeSpec {
        ProbeSpec::single(ProbeFamily::Coherent { alpha })
    }

    #[test]
    fn coherent_amplitudes_closed_form() {
        let s = build_state(&coherent(1.0), 30).unwrap();
        let mut fact = 1.0;
        for m in 0..10 {
            if m > 0 {
                fact *= m as f64;
            }
            let amp = (-0.5f64).exp() / fact.sqrt();
            assert!((s.density()[(m, 0)].re - amp * (-0.5f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn coherent_moments() {
        let r = state_moments(&build_state(&coherent(1.0), 30).unwrap());
        assert!((r.mean_total - 1.0).abs() < 1e-10 && (r.var_total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fock_moments_exact() {
        let r = state_moments(
            &build_state(&ProbeSpec::single(ProbeFamily::Fock { photons: 3 }), 8).unwrap(),
        );
        assert_eq!((r.mean_total, r.var_total), (3.0, 0.0));
    }

    #[test]
    fn fock_outside_truncation_is_rejected() {
        let e = build_state(&ProbeSpec::single(ProbeFamily::Fock { photons: 8 }), 8).unwrap_err();
        assert!(matches!(e, Error::TruncationBudget { .. }));
    }

    #[test]
    fn ecs_small_alpha_is_vacuum() {
        let s = build_state(&ProbeSpec::ecs(0.0), 6).unwrap();
        assert!((s.density()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((s.trace() - 1.0).abs() < 1e-15);
        let s = build_state(&ProbeSpec::ecs(1e-4), 6).unwrap();
        assert!((s.density()[(0, 0)].re - 1.0).abs() < 1e-7);
    }

    #[test]
    fn ecs_truncation_norm() {
        let (_, norm) = build_state_with_norm(&ProbeSpec::ecs(1.0), 25).unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ecs_moments_adjudication() {
        let r = state_moments(&build_state(&ProbeSpec::ecs(1.0), 25).unwrap());
        assert!((r.mean_total - 0.731059).abs() < 1e-6);
        assert!((r.mean_total - ecs_mean(1.0)).abs() < 1e-12);
        assert!((r.var_total - ecs_variance_direct(1.0)).abs() < 1e-12);
        assert!((r.var_total - ecs_variance_published(1.0)).abs() > 0.1);
    }

    #[test]
    fn family_moments_agree_with_oracle() {
        use crate::probe::{moments, MomentMode};
        for fam in [
            ProbeFamily::Coherent { alpha: 1.7 },
            ProbeFamily::Thermal { mean: 2.0 },
            ProbeFamily::SqueezedVacuum {
                squeeze: 1f64.asinh(),
            },
            ProbeFamily::Fock { photons: 5 },
        ] {
            let spec = ProbeSpec::single(fam);
            let d = default_dim(&spec).unwrap();
            let r = state_moments(&build_state(&spec, d).unwrap());
            let m = moments(&spec, MomentMode::PublishedMoments).unwrap();
            assert!(
                (r.mean_total - m.mean_total).abs() <= 1e-8 * m.mean_total.max(1.0),
                "{fam:?}"
            );
            assert!(
                (r.var_total - m.var_total).abs() <= 1e-8 * m.var_total.max(1.0),
                "{fam:?}"
            );
        }
    }

    #[test]
    fn default_dim_respects_rule_and_caps() {
        let spec = ProbeSpec::single(ProbeFamily::Thermal { mean: 2.0 });
        assert!(default_dim(&spec).unwrap() >= 32);
        assert_eq!(default_dim(&ProbeSpec::ecs(4.0)).unwrap(), MAX_TWO_MODE_DIM);
        assert!(default_dim(&ProbeSpec::single(ProbeFamily::Custom {
            mean: 1.0,
            var: 1.0
        }))
        .is_err());
    }

    #[test]
    fn product_states_factorise() {
        let spec = ProbeSpec {
            family: ProbeFamily::Coherent { alpha: 0.8 },
            n_modes: 2,
        };
        let s = build_state(&spec, 16).unwrap();
        let r = state_moments(&s);
        assert!((r.mean_total - 1.28).abs() < 1e-12 && (r.var_total - 1.28).abs() < 1e-12);
        let t = build_state(
            &ProbeSpec {
                family: ProbeFamily::Thermal { mean: 0.3 },
                n_modes: 2,
            },
            40,
        )
        .unwrap();
        let r = state_moments(&t);
        assert!((r.mean_total - 0.6).abs() < 1e-10 && (r.var_total - 2.0 * 0.39).abs() < 1e-10);
    }

    #[test]
    fn embed_preserves_moments_and_trace_distance() {
        let s = build_state(&ProbeSpec::ecs(0.7), 10).unwrap();
        let e = s.embed(14);
        assert_eq!(e.dim(), 14);
        assert!((state_moments(&s).var_total - state_moments(&e).var_total).abs() < 1e-14);
        assert!(trace_distance(&e, &e).unwrap() < 1e-15);
        let v = build_state(&ProbeSpec::single(ProbeFamily::Fock { photons: 0 }), 4).unwrap();
        let f = build_state(&ProbeSpec::single(ProbeFamily::Fock { photons: 1 }), 4).unwrap();
        assert!((trace_distance(&v, &f).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn squeezed_vacuum_is_even() {
        let s = build_state(
            &ProbeSpec::single(ProbeFamily::SqueezedVacuum { squeeze: 0.5 }),
            60,
        )
        .unwrap();
        for m in (1..60).step_by(2) {
            assert_eq!(s.populations()[m], 0.0);
        }
        assert!(s.min_eigenvalue() > -1e-12);
    }
}
