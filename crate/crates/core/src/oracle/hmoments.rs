use serde::{Deserialize, Serialize};

use super::channel::Cutoffs;
use super::fock::{FockOperatorMatrix, KrausTables};
use super::ladder::LadderOp;
use super::state::TruncatedState;
use crate::channel_math::{ChannelParams, GaugeCoefficients, KrausGaugePoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HMoments {
    pub h1_mean: f64,
    pub h2_mean: f64,
}

/// The two θ-independent generators on the first `dim` levels, together with
/// the diagonal of `Σ (B_kA_l)†(B_kA_l)` used to bound leakage.
#[derive(Debug, Clone)]
pub struct HOperators {
    pub h1: FockOperatorMatrix,
    pub h2: FockOperatorMatrix,
    pub completeness: Vec<f64>,
}

/// `Ĥ1 = Σ A_l†B_k† (n̂+lx+ky)² B_kA_l` and `Ĥ2 = Σ A_l†B_k† (n̂+lx+ky) B_kA_l`,
/// summed explicitly on the working space and cropped to `dim` levels.
pub fn h_operators(
    g: KrausGaugePoint,
    p: &ChannelParams,
    dim: usize,
    cutoffs: &Cutoffs,
) -> Result<HOperators> {
    let w = cutoffs.work_dim;
    if w < dim {
        return Err(Error::domain(format!(
            "working dimension {w} is below {dim}"
        )));
    }
    let tables = KrausTables::new(p, dim, cutoffs.loss, cutoffs.amp);
    let mut h1 = vec![0.0; dim];
    let mut h2 = vec![0.0; dim];
    let mut comp = vec![0.0; dim];
    let amps: Vec<LadderOp> = (0..=cutoffs.amp.min(w - 1))
        .map(|k| tables.amp_op(k, w))
        .collect();
    for l in 0..=cutoffs.loss.min(dim - 1) {
        let a = tables.loss_op(l, w);
        for (k, b) in amps.iter().enumerate() {
            let ba = b.compose(&a);
            if ba.is_zero() {
                continue;
            }
            let offset = l as f64 * g.x + k as f64 * g.y;
            let gen = LadderOp::real_diagonal(w, |m| m as f64 + offset);
            let gba = gen.compose(&ba);
            let bad = ba.adjoint();
            let t1 = gba.adjoint().compose(&gba);
            let t2 = bad.compose(&gba);
            let t0 = bad.compose(&ba);
            for m in 0..dim {
                h1[m] += t1.weights()[m].re;
                h2[m] += t2.weights()[m].re;
                comp[m] += t0.weights()[m].re;
            }
        }
    }
    Ok(HOperators {
        h1: FockOperatorMatrix::diagonal(&h1),
        h2: FockOperatorMatrix::diagonal(&h2),
        completeness: comp,
    })
}

fn check_leakage(state_pops: &[f64], completeness: &[f64], budget: f64) -> Result<()> {
    let kept: f64 = state_pops
        .iter()
        .zip(completeness)
        .map(|(p, c)| p * c)
        .sum();
    let total: f64 = state_pops.iter().sum();
    let deficit = total - kept;
    if deficit > budget {
        return Err(Error::TruncationBudget { deficit, budget });
    }
    Ok(())
}

/// Expectations of `Ĥ1`, `Ĥ2` on a single-mode state.
pub fn h_moments(
    state: &TruncatedState,
    g: KrausGaugePoint,
    p: &ChannelParams,
    cutoffs: &Cutoffs,
) -> Result<HMoments> {
    if state.n_modes() != 1 {
        return Err(Error::domain("h_moments takes a single-mode state"));
    }
    let ops = h_operators(g, p, state.dim(), cutoffs)?;
    check_leakage(
        &state.populations(),
        &ops.completeness,
        cutoffs.trace_budget,
    )?;
    let tr = state.trace();
    Ok(HMoments {
        h1_mean: ops.h1.expectation(state.density()) / tr,
        h2_mean: ops.h2.expectation(state.density()) / tr,
    })
}

/// `4(⟨Ĥ1⟩ − ⟨Ĥ2⟩²)`.
pub fn cq_numeric(
    state: &TruncatedState,
    g: KrausGaugePoint,
    p: &ChannelParams,
    cutoffs: &Cutoffs,
) -> Result<f64> {
    let h = h_moments(state, g, p, cutoffs)?;
    Ok(4.0 * (h.h1_mean - h.h2_mean * h.h2_mean))
}

/// Per-mode generator expectations of a two-mode state and the joint
/// moment `⟨Ĥ2⊗Ĥ2⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultimodeTerms {
    pub h1: [f64; 2],
    pub h2: [f64; 2],
    pub h2h2: f64,
    /// Per-mode photon means and `⟨n̂₁n̂₂⟩`, for regression against the
    /// closed-form coefficients.
    pub n_mean: [f64; 2],
    pub n1n2: f64,
}

impl MultimodeTerms {
    pub fn cross_covariance(&self) -> f64 {
        self.h2h2 - self.h2[0] * self.h2[1]
    }

    /// `4[Σ_m (⟨Ĥ1⁽ᵐ⁾⟩ − ⟨Ĥ2⁽ᵐ⁾⟩²) + 2 Cov(Ĥ2⁽¹⁾, Ĥ2⁽²⁾)]`.
    pub fn bound(&self) -> f64 {
        let local: f64 = (0..2).map(|m| self.h1[m] - self.h2[m] * self.h2[m]).sum();
        4.0 * (local + 2.0 * self.cross_covariance())
    }
}

pub fn multimode_terms(
    state: &TruncatedState,
    g: KrausGaugePoint,
    p: &ChannelParams,
    cutoffs: &Cutoffs,
) -> Result<MultimodeTerms> {
    if state.n_modes() != 2 {
        return Err(Error::domain("multimode terms take a two-mode state"));
    }
    let d = state.dim();
    let ops = h_operators(g, p, d, cutoffs)?;
    let id = FockOperatorMatrix::identity(d);
    let rho = state.density();
    let tr = state.trace();
    let pops = state.populations();
    for mode in 0..2 {
        let mut marginal = vec![0.0; d];
        for (i, q) in pops.iter().enumerate() {
            marginal[state.level(i, mode)] += q;
        }
        check_leakage(&marginal, &ops.completeness, cutoffs.trace_budget)?;
    }
    let ev = |op: &FockOperatorMatrix| op.expectation(rho) / tr;
    let n = FockOperatorMatrix::number(d);
    Ok(MultimodeTerms {
        h1: [ev(&ops.h1.kron(&id)), ev(&id.kron(&ops.h1))],
        h2: [ev(&ops.h2.kron(&id)), ev(&id.kron(&ops.h2))],
        h2h2: ev(&ops.h2.kron(&ops.h2)),
        n_mean: [ev(&n.kron(&id)), ev(&id.kron(&n))],
        n1n2: ev(&n.kron(&n)),
    })
}

/// The two-mode bound evaluated from tensor-embedded generators.
pub fn cq_numeric_multimode(
    state: &TruncatedState,
    g: KrausGaugePoint,
    p: &ChannelParams,
    cutoffs: &Cutoffs,
) -> Result<f64> {
    multimode_terms(state, g, p, cutoffs).map(|t| t.bound())
}

/// Solves `⟨Ĥ2⊗Ĥ2⟩ = c2²⟨n̂₁n̂₂⟩ + d0·d1·(⟨n̂₁⟩+⟨n̂₂⟩) + d0²` for the
/// coefficient `d1`. `None` when `d0·(⟨n̂₁⟩+⟨n̂₂⟩)` vanishes.
pub fn infer_d1(terms: &MultimodeTerms, coeffs: &GaugeCoefficients) -> Option<f64> {
    let denom = coeffs.d0 * (terms.n_mean[0] + terms.n_mean[1]);
    if denom.abs() < 1e-9 {
        return None;
    }
    Some((terms.h2h2 - coeffs.c2 * coeffs.c2 * terms.n1n2 - coeffs.d0 * coeffs.d0) / denom)
}

/// State-averaged pieces of every Kraus term, so the bound can be resampled
/// at any gauge point without rebuilding operators:
/// `⟨(B_kA_l)†(n̂+o)^p(B_kA_l)⟩` for `p = 0, 1, 2`.
struct GaugeSampler {
    terms: Vec<(f64, f64, [f64; 3])>,
}

impl GaugeSampler {
    fn new(state: &TruncatedState, p: &ChannelParams, cutoffs: &Cutoffs) -> Result<Self> {
        let d = state.dim();
        let w = cutoffs.work_dim;
        let pops = state.populations();
        let tr: f64 = pops.iter().sum();
        let tables = KrausTables::new(p, d, cutoffs.loss, cutoffs.amp);
        let mut terms = Vec::new();
        let mut kept = 0.0;
        for l in 0..=cutoffs.loss.min(d - 1) {
            let a = tables.loss_op(l, w);
            for k in 0..=cutoffs.amp.min(w - 1) {
                let ba = tables.amp_op(k, w).compose(&a);
                let mut s = [0.0; 3];
                for (m, wgt) in ba.weights().iter().enumerate().take(d) {
                    let Some(t) = ba.target(m) else { continue };
                    let q = pops[m] * wgt.norm_sqr() / tr;
                    let t = t as f64;
                    s[0] += q;
                    s[1] += q * t;
                    s[2] += q * t * t;
                }
                if s[0] > 0.0 {
                    kept += s[0];
                    terms.push((l as f64, k as f64, s));
                }
            }
        }
        let deficit = 1.0 - kept;
        if deficit > cutoffs.trace_budget {
            return Err(Error::TruncationBudget {
                deficit,
                budget: cutoffs.trace_budget,
            });
        }
        Ok(Self { terms })
    }

    fn bound(&self, x: f64, y: f64) -> f64 {
        let (mut h1, mut h2) = (0.0, 0.0);
        for (l, k, s) in &self.terms {
            let o = l * x + k * y;
            h1 += s[2] + 2.0 * o * s[1] + o * o * s[0];
            h2 += s[1] + o * s[0];
        }
        4.0 * (h1 - h2 * h2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericMinimum {
    pub x_min: f64,
    pub y_min: f64,
    pub c_min: f64,
    /// Smallest value seen on the coarse grid.
    pub grid_min: f64,
}

const GRID_POINTS: usize = 51;
const GRID_HALF_WIDTH: f64 = 5.0;

/// Coarse grid search over `[-5, 5]²` followed by an exact quadratic solve
/// from a finite-difference stencil of the sampled surface.
pub fn minimize_cq_numeric(
    state: &TruncatedState,
    p: &ChannelParams,
    cutoffs: &Cutoffs,
) -> Result<NumericMinimum> {
    if state.n_modes() != 1 {
        return Err(Error::domain(
            "minimize_cq_numeric takes a single-mode state",
        ));
    }
    if p.is_lossless() {
        return Err(Error::FlatSurface);
    }
    let f = GaugeSampler::new(state, p, cutoffs)?;
    let h = 2.0 * GRID_HALF_WIDTH / (GRID_POINTS - 1) as f64;
    let coord = |i: usize| -GRID_HALF_WIDTH + i as f64 * h;
    let mut best = (0, 0, f64::INFINITY);
    for i in 0..GRID_POINTS {
        for j in 0..GRID_POINTS {
            let v = f.bound(coord(i), coord(j));
            if v < best.2 {
                best = (i, j, v);
            }
        }
    }
    let (i, j) = (
        best.0.clamp(1, GRID_POINTS - 2),
        best.1.clamp(1, GRID_POINTS - 2),
    );
    let (x, y) = (coord(i), coord(j));
    let at = |dx: f64, dy: f64| f.bound(x + dx * h, y + dy * h);
    let f0 = at(0.0, 0.0);
    let fxx = (at(1.0, 0.0) - 2.0 * f0 + at(-1.0, 0.0)) / (h * h);
    let fyy = (at(0.0, 1.0) - 2.0 * f0 + at(0.0, -1.0)) / (h * h);
    let fxy = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h);
    let gx = (at(1.0, 0.0) - at(-1.0, 0.0)) / (2.0 * h);
    let gy = (at(0.0, 1.0) - at(0.0, -1.0)) / (2.0 * h);
    let det = fxx * fyy - fxy * fxy;
    if !(det > 0.0 && fxx > 0.0) {
        return Err(Error::Numerical(format!(
            "sampled surface is not strictly convex (det {det:e})"
        )));
    }
    let dx = -(fyy * gx - fxy * gy) / det;
    let dy = -(fxx * gy - fxy * gx) / det;
    let (x_min, y_min) = (x + dx, y + dy);
    Ok(NumericMinimum {
        x_min,
        y_min,
        c_min: f.bound(x_min, y_min),
        grid_min: best.2,
    })
}
