use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fock::{amp_cutoff, KrausTables};
use super::ladder::{LadderOp, ModeLayout};
use super::state::TruncatedState;
use crate::channel_math::{ChannelParams, KrausGaugePoint};
use crate::error::{Error, Result};

/// Kraus-index cutoffs and the working dimension per mode.
///
/// `loss` and `amp` are inclusive maxima of the loss index `l` and amplifier
/// index `k`. Operators act on `work_dim` levels; inputs are zero-padded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoffs {
    pub loss: usize,
    pub amp: usize,
    pub work_dim: usize,
    pub trace_budget: f64,
}

impl Cutoffs {
    pub const DEFAULT_BUDGET: f64 = 1e-10;

    /// Guard band for operators asserted on the first `d` levels: every
    /// input `m < d` keeps all amplifier terms with non-negligible weight.
    pub fn guarded(p: &ChannelParams, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        let amp = amp_cutoff(p.gain, d - 1)?;
        Ok(Self {
            loss: d - 1,
            amp,
            work_dim: d + amp,
            trace_budget: Self::DEFAULT_BUDGET,
        })
    }

    /// Guard band sized for the populated levels of a single-mode state.
    pub fn for_state(state: &TruncatedState, p: &ChannelParams) -> Result<Self> {
        if state.n_modes() != 1 {
            return Err(Error::domain(
                "adaptive cutoffs are single-mode; use Cutoffs::truncated",
            ));
        }
        let m_eff = state.effective_support(1e-20);
        let amp = amp_cutoff(p.gain, m_eff)?;
        Ok(Self {
            loss: state.dim() - 1,
            amp,
            work_dim: state.dim().max(m_eff + amp + 1),
            trace_budget: Self::DEFAULT_BUDGET,
        })
    }

    /// Plain truncation at `d` levels: the output is the exact channel output
    /// projected onto the first `d` levels of each mode.
    pub fn truncated(d: usize) -> Self {
        let top = d.saturating_sub(1);
        Self {
            loss: top,
            amp: top,
            work_dim: d,
            trace_budget: Self::DEFAULT_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.trace_budget = budget;
        self
    }

    pub fn with_amp(mut self, amp: usize) -> Self {
        self.amp = amp;
        self
    }
}

/// Where the phase sits relative to the Kraus decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseConvention {
    /// `e^{iθ(n̂ + l x + k y)} B_k A_l`, applied stage by stage.
    Gauge(KrausGaugePoint),
    /// `e^{iθ(n̂ + γ(k − l))} B_k A_l`, applied term by term.
    Gamma(f64),
    /// `B_k A_l e^{iθ n̂}`.
    PhaseFirst,
}

#[derive(Debug, Clone)]
pub struct ChannelOutput {
    pub state: TruncatedState,
    pub trace_deficit: f64,
}

fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

/// Applies the lossy thermal-noise channel followed (or preceded) by the
/// phase `θ` to every mode of `state`.
pub fn apply_channel(
    state: &TruncatedState,
    p: &ChannelParams,
    theta: f64,
    phase: PhaseConvention,
    cutoffs: &Cutoffs,
) -> Result<ChannelOutput> {
    let w = cutoffs.work_dim;
    if w < state.dim() {
        return Err(Error::domain(format!(
            "working dimension {w} is below the state dimension {}",
            state.dim()
        )));
    }
    let input = state.embed(w);
    let layout = input.layout();
    let tables = KrausTables::new(p, state.dim(), cutoffs.loss, cutoffs.amp);
    let losses: Vec<LadderOp> = (0..=cutoffs.loss.min(w - 1))
        .map(|l| tables.loss_op(l, w))
        .collect();
    let amps: Vec<LadderOp> = (0..=cutoffs.amp.min(w - 1))
        .map(|k| tables.amp_op(k, w))
        .collect();

    let mut rho = input.density().clone();
    for mode in 0..layout.n_modes {
        rho = match phase {
            PhaseConvention::Gauge(g) => {
                let r = stage(
                    &layout,
                    &rho,
                    mode,
                    losses
                        .iter()
                        .enumerate()
                        .map(|(l, a)| a.clone().scaled(cis(theta * l as f64 * g.x))),
                );
                let mut r = stage(
                    &layout,
                    &r,
                    mode,
                    amps.iter()
                        .enumerate()
                        .map(|(k, b)| b.clone().scaled(cis(theta * k as f64 * g.y))),
                );
                layout.conjugate_diagonal_in_place(&LadderOp::phase(w, theta), &mut r, mode);
                r
            }
            PhaseConvention::Gamma(gamma) => {
                let ph = LadderOp::phase(w, theta);
                let terms = amps.iter().enumerate().flat_map(|(k, b)| {
                    let ph = &ph;
                    losses.iter().enumerate().map(move |(l, a)| {
                        ph.compose(&b.compose(a))
                            .scaled(cis(theta * gamma * (k as f64 - l as f64)))
                    })
                });
                stage(&layout, &rho, mode, terms)
            }
            PhaseConvention::PhaseFirst => {
                let mut r = rho;
                layout.conjugate_diagonal_in_place(&LadderOp::phase(w, theta), &mut r, mode);
                let r = stage(&layout, &r, mode, losses.iter().cloned());
                stage(&layout, &r, mode, amps.iter().cloned())
            }
        };
    }
    let out = TruncatedState::from_density(layout.n_modes, w, rho)?;
    let trace_deficit = input.trace() - out.trace();
    if trace_deficit > cutoffs.trace_budget {
        return Err(Error::TruncationBudget {
            deficit: trace_deficit,
            budget: cutoffs.trace_budget,
        });
    }
    Ok(ChannelOutput {
        state: out,
        trace_deficit,
    })
}

/// `Σ_i K_i ρ K_i†` with each `K_i` acting on `mode`.
fn stage(
    layout: &ModeLayout,
    rho: &DMatrix<Complex64>,
    mode: usize,
    ops: impl Iterator<Item = LadderOp>,
) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
    for op in ops {
        if !op.is_zero() {
            layout.conjugate_add(&op, rho, &mut out, mode);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_math::derive_params;
    use crate::oracle::fock::{build_kraus_amp, build_kraus_loss};
    use crate::oracle::state::{build_state, state_moments, trace_distance};
    use crate::probe::{ProbeFamily, ProbeSpec};

    fn coherent(alpha: f64, d: usize) -> TruncatedState {
        build_state(&ProbeSpec::single(ProbeFamily::Coherent { alpha }), d).unwrap()
    }

    #[test]
    fn identity_channel_at_zero_phase() {
        let p = derive_params(1.0, 0.0).unwrap();
        let s = coherent(1.1, 20);
        let out = apply_channel(
            &s,
            &p,
            0.0,
            PhaseConvention::Gauge(KrausGaugePoint::ORIGIN),
            &Cutoffs::guarded(&p, 20).unwrap(),
        )
        .unwrap();
        assert!((out.state.density() - s.density()).norm() < 1e-14);
    }

    #[test]
    fn gauge_points_agree() {
        let p = derive_params(0.5, 1.0).unwrap();
        let s = coherent(1.0, 20);
        let c = Cutoffs::for_state(&s, &p).unwrap();
        let a = apply_channel(
            &s,
            &p,
            0.3,
            PhaseConvention::Gauge(KrausGaugePoint::ORIGIN),
            &c,
        )
        .unwrap();
        let b = apply_channel(
            &s,
            &p,
            0.3,
            PhaseConvention::Gauge(KrausGaugePoint::new(3.0, -2.0)),
            &c,
        )
        .unwrap();
        assert!(trace_distance(&a.state, &b.state).unwrap() < 1e-12);
    }

    #[test]
    fn gamma_conventions_agree() {
        let p = derive_params(0.6, 0.8).unwrap();
        let s = coherent(0.9, 16);
        let c = Cutoffs::for_state(&s, &p).unwrap();
        let outs: Vec<_> = [
            PhaseConvention::Gamma(-1.0),
            PhaseConvention::Gamma(0.0),
            PhaseConvention::Gamma(0.37),
            PhaseConvention::PhaseFirst,
        ]
        .iter()
        .map(|conv| apply_channel(&s, &p, 0.3, *conv, &c).unwrap().state)
        .collect();
        for i in 0..outs.len() {
            for j in i + 1..outs.len() {
                assert!(trace_distance(&outs[i], &outs[j]).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn output_mean_follows_channel() {
        // <n>_out = η<n>_in + (1-η) n̄_B
        let p = derive_params(0.4, 1.5).unwrap();
        let s = coherent(1.3, 25);
        let out = apply_channel(
            &s,
            &p,
            0.0,
            PhaseConvention::PhaseFirst,
            &Cutoffs::for_state(&s, &p).unwrap(),
        )
        .unwrap();
        let m = state_moments(&out.state);
        assert!((m.mean_total - (0.4 * 1.69 + 0.6 * 1.5)).abs() < 1e-10);
        assert!(out.trace_deficit.abs() < 1e-12);
    }

    #[test]
    fn matches_dense_kraus_sum() {
        let p = derive_params(0.7, 0.5).unwrap();
        let d = 10;
        let s = coherent(0.6, d);
        let c = Cutoffs::truncated(d).with_budget(1.0);
        let out = apply_channel(
            &s,
            &p,
            0.0,
            PhaseConvention::Gauge(KrausGaugePoint::ORIGIN),
            &c,
        )
        .unwrap();
        let mut expected = DMatrix::<Complex64>::zeros(d, d);
        for l in 0..d {
            for k in 0..d {
                let kr = (&build_kraus_amp(k, p.gain, d) * &build_kraus_loss(l, p.tau, d))
                    .into_entries();
                expected += &kr * s.density() * kr.adjoint();
            }
        }
        assert!((out.state.density() - expected).norm() < 1e-14);
    }

    #[test]
    fn deficit_shrinks_with_amp_cutoff_and_budget_is_enforced() {
        let p = derive_params(0.3, 2.0).unwrap();
        let s = coherent(1.0, 14);
        let full = Cutoffs::for_state(&s, &p).unwrap();
        let mut last = f64::INFINITY;
        for k in [2usize, 5, 10, 20, 40] {
            let c = full.with_amp(k).with_budget(1.0);
            let d = apply_channel(&s, &p, 0.0, PhaseConvention::PhaseFirst, &c)
                .unwrap()
                .trace_deficit;
            assert!(d <= last);
            last = d;
        }
        let err =
            apply_channel(&s, &p, 0.0, PhaseConvention::PhaseFirst, &full.with_amp(3)).unwrap_err();
        assert!(matches!(err, Error::TruncationBudget { .. }));
    }

    #[test]
    fn two_mode_product_factorises() {
        let p = derive_params(0.5, 0.4).unwrap();
        let d = 10;
        let one = coherent(0.5, d);
        let two = build_state(
            &ProbeSpec {
                family: ProbeFamily::Coherent { alpha: 0.5 },
                n_modes: 2,
            },
            d,
        )
        .unwrap();
        let c = Cutoffs::truncated(d).with_budget(1.0);
        let a = apply_channel(
            &one,
            &p,
            0.2,
            PhaseConvention::Gauge(KrausGaugePoint::ORIGIN),
            &c,
        )
        .unwrap();
        let b = apply_channel(
            &two,
            &p,
            0.2,
            PhaseConvention::Gauge(KrausGaugePoint::ORIGIN),
            &c,
        )
        .unwrap();
        let kron = a.state.density().kronecker(a.state.density());
        assert!((b.state.density() - kron).norm() < 1e-14);
    }
}
