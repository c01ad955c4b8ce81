use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ladder::LadderOp;
use crate::channel_math::ChannelParams;
use crate::error::{Error, Result};

/// Below this a starting weight is treated as underflowing and the
/// recurrence switches to log space.
const LINEAR_FLOOR: f64 = 1e-280;

/// Largest amplifier cutoff the oracle is willing to build.
const MAX_AMP_CUTOFF: usize = 200_000;

/// Binomial loss probabilities `P(l | m) = C(m,l) (1-τ)^l τ^{m-l}` for
/// `l = 0..=min(m, lmax)`.
pub fn loss_probabilities(m: usize, tau: f64, lmax: usize) -> Vec<f64> {
    let top = m.min(lmax);
    let mut out = vec![0.0; top + 1];
    if tau >= 1.0 {
        out[0] = 1.0;
        return out;
    }
    let odds = (1.0 - tau) / tau;
    let start = tau.powi(m as i32);
    if start > LINEAR_FLOOR {
        let mut t = start;
        for (l, o) in out.iter_mut().enumerate() {
            *o = t;
            t *= (m - l) as f64 / (l + 1) as f64 * odds;
        }
    } else {
        let mut lt = m as f64 * tau.ln();
        let lodds = odds.ln();
        for (l, o) in out.iter_mut().enumerate() {
            *o = lt.exp();
            lt += ((m - l) as f64 / (l + 1) as f64).ln() + lodds;
        }
    }
    out
}

/// Negative-binomial amplifier probabilities
/// `P(k | j) = C(j+k, k) G^{-(j+1)} ((G-1)/G)^k` for `k = 0..=kmax`.
pub fn amp_probabilities(j: usize, gain: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if gain <= 1.0 {
        out[0] = 1.0;
        return out;
    }
    let r = (gain - 1.0) / gain;
    let start = gain.powi(-((j + 1) as i32));
    if start > LINEAR_FLOOR {
        let mut t = start;
        for (k, o) in out.iter_mut().enumerate() {
            *o = t;
            t *= r * (j + k + 1) as f64 / (k + 1) as f64;
        }
    } else {
        let mut lt = -((j + 1) as f64) * gain.ln();
        let lr = r.ln();
        for (k, o) in out.iter_mut().enumerate() {
            *o = lt.exp();
            lt += lr + ((j + k + 1) as f64 / (k + 1) as f64).ln();
        }
    }
    out
}

/// Smallest `K` such that the amplifier weight beyond `K` for input photon
/// number `m_max` is below `tol`. Lower inputs have lighter tails.
pub fn amp_cutoff_with_tol(gain: f64, m_max: usize, tol: f64) -> Result<usize> {
    if gain <= 1.0 {
        return Ok(0);
    }
    let r = (gain - 1.0) / gain;
    let mut lt = -((m_max + 1) as f64) * gain.ln();
    for k in 0..MAX_AMP_CUTOFF {
        let ratio = r * (m_max + k + 1) as f64 / (k + 1) as f64;
        // past the mode the tail is bounded by a geometric series
        if ratio < 1.0 && lt.exp() * ratio / (1.0 - ratio) < tol {
            return Ok(k);
        }
        lt += ratio.ln();
    }
    Err(Error::Domain(format!(
        "amplifier gain {gain} needs more than {MAX_AMP_CUTOFF} Kraus terms"
    )))
}

pub fn amp_cutoff(gain: f64, m_max: usize) -> Result<usize> {
    amp_cutoff_with_tol(gain, m_max, 1e-17)
}

/// Kraus weight tables for sources `< src_dim`, shared by every operator
/// built for one channel.
#[derive(Debug, Clone)]
pub struct KrausTables {
    src_dim: usize,
    loss: Vec<Vec<f64>>,
    amp: Vec<Vec<f64>>,
}

impl KrausTables {
    pub fn new(p: &ChannelParams, src_dim: usize, loss_max: usize, amp_max: usize) -> Self {
        let loss = (0..src_dim)
            .map(|m| loss_probabilities(m, p.tau, loss_max))
            .collect();
        let amp = (0..src_dim)
            .map(|j| amp_probabilities(j, p.gain, amp_max))
            .collect();
        Self { src_dim, loss, amp }
    }

    pub fn src_dim(&self) -> usize {
        self.src_dim
    }

    /// Loss Kraus operator `A_l` on a `dim`-level space.
    pub fn loss_op(&self, l: usize, dim: usize) -> LadderOp {
        LadderOp::from_fn(dim, -(l as isize), |m| {
            let w = self
                .loss
                .get(m)
                .and_then(|row| row.get(l))
                .copied()
                .unwrap_or(0.0);
            Complex64::new(w.sqrt(), 0.0)
        })
    }

    /// Amplifier Kraus operator `B_k` on a `dim`-level space.
    pub fn amp_op(&self, k: usize, dim: usize) -> LadderOp {
        LadderOp::from_fn(dim, k as isize, |j| {
            let w = self
                .amp
                .get(j)
                .and_then(|row| row.get(k))
                .copied()
                .unwrap_or(0.0);
            Complex64::new(w.sqrt(), 0.0)
        })
    }
}

/// Dense complex operator on a `dim`-level truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperatorMatrix {
    entries: DMatrix<Complex64>,
}

impl FockOperatorMatrix {
    pub fn from_entries(entries: DMatrix<Complex64>) -> Self {
        assert!(entries.is_square(), "operator matrix must be square");
        Self { entries }
    }

    pub fn from_ladder(op: &LadderOp) -> Self {
        Self {
            entries: op.to_dense(),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        Self {
            entries: DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    Complex64::new(values[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn annihilation(dim: usize) -> Self {
        Self::from_ladder(&LadderOp::from_fn(dim, -1, |m| {
            Complex64::new((m as f64).sqrt(), 0.0)
        }))
    }

    pub fn creation(dim: usize) -> Self {
        Self::from_ladder(&LadderOp::from_fn(dim, 1, |m| {
            Complex64::new(((m + 1) as f64).sqrt(), 0.0)
        }))
    }

    pub fn number(dim: usize) -> Self {
        Self::from_ladder(&LadderOp::real_diagonal(dim, |m| m as f64))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            entries: self.entries.kronecker(&other.entries),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            entries: self.entries.map(|z| z * s),
        }
    }

    /// Top-left `n × n` block.
    pub fn block(&self, n: usize) -> Self {
        Self {
            entries: self.entries.view((0, 0), (n, n)).into_owned(),
        }
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .zip_map(&other.entries, |a, b| (a - b).norm())
            .max()
    }

    /// `tr(ρ · self)` for a density matrix of matching size.
    pub fn expectation(&self, rho: &DMatrix<Complex64>) -> f64 {
        let n = self.dim();
        assert_eq!(rho.nrows(), n, "state and operator dimensions differ");
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += rho[(i, j)] * self.entries[(j, i)];
            }
        }
        acc.re
    }
}

impl Mul for &FockOperatorMatrix {
    type Output = FockOperatorMatrix;

    fn mul(self, rhs: &FockOperatorMatrix) -> FockOperatorMatrix {
        FockOperatorMatrix {
            entries: &self.entries * &rhs.entries,
        }
    }
}

impl std::ops::Add for &FockOperatorMatrix {
    type Output = FockOperatorMatrix;

    fn add(self, rhs: &FockOperatorMatrix) -> FockOperatorMatrix {
        FockOperatorMatrix {
            entries: &self.entries + &rhs.entries,
        }
    }
}

/// `A_l = sqrt((1-τ)^l / l!) τ^{n̂/2} â^l` truncated to `d` levels.
pub fn build_kraus_loss(l: usize, tau: f64, d: usize) -> FockOperatorMatrix {
    let op = LadderOp::from_fn(d, -(l as isize), |m| {
        let p = loss_probabilities(m, tau, l);
        Complex64::new(p.get(l).copied().unwrap_or(0.0).sqrt(), 0.0)
    });
    FockOperatorMatrix::from_ladder(&op)
}

/// `B_k = sqrt((1/k!)(1/G)((G-1)/G)^k) (â†)^k G^{-n̂/2}` truncated to `d` levels.
pub fn build_kraus_amp(k: usize, gain: f64, d: usize) -> FockOperatorMatrix {
    let op = LadderOp::from_fn(d, k as isize, |j| {
        let p = amp_probabilities(j, gain, k);
        Complex64::new(p[k].sqrt(), 0.0)
    });
    FockOperatorMatrix::from_ladder(&op)
}
