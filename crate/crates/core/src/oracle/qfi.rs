use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;

use super::channel::{apply_channel, Cutoffs, PhaseConvention};
use super::state::TruncatedState;
use crate::channel_math::{ChannelParams, KrausGaugePoint};
use crate::error::{Error, Result};

/// Eigenpairs with `λ_i + λ_j` at or below this fraction of `λ_max` are
/// dropped from the spectral sum.
pub const SLD_NULL_TOL: f64 = 1e-12;

/// Quantum Fisher information of a phase-encoded state with respect to the
/// total photon number generator, by the spectral formula
/// `F = Σ 2|⟨i|∂ρ|j⟩|² / (λ_i + λ_j)` with `∂ρ = i[N̂, ρ]`.
///
/// For a sub-normalised state the result is a lower bound on the QFI of any
/// completion that differs only outside the kept subspace.
pub fn qfi_of_state(state: &TruncatedState) -> Result<f64> {
    let rho = state.density();
    let n = state.total_number();
    let dim = rho.nrows();
    let drho = nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
        Complex64::new(0.0, n[i] - n[j]) * rho[(i, j)]
    });
    let eig = SymmetricEigen::try_new(rho.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("eigendecomposition did not converge".into()))?;
    let lambda = &eig.eigenvalues;
    let lmax = lambda.iter().cloned().fold(0.0, f64::max);
    if lmax <= 0.0 {
        return Ok(0.0);
    }
    let v = &eig.eigenvectors;
    let d = v.adjoint() * drho * v;
    let cut = SLD_NULL_TOL * lmax;
    let mut f = 0.0;
    for j in 0..dim {
        for i in 0..dim {
            let s = lambda[i] + lambda[j];
            if s > cut {
                f += 2.0 * d[(i, j)].norm_sqr() / s;
            }
        }
    }
    Ok(f)
}

/// Exact QFI of the channel output with the phase applied after the channel.
pub fn qfi_exact(
    state0: &TruncatedState,
    p: &ChannelParams,
    theta: f64,
    cutoffs: &Cutoffs,
) -> Result<f64> {
    let out = apply_channel(
        state0,
        p,
        theta,
        PhaseConvention::Gauge(KrausGaugePoint::ORIGIN),
        cutoffs,
    )?;
    qfi_of_state(&out.state)
}
