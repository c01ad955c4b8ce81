//! Shared inputs for the benchmarks.

use phasebound::oracle::{build_state, TruncatedState};
use phasebound::{derive_params, ChannelParams, ProbeFamily, ProbeSpec};

/// A moderately noisy channel used by every oracle benchmark.
pub fn reference_channel() -> ChannelParams {
    derive_params(0.4, 1.0).expect("reference channel is in the domain")
}

/// Coherent probe with `|α|² = 2` on `d` levels.
pub fn coherent_state(d: usize) -> TruncatedState {
    build_state(
        &ProbeSpec::single(ProbeFamily::Coherent { alpha: 2f64.sqrt() }),
        d,
    )
    .expect("coherent probe fits")
}

/// Entangled coherent state with `|α| = 1` on `d` levels per mode.
pub fn ecs_state(d: usize) -> TruncatedState {
    build_state(&ProbeSpec::ecs(1.0), d).expect("ecs probe fits")
}
