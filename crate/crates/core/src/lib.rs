//! Lower bounds on phase-estimation error through lossy thermal-noise bosonic
//! channels.
//!
//! [`channel_math`] holds the closed-form bound surface and its minimiser,
//! [`probe`] the photon statistics of standard probe states, and [`oracle`] a
//! brute-force truncated Fock-space model that checks both.

pub mod channel_math;
pub mod error;
pub mod format;
pub mod oracle;
pub mod probe;
pub mod sweep;
pub mod verify;

pub use channel_math::{
    cq_star_n, cq_star_single, derive_params, BoundResult, ChannelParams, KrausGaugePoint,
    ProbeMoments,
};
pub use error::{Error, Result};
pub use probe::{MomentMode, ProbeFamily, ProbeSpec};
pub use sweep::{run_sweep, SweepRow, SweepSpec};
pub use verify::{run_verify, CheckResult, VerifyOptions, VerifyReport};
