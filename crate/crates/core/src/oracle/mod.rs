//! Brute-force truncated Fock-space model of the channel, used to check the
//! closed forms independently.
//!
//! Truncation conventions: a state with `d` levels per mode is embedded in a
//! working space of `Cutoffs::work_dim` levels. Loss never raises photon
//! number, so the only leakage comes from amplifier terms whose target
//! exceeds the working space; [`Cutoffs::guarded`] sizes the working space so
//! that this weight is below `1e-16` for every input level `< d`.

mod channel;
mod fock;
mod hmoments;
mod identities;
mod ladder;
mod qfi;
mod state;

pub use channel::{apply_channel, ChannelOutput, Cutoffs, PhaseConvention};
pub use fock::{
    amp_cutoff, amp_cutoff_with_tol, amp_probabilities, build_kraus_amp, build_kraus_loss,
    loss_probabilities, FockOperatorMatrix, KrausTables,
};
pub use hmoments::{
    cq_numeric, cq_numeric_multimode, h_moments, h_operators, infer_d1, minimize_cq_numeric,
    multimode_terms, HMoments, HOperators, MultimodeTerms, NumericMinimum,
};
pub use identities::{
    identity_names, raw_identity_deviations, verify_identities, verify_identities_seeded,
    IdentityEntry, IdentityReport,
};
pub use ladder::LadderOp;
pub use qfi::{qfi_exact, qfi_of_state, SLD_NULL_TOL};
pub use state::{
    build_state, build_state_with_norm, coherent_amplitudes, default_dim, squeezed_amplitudes,
    state_moments, trace_distance, TruncatedState, MAX_TWO_MODE_DIM, TAIL_BUDGET,
};
