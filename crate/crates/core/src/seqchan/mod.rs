//! Weak measurements, Kraus channels and multi-party sequences.

pub mod channel;
pub mod sequence;
pub mod weak;

pub use channel::{KrausChannel, KrausOperator, Outcome, COMPLETENESS_TOL};
pub use sequence::{
    joint_effect, joint_from_channels, joint_outcomes, run_sequence, ExplicitRetarget, Geometry,
    PartyPlan, PartyRecord, PartyStrategy, ProjectorRetarget, Retarget, RetargetContext,
    SequentialTrace, WeakMcmStrategy, TRACE_SCHEMA,
};
pub use weak::{
    alpha_for_rate, ensemble_distance, inconclusive_rate, information_gain, kraus_from_weak,
    linear_independence, weaken, WeakMcm,
};
