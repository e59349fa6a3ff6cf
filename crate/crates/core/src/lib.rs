//! Sequential maximum-confidence measurement.
//!
//! The crate computes maximum confidences and their measurements for an
//! ensemble of quantum states, weakens those measurements into
//! minimally-disturbing Kraus channels, and chains them across several
//! parties who each measure the same system in turn.
//!
//! - [`qcore`]: density matrices, ensembles, POVMs and the linear algebra.
//! - [`mcm`]: confidences, complementary states, optimality checks and the
//!   entropic identities.
//! - [`optim`]: the small convex and derivative-free programs used along the
//!   way.
//! - [`seqchan`]: weak measurements, channels and sequential runs.
//! - [`families`]: the four analytic ensemble families with closed-form
//!   oracles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod families;
pub mod mcm;
pub mod optim;
pub mod qcore;
pub mod seqchan;

pub use error::{Error, Result};
