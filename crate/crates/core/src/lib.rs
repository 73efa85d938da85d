//! Non-adaptive group testing toolkit.
//!
//! The crate covers the whole pipeline of a noiseless pooled-screening
//! experiment:
//!
//! * [`design`]: Bernoulli, constant-column and near-constant-column pooling
//!   matrices.
//! * [`model`]: the combinatorial defective prior and the OR test model.
//! * [`decoders`]: COMP, DD, SCOMP and weighted SCOMP (W-SCOMP) sharing one
//!   greedy scoring kernel.
//! * [`metrics`]: set-recovery statistics and the counting bound.
//! * [`theory`]: closed-form per-test moments, SNRs, the positivity function
//!   `f(N, k)` and the tail bounds built on them.
//! * [`oracle`]: brute-force references used to validate [`theory`] and the
//!   decoders.
//! * [`sim`]: a reproducible, parallel Monte Carlo sweep harness.
//!
//! Item and test indices are 0-based everywhere.
//!
//! The numerical code is generic over the scalar type ([`Scalar`], satisfied
//! by `f32` and `f64`); the `*64` aliases below fix it to `f64`, which is what
//! the benchmark harness and the command-line tool use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decoders;
pub mod design;
pub mod error;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod seed;
pub mod sim;
pub mod theory;

pub use decoders::{comp, dd, scomp, score_items, w_scomp, Algorithm, DecodeResult, ScoreVector, TraceStep};
pub use design::{DesignKind, DesignMatrix, DesignParams, DesignSpec};
pub use error::{Error, Result};
pub use metrics::{confusion, counting_bound, f1_score, jaccard, RecoveryStats};
pub use model::{run_tests, sample_defective_set, ItemSet, OutcomeVector};
pub use scalar::Scalar;
pub use sim::{run_sweep, run_trial, SimConfig, SweepResult, SweepRow};
pub use theory::{MomentSet, ScoringRule, TheoryPoint};

/// Per-test moments in double precision.
pub type MomentSet64 = theory::MomentSet<f64>;
/// `f(N, k)` evaluation point in double precision.
pub type TheoryPoint64 = theory::TheoryPoint<f64>;
/// W-SCOMP scores in double precision.
pub type ScoreVector64 = decoders::ScoreVector<f64>;
/// Enumerated oracle moments in double precision.
pub type EnumeratedMoments64 = oracle::EnumeratedMoments<f64>;
