//! Variance-reduced Halpern iterations for finite-sum monotone inclusions
//! `0 ∈ F(u) + G(u)` with `F = (1/n) Σ F_i`.
//!
//! The crate provides
//!
//! - [`halpern_coco`]: a single-loop anchored forward-backward iteration driven
//!   by the recursive [`page`] estimator, for operators that are cocoercive on
//!   average;
//! - [`inexact_halpern`]: an anchored iteration on the resolvent of `η(F+G)`,
//!   whose resolvent is approximated by the [`vr_forb`] subsolver, for
//!   monotone operators that are Lipschitz in expectation;
//! - [`problems`]: benchmark instances (simplex-constrained matrix games, a
//!   hard quadratic program, synthetic affine instances) and the simplex
//!   projection;
//! - [`harness`]: an extragradient baseline, experiment runner, CSV traces and
//!   SVG plots.
//!
//! All randomness flows through [`RngStream`], a seeded ChaCha8 stream, so a
//! `(configuration, seed)` pair determines every iterate bit for bit.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counter;
pub mod error;
pub mod halpern_coco;
pub mod harness;
pub mod inexact_halpern;
pub mod page;
pub mod problem;
pub mod problems;
pub mod rng;
pub mod sampling;
pub mod trace;
pub mod vr_forb;

pub use counter::EvalCounter;
pub use error::{Error, Result};
pub use problem::{residual_norm, FiniteSumProblem, Point, ProblemConstants};
pub use rng::RngStream;
pub use sampling::SamplingDistribution;
pub use trace::TraceRecord;
