//! Exact path counts, generating-function roots and crossing/hitting
//! probabilities for β-biased monotone lattice walks, plus a seeded Monte
//! Carlo simulator used to check the analytic results.
//!
//! A β-biased monotone walk starts at the origin and moves from `(a, b)` to
//! `(a, b + 1)` with probability `β/(β+1)` or to `(a + 1, b)` with probability
//! `1/(β+1)`.
//!
//! Floating-point routines are generic over [`Real`] (`f32`/`f64`); exact
//! routines work on [`BigCount`] and [`Rat`].

// NaN must fail these guards, so `!(x > y)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crossprob;
pub mod error;
pub mod exactcomb;
pub mod gfroots;
pub mod scalar;
pub mod walksim;

pub use crossprob::{BiasSpec, LineSpec, ProbMethod, ProbResult};
pub use error::{Error, Result};
pub use exactcomb::{CountKind, CountTable};
pub use gfroots::{DomainBound, RootConfig, RootResult};
pub use scalar::Real;
pub use walksim::{SimEstimate, StopRule, TrialKind, TrialOutcome, TrialStatus};

/// Arbitrary-precision nonnegative path count.
pub type BigCount = num_bigint::BigUint;
/// Exact rational in lowest terms with a positive denominator.
pub type Rat = num_rational::BigRational;

pub type RootResult64 = RootResult<f64>;
pub type RootResult32 = RootResult<f32>;
pub type ProbResult64 = ProbResult<f64>;
pub type DomainBound64 = DomainBound<f64>;
