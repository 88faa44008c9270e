//! Simulation and exact analytics for splitting-tree collision-resolution
//! algorithms with immigration (stack / tree random-access protocols).
//!
//! A group of `n` pending items is repeatedly split at random into subgroups
//! until every subgroup holds fewer than `D` items; freshly arriving items
//! join subgroups as they are created. The crate provides:
//!
//! * [`splitting`] — branching laws, the size-biased splitting measure they
//!   induce, and checks of the assumptions the analytics rely on;
//! * [`arprocess`] — the auto-regressive weight process `X_n = W_n X_{n-1} + 1`,
//!   its stationary limit, and Laplace-transform estimators;
//! * [`protocol`] — two executable semantics of the algorithm (branching tree
//!   and stack Markov chain) plus empirical stability probing;
//! * [`analytic`] — the stability matrix, the constant vector it determines,
//!   the critical arrival rate, exact expected tree sizes and their
//!   linear-growth asymptotics;
//! * [`validation`] — the cross-validation battery tying analytics to
//!   simulation, used by the acceptance test suite and the CLI.
//!
//! All estimators are deterministic for a fixed seed: trials and sample paths
//! derive their generators from `(seed, index)`, and accumulation happens in
//! fixed chunks, so results do not depend on the number of worker threads.

pub mod analytic;
pub mod arprocess;
pub mod error;
pub mod protocol;
pub mod rng;
pub mod splitting;
pub mod stats;
pub mod validation;

pub use analytic::{
    AsymptoticSlope, Constants, LambdaC, SeriesParams, SeriesValue, SlopeVariant, StabilityMatrix,
};
pub use arprocess::{StationarySampler, WeightPath};
pub use error::Error;
pub use protocol::{ArrivalLaw, DriftReport, SimEstimate, Stability, StackState, TreeStats};
pub use splitting::{AssumptionReport, BranchingLaw, SplittingMeasure};

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
