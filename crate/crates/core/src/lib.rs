//! Estimation, resampling and testing for ranked set samples using
//! exponentially tilted empirical distribution functions.
//!
//! A ranked set sample measures one unit of a prescribed rank out of every
//! cheaply ranked set of `k` units. When the per-rank measurement counts are
//! unequal, the plain empirical distribution function is biased for the
//! population distribution. This crate estimates the distribution function
//! by exponentially tilting either all observations (EAT) or the rank-row
//! means (EAR) to satisfy a mean constraint, resamples ranked set structures
//! from the tilted estimates, and builds bootstrap tests for the population
//! mean on top, together with a deterministic parallel simulation harness
//! for size and power studies.
//!
//! Entry points:
//! - [`design::Design`], [`sample::UrssSample`]: the data model.
//! - [`tilting`]: tilt-weight solvers and tilted DF estimates.
//! - [`sampling`]: samplers for perfect, noisy-ranked, matrix-misranked and
//!   finite-population designs.
//! - [`resampling`]: the EAT/EAR/parametric bootstrap schemes.
//! - [`testing`]: mean tests (asymptotic, Welch, bootstrap, empirical
//!   likelihood comparators).
//! - [`montecarlo`]: replicated size/power studies.

pub mod design;
pub mod df;
pub mod dist;
pub mod error;
pub mod io;
pub mod montecarlo;
pub mod resampling;
pub mod rng;
pub mod sample;
pub mod sampling;
pub mod stats;
pub mod testing;
pub mod tilting;

pub use design::Design;
pub use df::{edf, WeightedDf};
pub use dist::{DistributionSpec, Family};
pub use error::{Error, Result};
pub use rng::RngSeed;
pub use sample::UrssSample;
pub use tilting::{TiltProblem, TiltWeights, WeightLevel};
