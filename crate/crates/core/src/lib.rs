//! Bayesian system-reliability toolkit.
//!
//! Combines heterogeneous reliability data (lifetimes, degradation
//! measurements, pass/fail tests, lot inspections, failure counts) in
//! hierarchical Bayesian models, composes component reliabilities through
//! series systems, Bayesian networks, and flowgraphs, and searches for
//! test-resource allocations that minimize a pre-posterior
//! credible-interval criterion.
//!
//! The crate is organized as:
//! - [`dists`]: densities, CDFs, quantiles, and samplers for the
//!   distribution families the models use.
//! - [`mcmc`]: a variable-at-a-time random-walk Metropolis engine over
//!   named parameter vectors.
//! - [`component`]: single-component data-combination models
//!   (degradation + failure times, surrogate QA data, biased lot samples).
//! - [`system`]: multilevel series systems, partially informative system
//!   tests, a hierarchical NHPP fleet model, a Weibull series hierarchy,
//!   and induced series priors.
//! - [`bn`] / [`flowgraph`]: Bayesian-network and flowgraph system
//!   representations.
//! - [`alloc`]: budget-constrained test allocation by genetic algorithm
//!   over a pre-posterior criterion.

pub mod alloc;
pub mod bn;
pub mod component;
pub mod dists;
pub mod error;
pub mod flowgraph;
pub mod mcmc;
pub mod system;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
