//! Blended Bayesian and frequentist inference on finite parameter spaces.
//!
//! A set of Bayesian posteriors, given as per-atom probability bounds, is
//! blended with a benchmark posterior (typically a confidence posterior) by
//! taking the information projection of the benchmark onto the set. The
//! [`projection`] module computes that projection and also solves the
//! underlying maximin game by brute force so the two can be compared.
//! [`testing`] specializes everything to a point null hypothesis, and
//! [`confidence`] builds the benchmark from a Student t location model.

pub mod cli;
pub mod confidence;
pub mod distributions;
mod error;
pub mod projection;
pub mod testing;

pub use error::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;
