//! Bayesian reconstruction of past population trajectories from time-binned
//! counts of occupied settlements.
//!
//! Population in each time bin is linked to the observed count through a
//! power-law scaling to settlements, exponential loss of settlements between
//! deposition and observation, and a survey sampling probability. The posterior
//! over the whole trajectory and the three nuisance parameters is fitted by
//! stochastic variational inference, with a random-walk Metropolis sampler
//! kept as an oracle for small problems.
//!
//! The guide in `book/` walks through each piece with runnable examples.

pub mod cli;
pub mod data;
pub mod dists;
pub mod error;
pub mod infer;
pub mod model;
pub mod report;
pub mod verify;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/priors.md")]
    mod priors {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/mcmc.md")]
    mod mcmc {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/reporting.md")]
    mod reporting {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
