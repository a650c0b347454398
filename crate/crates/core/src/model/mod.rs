//! The discretized forward model: time grid, prior construction, expected
//! observed counts and the joint log-density.
//!
//! Population `N_t` in bin `t` founds `(N_t / a)^b` settlements. Each survives
//! to the observation year with probability `exp(−λ Δt)` and is recorded by
//! surveys with probability `p`, so the observed count is Poisson with rate
//! `μ_t = (N_t / a)^b · exp(−λ Δt) · p`. The scaling exponent `b` is held at 1.

mod forward;
mod grid;
mod joint;
mod priors;

pub use forward::{
    expected_counts, expected_observed, log_joint, log_likelihood, log_prior, settlements_deposited, survival_fraction,
    ModelParams, ObservedCounts, RATE_FLOOR,
};
pub use grid::TimeGrid;
pub use joint::JointDensity;
pub use priors::{build_priors, prior_mode_curve, Anchor, ModeStd, PriorConfig, PriorSpec};
