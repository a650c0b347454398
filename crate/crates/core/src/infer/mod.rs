//! Posterior fitting.
//!
//! The main route is stochastic variational inference with a mean-field guide:
//! log-normal factors for the populations, λ and a, and a logit-normal factor
//! for p. ELBO gradients are pathwise (reparameterized) with hand-derived
//! partials of the joint. The optimizer *maximizes* the ELBO throughout; every
//! gradient in this module is a gradient of the ELBO, not of its negation.
//!
//! [`mh_sample`] is a random-walk Metropolis sampler used to check the
//! variational fit on small instances.

mod adam;
mod elbo;
mod guide;
mod mcmc;
mod svi;
mod target;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use elbo::{
    draw_noise, elbo_estimate, elbo_gradient, elbo_with_noise, elbo_with_target, latent_name, ElboEstimate,
    ELBO_SAMPLE_FLOOR,
};
pub use guide::{
    logit_normal_mode, logit_normal_moments, map_estimate, sample_latents, GuideState, LocScale, INITIAL_SCALE,
};
pub use mcmc::{mh_sample, mh_sample_target, McmcConfig, McmcResult, PosteriorSamples, ACCEPTANCE_BAND};
pub use svi::{fit_svi, fit_svi_target, ElboPoint, FitDiagnostics, FitResult, SviConfig, DIVERGENCE_PATIENCE};
pub use target::{LatentTarget, ModelTarget, Support};
