//! Natural-space forward model and log-densities.

use serde::{Deserialize, Serialize};

use super::grid::TimeGrid;
use super::priors::PriorSpec;
use crate::dists::{log_pdf_beta, log_pdf_gamma, log_pmf_poisson};
use crate::error::{Error, Result};

/// Floor on the expected observed count.
pub const RATE_FLOOR: f64 = 1e-12;

/// One full latent configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Persons per bin.
    pub populations: Vec<f64>,
    /// Per year.
    pub loss_rate: f64,
    /// Persons per settlement.
    pub scaling_factor: f64,
    /// Held at 1; not inferred.
    pub scaling_exponent: f64,
    pub sampling_prob: f64,
}

impl ModelParams {
    pub fn bin_count(&self) -> usize {
        self.populations.len()
    }

    /// Flattened latents `[N_0 .. N_{T-1}, λ, a, p]`.
    pub fn to_latents(&self) -> Vec<f64> {
        let mut v = self.populations.clone();
        v.extend([self.loss_rate, self.scaling_factor, self.sampling_prob]);
        v
    }

    pub fn from_latents(latents: &[f64], scaling_exponent: f64) -> Result<Self> {
        let t = latents
            .len()
            .checked_sub(3)
            .ok_or_else(|| Error::Contract("latent vector shorter than 3".into()))?;
        Ok(Self {
            populations: latents[..t].to_vec(),
            loss_rate: latents[t],
            scaling_factor: latents[t + 1],
            sampling_prob: latents[t + 2],
            scaling_exponent,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObservedCounts(pub Vec<u64>);

impl ObservedCounts {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

/// Fraction of deposits surviving `elapsed` years at loss rate `loss_rate`.
pub fn survival_fraction(loss_rate: f64, elapsed: f64) -> f64 {
    (-loss_rate * elapsed).exp()
}

/// Expected observed settlement count `(N/a)^b · exp(−λΔt) · p`, floored at
/// [`RATE_FLOOR`].
pub fn expected_observed(
    population: f64,
    scaling_factor: f64,
    scaling_exponent: f64,
    loss_rate: f64,
    elapsed: f64,
    sampling_prob: f64,
) -> f64 {
    let deposited = settlements_deposited(population, scaling_factor, scaling_exponent);
    let mu = deposited * survival_fraction(loss_rate, elapsed) * sampling_prob;
    if mu.is_nan() {
        return RATE_FLOOR;
    }
    mu.max(RATE_FLOOR)
}

/// [`expected_observed`] for every bin of `grid`.
pub fn expected_counts(params: &ModelParams, grid: &TimeGrid) -> Result<Vec<f64>> {
    check_dims(params, grid.bin_count(), "expected_counts", grid.bin_count())?;
    Ok((0..grid.bin_count())
        .map(|i| {
            expected_observed(
                params.populations[i],
                params.scaling_factor,
                params.scaling_exponent,
                params.loss_rate,
                grid.elapsed(i),
                params.sampling_prob,
            )
        })
        .collect())
}

/// Settlements founded by `population` persons: `(N/a)^b`.
pub fn settlements_deposited(population: f64, scaling_factor: f64, scaling_exponent: f64) -> f64 {
    let ratio = population / scaling_factor;
    if scaling_exponent == 1.0 {
        ratio
    } else {
        ratio.powf(scaling_exponent)
    }
}

fn check_dims(params: &ModelParams, n: usize, what: &str, m: usize) -> Result<()> {
    if params.bin_count() != n || m != n {
        return Err(Error::Contract(format!(
            "{what}: params have {} bins, expected {n} (other input has {m})",
            params.bin_count()
        )));
    }
    Ok(())
}

pub fn log_likelihood(params: &ModelParams, counts: &ObservedCounts, grid: &TimeGrid) -> Result<f64> {
    check_dims(params, grid.bin_count(), "log_likelihood", counts.len())?;
    Ok(params
        .populations
        .iter()
        .zip(counts.as_slice())
        .enumerate()
        .map(|(i, (&n, &k))| {
            let mu = expected_observed(
                n,
                params.scaling_factor,
                params.scaling_exponent,
                params.loss_rate,
                grid.elapsed(i),
                params.sampling_prob,
            );
            log_pmf_poisson(k, mu)
        })
        .sum())
}

pub fn log_prior(params: &ModelParams, priors: &PriorSpec) -> Result<f64> {
    check_dims(params, priors.bin_count(), "log_prior", priors.bin_count())?;
    let trajectory: f64 = params
        .populations
        .iter()
        .zip(&priors.population)
        .map(|(&n, g)| log_pdf_gamma(n, g))
        .sum();
    Ok(trajectory
        + log_pdf_gamma(params.loss_rate, &priors.loss_rate)
        + log_pdf_gamma(params.scaling_factor, &priors.scaling_factor)
        + log_pdf_beta(params.sampling_prob, &priors.sampling_prob))
}

/// Unnormalized log posterior: likelihood plus prior.
pub fn log_joint(params: &ModelParams, counts: &ObservedCounts, priors: &PriorSpec, grid: &TimeGrid) -> Result<f64> {
    let prior = log_prior(params, priors)?;
    if prior == f64::NEG_INFINITY {
        return Ok(prior);
    }
    Ok(log_likelihood(params, counts, grid)? + prior)
}
