//! The joint density evaluated in unconstrained coordinates.
//!
//! Coordinates are `u = [ln N_0 .. ln N_{T-1}, ln λ, ln a, logit p]`. The value
//! returned is the natural-space log joint at `z(u)` (no Jacobian term); the
//! gradient is taken with respect to `u`. Normalizing constants are computed
//! once at construction.

use super::forward::{ModelParams, ObservedCounts, RATE_FLOOR};
use super::grid::TimeGrid;
use super::priors::PriorSpec;
use crate::dists::{beta_log_normalizer, gamma_log_normalizer, ln_factorial, positive_from_log, unit_from_logit};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct JointDensity {
    counts: Vec<u64>,
    ln_count_factorial: Vec<f64>,
    elapsed: Vec<f64>,
    priors: PriorSpec,
    population_norm: Vec<f64>,
    loss_norm: f64,
    scaling_norm: f64,
    sampling_norm: f64,
    scaling_exponent: f64,
    with_likelihood: bool,
}

impl JointDensity {
    pub fn new(counts: &ObservedCounts, priors: &PriorSpec, grid: &TimeGrid) -> Result<Self> {
        let t = grid.bin_count();
        if counts.len() != t || priors.bin_count() != t {
            return Err(Error::Contract(format!(
                "grid has {t} bins but counts have {} and priors {}",
                counts.len(),
                priors.bin_count()
            )));
        }
        Ok(Self {
            counts: counts.0.clone(),
            ln_count_factorial: counts.0.iter().map(|&k| ln_factorial(k)).collect(),
            elapsed: grid.elapsed_times(),
            population_norm: priors.population.iter().map(gamma_log_normalizer).collect(),
            loss_norm: gamma_log_normalizer(&priors.loss_rate),
            scaling_norm: gamma_log_normalizer(&priors.scaling_factor),
            sampling_norm: beta_log_normalizer(&priors.sampling_prob),
            priors: priors.clone(),
            scaling_exponent: 1.0,
            with_likelihood: true,
        })
    }

    /// The same model with the observation term switched off.
    pub fn prior_only(priors: &PriorSpec, grid: &TimeGrid) -> Result<Self> {
        let zeros = ObservedCounts(vec![0; grid.bin_count()]);
        let mut d = Self::new(&zeros, priors, grid)?;
        d.with_likelihood = false;
        Ok(d)
    }

    pub fn with_likelihood(&self) -> bool {
        self.with_likelihood
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    /// Number of latents (`bins + 3`).
    pub fn dim(&self) -> usize {
        self.counts.len() + 3
    }

    pub fn priors(&self) -> &PriorSpec {
        &self.priors
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn scaling_exponent(&self) -> f64 {
        self.scaling_exponent
    }

    /// Natural-space parameters at unconstrained point `u`.
    pub fn params_at(&self, u: &[f64]) -> ModelParams {
        let t = self.bin_count();
        ModelParams {
            populations: u[..t].iter().map(|&x| positive_from_log(x).value).collect(),
            loss_rate: positive_from_log(u[t]).value,
            scaling_factor: positive_from_log(u[t + 1]).value,
            scaling_exponent: self.scaling_exponent,
            sampling_prob: unit_from_logit(u[t + 2]).value,
        }
    }

    /// Log joint at `z(u)`; when `grad` is given it is overwritten with
    /// `∂/∂u`.
    pub fn log_density(&self, u: &[f64], grad: Option<&mut [f64]>) -> f64 {
        debug_assert_eq!(u.len(), self.dim());
        let t = self.bin_count();
        let b = self.scaling_exponent;
        let mut no_grad: [f64; 0] = [];
        let g: &mut [f64] = match grad {
            Some(g) => {
                g.fill(0.0);
                g
            }
            None => &mut no_grad,
        };
        let want = !g.is_empty();

        let (u_loss, u_scale, u_samp) = (u[t], u[t + 1], u[t + 2]);
        let loss = positive_from_log(u_loss).value;
        let scale = positive_from_log(u_scale).value;
        let samp = unit_from_logit(u_samp);
        let p = samp.value;
        let (ln_p, ln_1mp) = (p.ln(), (-p).ln_1p());
        // dp/du vanishes where the logistic map is clamped.
        let dp_du = if samp.clamped { 0.0 } else { p * (1.0 - p) };
        let dlnp_du = if samp.clamped { 0.0 } else { 1.0 - p };

        let lp = &self.priors.loss_rate;
        let sp = &self.priors.scaling_factor;
        let bp = &self.priors.sampling_prob;
        let mut total = self.loss_norm + (lp.shape - 1.0) * u_loss - lp.rate * loss
            + self.scaling_norm
            + (sp.shape - 1.0) * u_scale
            - sp.rate * scale
            + self.sampling_norm
            + (bp.alpha - 1.0) * ln_p
            + (bp.beta - 1.0) * ln_1mp;
        if want {
            g[t] = (lp.shape - 1.0) - lp.rate * loss;
            g[t + 1] = (sp.shape - 1.0) - sp.rate * scale;
            g[t + 2] = ((bp.alpha - 1.0) / p - (bp.beta - 1.0) / (1.0 - p)) * dp_du;
        }

        for i in 0..t {
            let u_n = u[i];
            let prior = &self.priors.population[i];
            let n = positive_from_log(u_n).value;
            total += self.population_norm[i] + (prior.shape - 1.0) * u_n - prior.rate * n;
            if want {
                g[i] = (prior.shape - 1.0) - prior.rate * n;
            }
            if !self.with_likelihood {
                continue;
            }
            let k = self.counts[i];
            let kf = k as f64;
            let ln_mu = b * (u_n - u_scale) - loss * self.elapsed[i] + ln_p;
            let mu = ln_mu.exp();
            if mu < RATE_FLOOR {
                total += kf * RATE_FLOOR.ln() - RATE_FLOOR - self.ln_count_factorial[i];
                continue;
            }
            total += kf * ln_mu - mu - self.ln_count_factorial[i];
            if want {
                let resid = kf - mu;
                g[i] += b * resid;
                g[t + 1] -= b * resid;
                g[t] -= resid * loss * self.elapsed[i];
                g[t + 2] += resid * dlnp_du;
            }
        }
        total
    }
}
