use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::elbo::{elbo_with_target, latent_name, ELBO_SAMPLE_FLOOR};
use super::guide::GuideState;
use super::target::{LatentTarget, ModelTarget};
use crate::dists::RngState;
use crate::error::{Error, Result};
use crate::model::{JointDensity, ObservedCounts, PriorSpec, TimeGrid};

/// Consecutive non-finite iterations tolerated before giving up.
pub const DIVERGENCE_PATIENCE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SviConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub elbo_log_stride: usize,
}

impl Default for SviConfig {
    fn default() -> Self {
        Self {
            iterations: 25_000,
            learning_rate: 1e-3,
            mc_samples: 8,
            seed: 0,
            elbo_log_stride: 10,
        }
    }
}

impl SviConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.mc_samples == 0 || self.elbo_log_stride == 0 {
            return Err(Error::Config(
                "svi iterations, mc_samples and elbo_log_stride must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "svi learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElboPoint {
    pub iteration: usize,
    pub elbo: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Monte Carlo samples whose joint was `−∞`.
    pub floored_samples: u64,
    /// Iterations skipped for a non-finite ELBO or gradient.
    pub skipped_iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub guide: GuideState,
    pub elbo_trace: Vec<ElboPoint>,
    /// Not serialized, so that artifacts from equal seeds are byte-identical.
    #[serde(skip)]
    pub wall_time: Duration,
    pub seed: u64,
    pub config: SviConfig,
    pub diagnostics: FitDiagnostics,
}

/// Fits the mean-field guide to the model posterior.
pub fn fit_svi(counts: &ObservedCounts, priors: &PriorSpec, grid: &TimeGrid, config: &SviConfig) -> Result<FitResult> {
    let target = ModelTarget::new(JointDensity::new(counts, priors, grid)?);
    fit_svi_target(&target, GuideState::from_priors(priors), config)
}

/// Adam ascent on the ELBO of `target`, starting from `init`.
///
/// Scales are optimized through `ρ = ln s`, so they stay positive; the
/// gradient in `ρ` is `s·∂/∂s`. Iteration `i` draws its noise from stream `i`
/// of `config.seed`.
pub fn fit_svi_target<T: LatentTarget + ?Sized>(target: &T, init: GuideState, config: &SviConfig) -> Result<FitResult> {
    config.validate()?;
    let started = Instant::now();
    let dim = init.dim();
    let mut theta = init.locations.clone();
    theta.extend(init.scales.iter().map(|s| s.ln()));
    let mut adam = AdamState::new(
        2 * dim,
        AdamConfig {
            learning_rate: config.learning_rate,
            ..AdamConfig::default()
        },
    );
    let mut guide = init;
    let mut trace = Vec::with_capacity(config.iterations / config.elbo_log_stride);
    let mut diagnostics = FitDiagnostics::default();
    let mut streak = 0;

    for it in 0..config.iterations {
        let rng = RngState::new(config.seed, it as u64);
        let step = elbo_with_target(target, &guide, config.mc_samples, rng, true);
        let mut logged = ELBO_SAMPLE_FLOOR;
        match step {
            Ok(est) if est.value.is_finite() => {
                streak = 0;
                diagnostics.floored_samples += est.floored as u64;
                logged = est.value;
                let mut grad = est.gradient.expect("gradient requested");
                for i in 0..dim {
                    grad[dim + i] *= guide.scales[i];
                }
                adam_step(&mut adam, &grad, &mut theta)?;
                guide.locations.copy_from_slice(&theta[..dim]);
                for i in 0..dim {
                    guide.scales[i] = theta[dim + i].exp();
                }
            }
            other => {
                streak += 1;
                diagnostics.skipped_iterations += 1;
                if streak >= DIVERGENCE_PATIENCE {
                    let detail = match other {
                        Err(Error::NonFiniteGradient { index, .. }) => {
                            format!("gradient of {} not finite", latent_name(index, dim))
                        }
                        Err(e) => e.to_string(),
                        Ok(est) => format!("ELBO estimate {}", est.value),
                    };
                    return Err(Error::Divergence {
                        iteration: it,
                        detail: format!("{DIVERGENCE_PATIENCE} consecutive failures; last: {detail}"),
                    });
                }
            }
        }
        if (it + 1) % config.elbo_log_stride == 0 {
            trace.push(ElboPoint {
                iteration: it + 1,
                elbo: logged,
            });
        }
    }

    Ok(FitResult {
        guide,
        elbo_trace: trace,
        wall_time: started.elapsed(),
        seed: config.seed,
        config: *config,
        diagnostics,
    })
}
