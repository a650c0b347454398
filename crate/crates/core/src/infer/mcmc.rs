//! Random-walk Metropolis in unconstrained coordinates.
//!
//! Meant as a reference for small problems (about ten bins or fewer); it is
//! far too slow to mix on the full 120-bin model. The chain targets
//! `log p(z(u)) + Σ ln|dz/du|`, so samples mapped back through the transforms
//! follow the natural-space posterior.
//!
//! With `adapt` set, the proposal is tuned during burn-in: the first half
//! rescales the per-coordinate stds toward an acceptance rate of about 0.234,
//! draws from the second quarter estimate the covariance, and the second half
//! proposes from that covariance with a tuned global scale. The proposal is
//! frozen after burn-in, so kept draws come from a proper Metropolis chain.

use serde::{Deserialize, Serialize};

use super::guide::GuideState;
use super::target::{LatentTarget, ModelTarget};
use crate::dists::{RngState, StreamRng};
use crate::error::{Error, Result};
use crate::model::{JointDensity, ObservedCounts, PriorSpec, TimeGrid};

/// Acceptance rates outside this band trigger a warning.
pub const ACCEPTANCE_BAND: (f64, f64) = (0.05, 0.7);

const ADAPT_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcConfig {
    /// Total iterations, burn-in included.
    pub n_samples: usize,
    pub burn_in: usize,
    /// Keep every `thin`-th post-burn-in state.
    #[serde(default = "one")]
    pub thin: usize,
    /// Initial random-walk std per latent, in unconstrained space.
    pub proposal_std: Vec<f64>,
    #[serde(default)]
    pub adapt: bool,
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl McmcConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.n_samples <= self.burn_in {
            return Err(Error::Config(format!(
                "mcmc n_samples ({}) must exceed burn_in ({})",
                self.n_samples, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("mcmc thin must be positive".into()));
        }
        if self.proposal_std.len() != dim {
            return Err(Error::Config(format!(
                "mcmc proposal_std has {} entries, model has {dim} latents",
                self.proposal_std.len()
            )));
        }
        if let Some(bad) = self.proposal_std.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::Config(format!("mcmc proposal_std must be positive, got {bad}")));
        }
        Ok(())
    }
}

/// Draws stored row-major, one row per kept state, in natural space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl PosteriorSamples {
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().skip(j).step_by(self.dim).copied().collect()
    }

    pub fn mean(&self, j: usize) -> f64 {
        let n = self.len() as f64;
        self.values.iter().skip(j).step_by(self.dim).sum::<f64>() / n
    }

    pub fn std(&self, j: usize) -> f64 {
        let m = self.mean(j);
        let n = self.len() as f64;
        let ss: f64 = self
            .values
            .iter()
            .skip(j)
            .step_by(self.dim)
            .map(|x| (x - m) * (x - m))
            .sum();
        (ss / (n - 1.0)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcResult {
    pub samples: PosteriorSamples,
    /// Over post-burn-in iterations.
    pub acceptance_rate: f64,
    pub warning: Option<String>,
}

/// Metropolis chain on the model posterior, started at the prior modes.
pub fn mh_sample(
    counts: &ObservedCounts,
    priors: &PriorSpec,
    grid: &TimeGrid,
    config: &McmcConfig,
) -> Result<McmcResult> {
    let target = ModelTarget::new(JointDensity::new(counts, priors, grid)?);
    let start = GuideState::from_priors(priors).locations;
    mh_sample_target(&target, &start, config)
}

pub fn mh_sample_target<T: LatentTarget + ?Sized>(
    target: &T,
    start: &[f64],
    config: &McmcConfig,
) -> Result<McmcResult> {
    let dim = target.dim();
    config.validate(dim)?;
    if start.len() != dim {
        return Err(Error::Contract(format!(
            "start point has {} coordinates, target has {dim}",
            start.len()
        )));
    }
    let supports = target.supports();
    let log_target = |u: &[f64]| {
        let lp = target.log_density(u, None);
        if lp.is_nan() {
            return f64::NEG_INFINITY;
        }
        lp + supports.iter().zip(u).map(|(s, &x)| s.forward(x).1).sum::<f64>()
    };

    let mut rng = StreamRng::new(RngState::new(config.seed, 0));
    let mut u = start.to_vec();
    let mut current = log_target(&u);
    if current == f64::NEG_INFINITY {
        return Err(Error::Domain("chain start has zero posterior density".into()));
    }
    let mut proposal = vec![0.0; dim];
    let mut z = vec![0.0; dim];
    let mut stds = config.proposal_std.clone();
    let mut chol: Option<Vec<f64>> = None;
    let mut log_factor = 0.0;
    let target_rate = if dim == 1 { 0.44 } else { 0.234 };
    let mut window_accepts = 0;
    let mut moments = Moments::new(dim);

    let kept = (config.n_samples - config.burn_in).div_ceil(config.thin);
    let mut values = Vec::with_capacity(kept * dim);
    let mut accepted = 0usize;

    for it in 0..config.n_samples {
        for zi in z.iter_mut() {
            *zi = rng.standard_normal();
        }
        let factor = f64::exp(log_factor);
        match &chol {
            Some(l) => {
                for i in 0..dim {
                    let step: f64 = (0..=i).map(|j| l[i * dim + j] * z[j]).sum();
                    proposal[i] = u[i] + factor * step;
                }
            }
            None => {
                for i in 0..dim {
                    proposal[i] = u[i] + factor * stds[i] * z[i];
                }
            }
        }
        let candidate = log_target(&proposal);
        let accept = candidate > f64::NEG_INFINITY && rng.uniform().ln() < candidate - current;
        if accept {
            u.copy_from_slice(&proposal);
            current = candidate;
        }

        if it < config.burn_in {
            if !config.adapt {
                continue;
            }
            window_accepts += accept as usize;
            if (it + 1) % ADAPT_WINDOW == 0 {
                let rate = window_accepts as f64 / ADAPT_WINDOW as f64;
                log_factor += rate - target_rate;
                window_accepts = 0;
            }
            let (quarter, half) = (config.burn_in / 4, config.burn_in / 2);
            if it >= quarter && it < half {
                moments.push(&u);
            }
            if it + 1 == half && moments.count > 2 * dim {
                let cov = moments.covariance();
                let scale = 2.38 * 2.38 / dim as f64;
                let scaled: Vec<f64> = cov.iter().map(|c| c * scale).collect();
                match cholesky(&scaled, dim) {
                    Some(l) => chol = Some(l),
                    None => {
                        for i in 0..dim {
                            stds[i] = (scaled[i * dim + i]).sqrt().max(1e-12);
                        }
                    }
                }
                log_factor = 0.0;
            }
            continue;
        }

        accepted += accept as usize;
        if (it - config.burn_in) % config.thin == 0 {
            values.extend(supports.iter().zip(&u).map(|(s, &x)| s.forward(x).0));
        }
    }

    let acceptance_rate = accepted as f64 / (config.n_samples - config.burn_in) as f64;
    let warning = if acceptance_rate < ACCEPTANCE_BAND.0 {
        Some(format!(
            "acceptance rate {acceptance_rate:.3} is below {}; reduce proposal_std or enable adapt",
            ACCEPTANCE_BAND.0
        ))
    } else if acceptance_rate > ACCEPTANCE_BAND.1 {
        Some(format!(
            "acceptance rate {acceptance_rate:.3} is above {}; increase proposal_std or enable adapt",
            ACCEPTANCE_BAND.1
        ))
    } else {
        None
    };
    Ok(McmcResult {
        samples: PosteriorSamples { dim, values },
        acceptance_rate,
        warning,
    })
}

/// Running mean and co-moment (Welford).
struct Moments {
    count: usize,
    mean: Vec<f64>,
    comoment: Vec<f64>,
    dim: usize,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            comoment: vec![0.0; dim * dim],
            dim,
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for i in 0..self.dim {
            self.mean[i] += delta[i] / n;
        }
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.comoment[i * self.dim + j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    fn covariance(&self) -> Vec<f64> {
        let d = (self.count - 1) as f64;
        self.comoment.iter().map(|c| c / d).collect()
    }
}

/// Lower Cholesky factor of a symmetric `n × n` matrix; `None` if not
/// positive definite.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = a[i * n + i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i * n + i] = d.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    Some(l)
}
