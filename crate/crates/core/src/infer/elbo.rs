//! Monte Carlo ELBO and its pathwise gradient.
//!
//! With `u = m + s·ε`, `ε ~ N(0, I)` and `z = T(u)` applied per coordinate,
//! one sample contributes
//!
//! ```text
//! log p(z) + Σ ln|T'(u_i)| + Σ ln s_i − Σ ln φ(ε_i)
//! ```
//!
//! so `∂/∂m_i = g_i` and `∂/∂s_i = g_i·ε_i + 1/s_i`, where
//! `g_i = ∂ log p / ∂u_i + d ln|T'(u_i)| / du_i`.

use super::guide::GuideState;
use super::target::{LatentTarget, ModelTarget};
use crate::dists::{log_pdf_standard_normal, RngState, StreamRng};
use crate::error::{Error, Result};
use crate::model::{JointDensity, ObservedCounts, PriorSpec, TimeGrid};

/// Value substituted for a sample whose joint density is `−∞`.
pub const ELBO_SAMPLE_FLOOR: f64 = -1e300;

/// One Monte Carlo ELBO evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ElboEstimate {
    pub value: f64,
    /// `[∂/∂locations.., ∂/∂scales..]`, present when requested.
    pub gradient: Option<Vec<f64>>,
    /// Samples replaced by [`ELBO_SAMPLE_FLOOR`].
    pub floored: usize,
}

/// Draws `n_samples × dim` standard normals, sample-major.
pub fn draw_noise(dim: usize, n_samples: usize, rng: RngState) -> Vec<f64> {
    let mut stream = StreamRng::new(rng);
    (0..dim * n_samples).map(|_| stream.standard_normal()).collect()
}

/// ELBO (and optionally its gradient) with noise drawn from `rng`.
pub fn elbo_with_target<T: LatentTarget + ?Sized>(
    target: &T,
    guide: &GuideState,
    n_samples: usize,
    rng: RngState,
    want_gradient: bool,
) -> Result<ElboEstimate> {
    let dim = target.dim();
    if guide.dim() != dim {
        return Err(Error::Contract(format!(
            "guide has {} latents, target has {dim}",
            guide.dim()
        )));
    }
    if n_samples == 0 {
        return Err(Error::Contract("ELBO needs at least one sample".into()));
    }
    let noise = draw_noise(dim, n_samples, rng);
    elbo_with_noise(target, guide, &noise, want_gradient)
}

/// ELBO on explicit noise, `noise.len() = n_samples · dim`.
pub fn elbo_with_noise<T: LatentTarget + ?Sized>(
    target: &T,
    guide: &GuideState,
    noise: &[f64],
    want_gradient: bool,
) -> Result<ElboEstimate> {
    let dim = target.dim();
    let supports = target.supports();
    let n_samples = noise.len() / dim;
    let inv_s = 1.0 / n_samples as f64;
    let ln_scales: f64 = guide.scales.iter().map(|s| s.ln()).sum();

    let mut u = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut grad = if want_gradient { vec![0.0; 2 * dim] } else { Vec::new() };
    let mut value = 0.0;
    let mut floored = 0;

    for eps in noise.chunks_exact(dim) {
        for i in 0..dim {
            u[i] = guide.locations[i] + guide.scales[i] * eps[i];
        }
        let lp = if want_gradient {
            target.log_density(&u, Some(&mut g))
        } else {
            target.log_density(&u, None)
        };
        if lp == f64::NEG_INFINITY {
            floored += 1;
            value += ELBO_SAMPLE_FLOOR * inv_s;
            continue;
        }
        let mut sample = lp + ln_scales;
        for i in 0..dim {
            let (_, ln_jac, d_ln_jac) = supports[i].forward(u[i]);
            sample += ln_jac - log_pdf_standard_normal(eps[i]);
            if want_gradient {
                let gi = g[i] + d_ln_jac;
                grad[i] += gi * inv_s;
                grad[dim + i] += (gi * eps[i] + 1.0 / guide.scales[i]) * inv_s;
            }
        }
        value += sample * inv_s;
    }

    if let Some(index) = grad.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteGradient {
            index: index % dim,
            name: latent_name(index % dim, dim),
        });
    }
    Ok(ElboEstimate {
        value,
        gradient: want_gradient.then_some(grad),
        floored,
    })
}

/// Display name of latent `i` in the model layout.
pub fn latent_name(i: usize, dim: usize) -> String {
    match dim.saturating_sub(i) {
        3 => "loss_rate".into(),
        2 => "scaling_factor".into(),
        1 => "sampling_prob".into(),
        _ => format!("population[{i}]"),
    }
}

fn model_target(counts: &ObservedCounts, priors: &PriorSpec, grid: &TimeGrid) -> Result<ModelTarget> {
    Ok(ModelTarget::new(JointDensity::new(counts, priors, grid)?))
}

/// `(1/S) Σ_s [log p(z_s) − log q(z_s)]`.
pub fn elbo_estimate(
    guide: &GuideState,
    counts: &ObservedCounts,
    priors: &PriorSpec,
    grid: &TimeGrid,
    n_samples: usize,
    rng: RngState,
) -> Result<f64> {
    let target = model_target(counts, priors, grid)?;
    Ok(elbo_with_target(&target, guide, n_samples, rng, false)?.value)
}

/// Pathwise gradient `[∂/∂locations.., ∂/∂scales..]` on the same noise as
/// [`elbo_estimate`] with equal `rng`.
pub fn elbo_gradient(
    guide: &GuideState,
    counts: &ObservedCounts,
    priors: &PriorSpec,
    grid: &TimeGrid,
    n_samples: usize,
    rng: RngState,
) -> Result<Vec<f64>> {
    let target = model_target(counts, priors, grid)?;
    Ok(elbo_with_target(&target, guide, n_samples, rng, true)?
        .gradient
        .expect("gradient requested"))
}
