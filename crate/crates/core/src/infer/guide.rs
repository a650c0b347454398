//! Mean-field guide: log-normal for positive latents, logit-normal for the
//! sampling probability.

use serde::{Deserialize, Serialize};

use super::target::Support;
use crate::dists::{logit, sigmoid, LogNormalParams};
use crate::error::{Error, Result};
use crate::model::{ModelParams, PriorSpec};

/// Initial guide scale for every latent.
pub const INITIAL_SCALE: f64 = 0.5;

/// Location and scale of one latent's guide in unconstrained space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocScale {
    pub location: f64,
    pub scale: f64,
}

/// Variational parameters, laid out `[N_0 .. N_{T-1}, λ, a, p]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuideState {
    pub locations: Vec<f64>,
    pub scales: Vec<f64>,
}

impl GuideState {
    pub fn new(locations: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        if locations.len() != scales.len() {
            return Err(Error::Contract(format!(
                "{} locations but {} scales",
                locations.len(),
                scales.len()
            )));
        }
        if let Some(bad) = scales.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Domain(format!("guide scale {bad} is {}", scales[bad])));
        }
        Ok(Self { locations, scales })
    }

    /// Centred on the prior modes, scales 0.5.
    pub fn from_priors(priors: &PriorSpec) -> Self {
        let mode = |g: &crate::dists::GammaParams| g.mode().unwrap_or_else(|| g.mean());
        let mut locations: Vec<f64> = priors.population.iter().map(|g| mode(g).ln()).collect();
        locations.push(mode(&priors.loss_rate).ln());
        locations.push(mode(&priors.scaling_factor).ln());
        let p = priors
            .sampling_prob
            .mode()
            .unwrap_or_else(|| priors.sampling_prob.mean());
        locations.push(logit(p));
        let scales = vec![INITIAL_SCALE; locations.len()];
        Self { locations, scales }
    }

    pub fn dim(&self) -> usize {
        self.locations.len()
    }

    pub fn bin_count(&self) -> usize {
        self.dim() - 3
    }

    pub fn get(&self, i: usize) -> LocScale {
        LocScale {
            location: self.locations[i],
            scale: self.scales[i],
        }
    }

    pub fn population(&self, bin: usize) -> LocScale {
        self.get(bin)
    }

    pub fn loss_rate(&self) -> LocScale {
        self.get(self.bin_count())
    }

    pub fn scaling_factor(&self) -> LocScale {
        self.get(self.bin_count() + 1)
    }

    pub fn sampling_prob(&self) -> LocScale {
        self.get(self.bin_count() + 2)
    }

    /// Support layout of the model guide.
    pub fn supports(&self) -> Vec<Support> {
        let mut s = vec![Support::Positive; self.dim() - 1];
        s.push(Support::UnitInterval);
        s
    }

    /// `[locations.., scales..]`
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.locations.clone();
        v.extend_from_slice(&self.scales);
        v
    }
}

impl LocScale {
    pub fn lognormal(&self) -> LogNormalParams {
        LogNormalParams {
            location: self.location,
            scale: self.scale,
        }
    }
}

/// Model parameters at guide noise `eps`.
pub fn sample_latents(guide: &GuideState, eps: &[f64], scaling_exponent: f64) -> Result<ModelParams> {
    if eps.len() != guide.dim() {
        return Err(Error::Contract(format!(
            "eps has {} entries, guide has {}",
            eps.len(),
            guide.dim()
        )));
    }
    let latents: Vec<f64> = guide
        .supports()
        .iter()
        .zip(guide.locations.iter().zip(&guide.scales))
        .zip(eps)
        .map(|((support, (m, s)), e)| support.forward(m + s * e).0)
        .collect();
    ModelParams::from_latents(&latents, scaling_exponent)
}

/// Per-latent guide modes.
pub fn map_estimate(guide: &GuideState, scaling_exponent: f64) -> ModelParams {
    let t = guide.bin_count();
    let mut latents: Vec<f64> = (0..t + 2).map(|i| guide.get(i).lognormal().mode()).collect();
    let p = guide.sampling_prob();
    latents.push(logit_normal_mode(p.location, p.scale));
    ModelParams::from_latents(&latents, scaling_exponent).expect("guide has at least three latents")
}

/// Mode of the logit-normal density on `(0, 1)`.
///
/// In logit space the density is proportional to
/// `exp(−(l − m)²/2s²) / (p(1 − p))`. Its stationary points satisfy
/// `(l − m)/s² = 2p − 1`, so all lie in `[m − s², m + s²]`. The density can be
/// bimodal for `s > √2`, so a grid over that interval locates the global peak
/// before golden-section refinement.
pub fn logit_normal_mode(location: f64, scale: f64) -> f64 {
    let log_density = |l: f64| {
        let z = (l - location) / scale;
        let p = sigmoid(l);
        -0.5 * z * z - p.ln() - (-p).ln_1p()
    };
    let half_width = scale * scale;
    let (lo, hi) = (location - half_width, location + half_width);
    let n = 4_000;
    let step = (hi - lo) / n as f64;
    let best = (0..=n)
        .map(|i| lo + i as f64 * step)
        .max_by(|a, b| log_density(*a).total_cmp(&log_density(*b)))
        .expect("non-empty grid");

    // Bisect on the derivative, which is positive left of the peak.
    let slope = |l: f64| -(l - location) / (scale * scale) + 2.0 * sigmoid(l) - 1.0;
    let (mut a, mut b) = (best - step, best + step);
    if slope(a) > 0.0 && slope(b) < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if slope(mid) > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
    } else {
        (a, b) = (best, best);
    }
    let p = sigmoid(0.5 * (a + b));
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

/// Mean and variance of `sigmoid(location + scale·ε)`, by trapezoidal
/// quadrature on 10⁵ intervals over `ε ∈ [−10, 10]`.
pub fn logit_normal_moments(location: f64, scale: f64) -> (f64, f64) {
    let n = 100_000;
    let h = 20.0 / n as f64;
    let (mut m1, mut m2) = (0.0, 0.0);
    for i in 0..=n {
        let e = -10.0 + i as f64 * h;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 } * h * crate::dists::log_pdf_standard_normal(e).exp();
        let p = sigmoid(location + scale * e);
        m1 += w * p;
        m2 += w * p * p;
    }
    (m1, (m2 - m1 * m1).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dists::log_pdf_lognormal;

    fn toy_guide() -> GuideState {
        GuideState::new(vec![8.0, 9.0, (1e-4f64).ln(), 5.0, -2.0], vec![0.3, 0.2, 0.5, 0.4, 0.6]).unwrap()
    }

    #[test]
    fn central_draw() {
        let g = toy_guide();
        let p = sample_latents(&g, &[0.0; 5], 1.0).unwrap();
        assert_eq!(p.populations, vec![8f64.exp(), 9f64.exp()]);
        assert_eq!(p.loss_rate, (1e-4f64).ln().exp());
        assert_eq!(p.scaling_factor, 5f64.exp());
        assert_eq!(p.sampling_prob, sigmoid(-2.0));
        assert_eq!(sample_latents(&g, &[0.0; 5], 1.0).unwrap(), p);
    }

    #[test]
    fn monotone_in_each_coordinate() {
        let g = toy_guide();
        let mut rng = crate::dists::StreamRng::new(crate::dists::RngState::new(9, 0));
        for _ in 0..100 {
            let eps: Vec<f64> = (0..5).map(|_| rng.standard_normal()).collect();
            let base = sample_latents(&g, &eps, 1.0).unwrap().to_latents();
            for j in 0..5 {
                let mut bumped = eps.clone();
                bumped[j] += 1e-3;
                let up = sample_latents(&g, &bumped, 1.0).unwrap().to_latents();
                assert!(up[j] > base[j]);
                for k in (0..5).filter(|&k| k != j) {
                    assert_eq!(up[k], base[k]);
                }
            }
        }
    }

    #[test]
    fn eps_dimension_checked() {
        assert!(sample_latents(&toy_guide(), &[0.0; 4], 1.0).is_err());
    }

    #[test]
    fn map_of_degenerate_guide() {
        let g = GuideState::new(vec![3.0, 1.0, 2.0, 0.5], vec![1e-9; 4]).unwrap();
        let m = map_estimate(&g, 1.0);
        assert!((m.populations[0] - 3f64.exp()).abs() < 1e-12);
        assert!((m.sampling_prob - sigmoid(0.5)).abs() < 1e-9);
    }

    #[test]
    fn lognormal_mode_matches_grid_search() {
        let ls = LocScale {
            location: 2.0,
            scale: 0.7,
        };
        let p = ls.lognormal();
        let mut best = (0.0, f64::NEG_INFINITY);
        let mut x = 0.01;
        while x < 20.0 {
            let v = log_pdf_lognormal(x, &p);
            if v > best.1 {
                best = (x, v);
            }
            x += 1e-6;
        }
        assert!((p.mode() - best.0).abs() < 1e-6, "{} vs {}", p.mode(), best.0);
    }

    #[test]
    fn logit_normal_mode_cases() {
        // Symmetric at location 0 with a unimodal scale.
        assert!((logit_normal_mode(0.0, 0.5) - 0.5).abs() < 1e-9);
        for (m, s) in [(-2.0, 0.3), (1.0, 1.0), (0.0, 3.0), (-40.0, 0.1), (5.0, 2.5)] {
            let mode = logit_normal_mode(m, s);
            assert!(mode > 0.0 && mode < 1.0, "({m},{s}) -> {mode}");
        }
        // Brute-force check on (0, 1).
        let (m, s) = (-2.0, 0.8);
        let dens = |p: f64| {
            let z = (logit(p) - m) / s;
            -0.5 * z * z - p.ln() - (1.0 - p).ln()
        };
        let brute = (1..1_000_000)
            .map(|i| i as f64 / 1e6)
            .max_by(|a, b| dens(*a).total_cmp(&dens(*b)))
            .unwrap();
        assert!((logit_normal_mode(m, s) - brute).abs() < 2e-6);
    }

    #[test]
    fn logit_normal_moments_by_sampling() {
        let (m, s) = (-2.0, 0.8);
        let (mean, var) = logit_normal_moments(m, s);
        let mut rng = crate::dists::StreamRng::new(crate::dists::RngState::new(4, 0));
        let n = 400_000;
        let xs: Vec<f64> = (0..n).map(|_| sigmoid(m + s * rng.standard_normal())).collect();
        let mc = xs.iter().sum::<f64>() / n as f64;
        let mc_var = xs.iter().map(|x| (x - mc).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - mc).abs() < 4.0 * (mc_var / n as f64).sqrt());
        assert!((var / mc_var - 1.0).abs() < 0.01);
        assert!((logit_normal_moments(0.0, 1.0).0 - 0.5).abs() < 1e-12);
    }
}
