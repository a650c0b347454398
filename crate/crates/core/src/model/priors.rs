use serde::{Deserialize, Serialize};

use super::grid::TimeGrid;
use crate::dists::{beta_from_mode_std, gamma_from_mode_std, BetaParams, GammaParams};
use crate::error::{Error, Result};

/// A (calendar year, population) point the prior mode curve passes through.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub year: f64,
    pub population: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeStd {
    pub mode: f64,
    pub std: f64,
}

/// User-facing prior settings, all stated as modes and standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub anchor_early: Anchor,
    pub anchor_late: Anchor,
    /// Population prior std as a multiple of its mode.
    pub population_std_ratio: f64,
    pub loss_rate: ModeStd,
    pub scaling_factor: ModeStd,
    pub sampling_prob: ModeStd,
}

impl Default for PriorConfig {
    /// The Cyprus case-study priors.
    fn default() -> Self {
        Self {
            anchor_early: Anchor {
                year: -11_000.0,
                population: 1_000.0,
            },
            anchor_late: Anchor {
                year: 1_881.0,
                population: 186_173.0,
            },
            population_std_ratio: 1.0,
            loss_rate: ModeStd { mode: 1e-4, std: 1e-4 },
            scaling_factor: ModeStd {
                mode: 150.0,
                std: 150.0,
            },
            sampling_prob: ModeStd { mode: 0.1, std: 0.1 },
        }
    }
}

/// Fully resolved prior distributions, one gamma per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub population: Vec<GammaParams>,
    pub loss_rate: GammaParams,
    pub scaling_factor: GammaParams,
    pub sampling_prob: BetaParams,
}

impl PriorSpec {
    pub fn bin_count(&self) -> usize {
        self.population.len()
    }
}

/// Exponential curve through two anchors.
pub fn prior_mode_curve(year: f64, early: Anchor, late: Anchor) -> f64 {
    let growth = (late.population / early.population).ln() / (late.year - early.year);
    early.population * (growth * (year - early.year)).exp()
}

pub fn build_priors(grid: &TimeGrid, config: &PriorConfig) -> Result<PriorSpec> {
    let (early, late) = (config.anchor_early, config.anchor_late);
    if !(early.population > 0.0 && late.population > 0.0) || early.year == late.year {
        return Err(Error::Config(
            "prior anchors need positive populations and distinct years".into(),
        ));
    }
    if !(config.population_std_ratio > 0.0) {
        return Err(Error::Config("population_std_ratio must be positive".into()));
    }
    let population = grid
        .midpoints()
        .into_iter()
        .map(|t| {
            let mode = prior_mode_curve(t, early, late);
            gamma_from_mode_std(mode, mode * config.population_std_ratio)
        })
        .collect::<Result<Vec<_>>>()?;
    let gamma = |m: ModeStd, what: &str| {
        gamma_from_mode_std(m.mode, m.std).map_err(|e| Error::Config(format!("{what} prior: {e}")))
    };
    let sampling_prob = beta_from_mode_std(config.sampling_prob.mode, config.sampling_prob.std)
        .map_err(|e| Error::Config(format!("sampling probability prior: {e}")))?;
    Ok(PriorSpec {
        population,
        loss_rate: gamma(config.loss_rate, "loss rate")?,
        scaling_factor: gamma(config.scaling_factor, "scaling factor")?,
        sampling_prob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn mode_curve_hits_anchors() {
        let c = PriorConfig::default();
        let at = |t| prior_mode_curve(t, c.anchor_early, c.anchor_late);
        assert!(rel(at(-11_000.0), 1_000.0) < 1e-14);
        assert!(rel(at(1_881.0), 186_173.0) < 1e-12);
        // mpmath: r = ln(186.173)/12881, 1000·exp(12000 r)
        assert!(rel(at(1_000.0), 130_216.206_377_898_42) < 1e-12);
        let r = (at(1.0) / at(0.0)).ln();
        assert!((r - 4.057_663_495_814_069e-4).abs() < 1e-15);
    }

    #[test]
    fn default_priors() {
        let grid = TimeGrid::cyprus_default();
        let p = build_priors(&grid, &PriorConfig::default()).unwrap();
        assert_eq!(p.bin_count(), 120);

        // First bin is centred on −10950, 50 years past the early anchor.
        let first = p.population[0];
        assert!(rel(first.mode().unwrap(), 1_020.495_524_312_454_4) < 1e-12);
        assert!(rel(first.std(), first.mode().unwrap()) < 1e-12);

        assert!(rel(p.loss_rate.shape, 2.618_033_988_749_895) < 1e-12);
        assert!(rel(p.loss_rate.rate, 16_180.339_887_498_954) < 1e-12);
        assert!(rel(p.sampling_prob.alpha, 2.065_699_175_384_084_5) < 1e-9);
        assert!(rel(p.sampling_prob.beta, 10.591_292_578_456_76) < 1e-9);
    }

    #[test]
    fn population_at_early_anchor_when_bin_starts_there() {
        // A bin centred exactly on the anchor year reproduces the anchor mode.
        let grid = TimeGrid::new(-11_050, -10_950, 100, 2_022).unwrap();
        let p = build_priors(&grid, &PriorConfig::default()).unwrap();
        let g = p.population[0];
        assert!(rel(g.mode().unwrap(), 1_000.0) < 1e-12);
        assert!(rel(g.std(), 1_000.0) < 1e-9);
    }

    #[test]
    fn infeasible_beta_is_a_config_error() {
        let mut c = PriorConfig::default();
        c.sampling_prob = ModeStd { mode: 0.3, std: 0.45 };
        let err = build_priors(&TimeGrid::cyprus_default(), &c).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }
}
