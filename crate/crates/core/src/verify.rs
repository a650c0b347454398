//! End-to-end checks of the inference engine against independent oracles.
//!
//! Each check returns a [`CheckResult`] holding the measured quantity next to
//! its threshold, so failures are reported with numbers rather than a bare
//! flag. The `paleo verify` command and the acceptance harness share them.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{simulate_dataset, SyntheticTruth};
use crate::dists::{RngState, StreamRng};
use crate::error::Result;
use crate::infer::{
    elbo_with_target, fit_svi, logit_normal_moments, mh_sample, FitResult, GuideState, McmcConfig, ModelTarget,
    SviConfig,
};
use crate::model::{build_priors, JointDensity, ModelParams, ObservedCounts, PriorConfig, PriorSpec, TimeGrid};
use crate::report::{summarize_guide, PosteriorSummary};

/// Stream used for dataset simulation, kept apart from the optimizer's
/// per-iteration streams.
pub const SIMULATION_STREAM: u64 = 1 << 63;

/// Reference truth for recovery experiments.
pub const TRUE_LOSS_RATE: f64 = 0.000_65;
pub const TRUE_SCALING_FACTOR: f64 = 25.78;
pub const TRUE_SAMPLING_PROB: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Five 400-year bins from 1000 BCE to 1000 CE with fixed counts, small
/// enough for the Metropolis oracle.
pub fn five_bin_instance() -> (TimeGrid, PriorSpec, ObservedCounts) {
    let grid = TimeGrid::new(-1_000, 1_000, 400, 2_022).expect("valid grid");
    let priors = build_priors(&grid, &PriorConfig::default()).expect("default priors");
    (grid, priors, ObservedCounts(vec![1, 3, 0, 9, 24]))
}

/// λ = 0.00065, a = 25.78, p = 0.01, b = 1, populations on the prior mode
/// curve.
pub fn reference_truth(priors: &PriorSpec) -> ModelParams {
    ModelParams {
        populations: priors
            .population
            .iter()
            .map(|g| g.mode().unwrap_or_else(|| g.mean()))
            .collect(),
        loss_rate: TRUE_LOSS_RATE,
        scaling_factor: TRUE_SCALING_FACTOR,
        scaling_exponent: 1.0,
        sampling_prob: TRUE_SAMPLING_PROB,
    }
}

/// Maximum relative error between the pathwise ELBO gradient and central
/// differences of the ELBO estimate on common noise.
///
/// Relative error is `|g − fd| / max(|g|, |fd|, 1e-6)`.
pub fn gradient_check(seed: u64) -> Result<CheckResult> {
    const THRESHOLD: f64 = 1e-4;
    const SAMPLES: usize = 64;
    const STEP: f64 = 1e-5;
    let started = Instant::now();
    let (grid, priors, counts) = five_bin_instance();
    let target = ModelTarget::new(JointDensity::new(&counts, &priors, &grid)?);
    let mut rng = StreamRng::new(RngState::new(seed, 0));
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    let guides = 8;
    for k in 0..guides {
        let mut guide = GuideState::from_priors(&priors);
        if k > 0 {
            for i in 0..guide.dim() {
                guide.locations[i] += 0.5 * rng.standard_normal();
                guide.scales[i] = 0.1 + 0.6 * rng.uniform();
            }
        }
        let noise = RngState::new(seed, 1 + k);
        let analytic = elbo_with_target(&target, &guide, SAMPLES, noise, true)?
            .gradient
            .expect("gradient requested");
        let dim = guide.dim();
        for j in 0..2 * dim {
            let eval = |delta: f64| -> Result<f64> {
                let mut g = guide.clone();
                if j < dim {
                    g.locations[j] += delta;
                } else {
                    g.scales[j - dim] += delta;
                }
                Ok(elbo_with_target(&target, &g, SAMPLES, noise, false)?.value)
            };
            let fd = (eval(STEP)? - eval(-STEP)?) / (2.0 * STEP);
            let err = (analytic[j] - fd).abs() / analytic[j].abs().max(fd.abs()).max(1e-6);
            if err > worst {
                worst = err;
                let kind = if j < dim { "location" } else { "scale" };
                worst_at = format!(
                    "guide {k}, {kind} {}: pathwise {:.6e}, fd {fd:.6e}",
                    j % dim,
                    analytic[j]
                );
            }
        }
    }
    Ok(CheckResult {
        name: "gradient".into(),
        passed: worst <= THRESHOLD,
        measured: worst,
        threshold: THRESHOLD,
        detail: format!("{guides} guides, S = {SAMPLES}, h = {STEP}; worst at {worst_at}"),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Natural-space posterior means of the guide, laid out `[N.., λ, a, p]`.
pub fn guide_means(guide: &GuideState) -> Vec<f64> {
    (0..guide.dim())
        .map(|i| {
            let ls = guide.get(i);
            if i + 1 == guide.dim() {
                logit_normal_moments(ls.location, ls.scale).0
            } else {
                ls.lognormal().mean()
            }
        })
        .collect()
}

/// Metropolis settings for the five-bin oracle: 2.2 × 10⁶ iterations, the
/// first 2 × 10⁵ adaptive burn-in, every fifth state kept.
pub fn oracle_mcmc_config(seed: u64, dim: usize) -> McmcConfig {
    McmcConfig {
        n_samples: 2_200_000,
        burn_in: 200_000,
        thin: 5,
        proposal_std: vec![0.3; dim],
        adapt: true,
        seed,
    }
}

/// SVI against Metropolis on the five-bin instance: the largest
/// `|mean_svi − mean_mcmc| / std_mcmc` over latents.
pub fn oracle_check(seed: u64) -> Result<CheckResult> {
    const THRESHOLD: f64 = 0.5;
    let started = Instant::now();
    let (grid, priors, counts) = five_bin_instance();
    let fit = fit_svi(
        &counts,
        &priors,
        &grid,
        &SviConfig {
            seed,
            ..SviConfig::default()
        },
    )?;
    let cfg = oracle_mcmc_config(seed, grid.bin_count() + 3);
    let chain = mh_sample(&counts, &priors, &grid, &cfg)?;
    let svi = guide_means(&fit.guide);
    let names = latent_names(grid.bin_count());
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let (m, s) = (chain.samples.mean(j), chain.samples.std(j));
        let z = (svi[j] - m).abs() / s;
        worst = worst.max(z);
        parts.push(format!("{name} {z:.3}"));
    }
    let mut detail = format!(
        "{} post-burn-in iterations, {} kept, acceptance {:.3}; |Δmean|/std: {}",
        cfg.n_samples - cfg.burn_in,
        chain.samples.len(),
        chain.acceptance_rate,
        parts.join(", ")
    );
    if let Some(w) = &chain.warning {
        detail.push_str(&format!("; sampler warning: {w}"));
    }
    Ok(CheckResult {
        name: "svi_vs_mcmc".into(),
        passed: worst <= THRESHOLD && chain.warning.is_none(),
        measured: worst,
        threshold: THRESHOLD,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    })
}

pub fn latent_names(bins: usize) -> Vec<String> {
    let mut v: Vec<String> = (0..bins).map(|i| format!("population[{i}]")).collect();
    v.extend(["loss_rate", "scaling_factor", "sampling_prob"].map(String::from));
    v
}

/// Simulates a dataset from `truth` and fits it with `config`.
pub fn simulate_and_fit(
    truth: &ModelParams,
    priors: &PriorSpec,
    grid: &TimeGrid,
    config: &SviConfig,
) -> Result<(ObservedCounts, FitResult)> {
    let truth = SyntheticTruth::new(truth.clone(), config.seed)?;
    let counts = simulate_dataset(&truth, grid, RngState::new(config.seed, SIMULATION_STREAM))?;
    let fit = fit_svi(&counts, priors, grid, config)?;
    Ok((counts, fit))
}

/// Runs `job` for each of `n` indices on scoped threads and returns the
/// results in index order.
fn parallel_map<T: Send>(n: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |p| p.get())
        .min(n.max(1));
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<_> = slots
            .chunks_mut(n.div_ceil(workers).max(1))
            .enumerate()
            .map(|(c, chunk)| {
                let job = &job;
                let base = c * n.div_ceil(workers).max(1);
                scope.spawn(move || {
                    for (k, slot) in chunk.iter_mut().enumerate() {
                        *slot = Some(job(base + k));
                    }
                })
            })
            .collect();
        for h in chunks {
            h.join().expect("worker panicked");
        }
    });
    slots.into_iter().map(|s| s.expect("filled")).collect()
}

/// Fraction of (replicate × latent) pairs whose central 90% guide interval
/// contains the truth, over `replicates` datasets drawn from the reference
/// truth on the default grid.
pub fn coverage_check(seed: u64, replicates: usize) -> Result<CheckResult> {
    let (lo, hi) = (0.6, 1.0);
    let started = Instant::now();
    let grid = TimeGrid::cyprus_default();
    let priors = build_priors(&grid, &PriorConfig::default())?;
    let truth = reference_truth(&priors);
    let z = truth.to_latents();
    let t = grid.bin_count();
    let results = parallel_map(replicates, |r| {
        let cfg = SviConfig {
            seed: seed.wrapping_add(r as u64),
            ..SviConfig::default()
        };
        simulate_and_fit(&truth, &priors, &grid, &cfg).map(|(_, fit)| {
            let s = summarize_guide(&fit.guide, &grid).expect("grid matches");
            let mut hits = vec![false; t + 3];
            for i in 0..t {
                let g = fit.guide.population(i).lognormal();
                hits[i] = (g.quantile(0.05)..=g.quantile(0.95)).contains(&z[i]);
            }
            for (k, p) in s.parameters.iter().enumerate() {
                hits[t + k] = (p.q05..=p.q95).contains(&z[t + k]);
            }
            hits
        })
    });
    let mut inside = 0usize;
    let mut by_group = [0usize; 4];
    for hits in &results {
        let hits = hits.as_ref().map_err(|e| crate::Error::Contract(e.to_string()))?;
        inside += hits.iter().filter(|h| **h).count();
        by_group[0] += hits[..t].iter().filter(|h| **h).count();
        for k in 0..3 {
            by_group[k + 1] += hits[t + k] as usize;
        }
    }
    let total = replicates * (t + 3);
    let frac = inside as f64 / total as f64;
    Ok(CheckResult {
        name: "coverage".into(),
        passed: (lo..=hi).contains(&frac),
        measured: frac,
        threshold: lo,
        detail: format!(
            "{inside}/{total} pairs inside; populations {:.3}, loss_rate {}/{replicates}, scaling_factor {}/{replicates}, sampling_prob {}/{replicates}; accepted band [{lo}, {hi}]",
            by_group[0] as f64 / (replicates * t) as f64,
            by_group[1],
            by_group[2],
            by_group[3]
        ),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// One recovery fit: the summary and whether each of λ, a, p passed.
#[derive(Debug, Clone)]
pub struct RecoveryRun {
    pub seed: u64,
    pub summary: PosteriorSummary,
    pub seconds: f64,
    /// λ, a, p: mean inside its own q05–q95 and within a factor of 3 of truth.
    pub recovered: [bool; 3],
}

pub fn recovery_runs(seeds: &[u64]) -> Result<Vec<RecoveryRun>> {
    let grid = TimeGrid::cyprus_default();
    let priors = build_priors(&grid, &PriorConfig::default())?;
    let truth = reference_truth(&priors);
    let truths = [TRUE_LOSS_RATE, TRUE_SCALING_FACTOR, TRUE_SAMPLING_PROB];
    parallel_map(seeds.len(), |k| {
        let cfg = SviConfig {
            seed: seeds[k],
            ..SviConfig::default()
        };
        let (_, fit) = simulate_and_fit(&truth, &priors, &grid, &cfg)?;
        let summary = summarize_guide(&fit.guide, &grid)?;
        let mut recovered = [false; 3];
        for (j, p) in summary.parameters.iter().enumerate() {
            let ratio = p.mean / truths[j];
            recovered[j] = (p.q05..=p.q95).contains(&p.mean) && (1.0 / 3.0..=3.0).contains(&ratio);
        }
        Ok(RecoveryRun {
            seed: seeds[k],
            summary,
            seconds: fit.wall_time.as_secs_f64(),
            recovered,
        })
    })
    .into_iter()
    .collect()
}

/// The `paleo verify` suite. `quick` runs the gradient check alone.
pub fn run_verify(seed: u64, quick: bool) -> Result<VerifyReport> {
    let mut checks = vec![gradient_check(seed)?];
    if !quick {
        checks.push(oracle_check(seed)?);
        checks.push(coverage_check(seed, 20)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { seed, checks, passed })
}
