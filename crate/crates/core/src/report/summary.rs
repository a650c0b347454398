use serde::{Deserialize, Serialize};

use crate::dists::{logit, normal_quantile, sigmoid, LogNormalParams};
use crate::error::{Error, Result};
use crate::infer::{logit_normal_mode, logit_normal_moments, GuideState, LocScale, PosteriorSamples, Support};
use crate::model::{JointDensity, TimeGrid};

/// Fewest draws [`summarize_samples`] accepts.
pub const MIN_SAMPLES: usize = 100;

/// Density used to draw a latent's marginal: the guide factor itself, or a
/// moment fit in unconstrained space when summarizing samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MarginalDensity {
    LogNormal { location: f64, scale: f64 },
    LogitNormal { location: f64, scale: f64 },
}

impl MarginalDensity {
    pub fn pdf(&self, x: f64) -> f64 {
        let (z, jac) = match *self {
            Self::LogNormal { location, scale } if x > 0.0 => ((x.ln() - location) / scale, x * scale),
            Self::LogitNormal { location, scale } if x > 0.0 && x < 1.0 => {
                ((logit(x) - location) / scale, x * (1.0 - x) * scale)
            }
            _ => return 0.0,
        };
        (-0.5 * z * z).exp() / (jac * (2.0 * std::f64::consts::PI).sqrt())
    }

    pub fn quantile(&self, q: f64) -> f64 {
        match *self {
            Self::LogNormal { location, scale } => (location + scale * normal_quantile(q)).exp(),
            Self::LogitNormal { location, scale } => sigmoid(location + scale * normal_quantile(q)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentSummary {
    pub name: String,
    pub units: String,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q05: f64,
    pub q25: f64,
    pub q75: f64,
    pub q95: f64,
    pub map: f64,
    pub density: MarginalDensity,
}

/// Per-bin population summary, keyed by the bin's midpoint year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub year: f64,
    pub bin_start_year: i64,
    pub bin_end_year: i64,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub map: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    /// λ, a and p, in that order.
    pub parameters: Vec<LatentSummary>,
    pub trajectory: Vec<TrajectoryRow>,
}

impl PosteriorSummary {
    pub fn parameter(&self, name: &str) -> Option<&LatentSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

const PARAMETERS: [(&str, &str); 3] = [
    ("loss_rate", "per year"),
    ("scaling_factor", "persons per settlement"),
    ("sampling_prob", "probability"),
];

fn lognormal_summary(name: &str, units: &str, ls: LocScale) -> LatentSummary {
    let p = LogNormalParams {
        location: ls.location,
        scale: ls.scale,
    };
    LatentSummary {
        name: name.into(),
        units: units.into(),
        mean: p.mean(),
        std: p.std(),
        median: p.median(),
        q05: p.quantile(0.05),
        q25: p.quantile(0.25),
        q75: p.quantile(0.75),
        q95: p.quantile(0.95),
        map: p.mode(),
        density: MarginalDensity::LogNormal {
            location: ls.location,
            scale: ls.scale,
        },
    }
}

fn logit_normal_summary(name: &str, units: &str, ls: LocScale) -> LatentSummary {
    let (mean, var) = logit_normal_moments(ls.location, ls.scale);
    let d = MarginalDensity::LogitNormal {
        location: ls.location,
        scale: ls.scale,
    };
    LatentSummary {
        name: name.into(),
        units: units.into(),
        mean,
        std: var.sqrt(),
        median: sigmoid(ls.location),
        q05: d.quantile(0.05),
        q25: d.quantile(0.25),
        q75: d.quantile(0.75),
        q95: d.quantile(0.95),
        map: logit_normal_mode(ls.location, ls.scale),
        density: d,
    }
}

/// Closed-form summaries of the fitted guide.
pub fn summarize_guide(guide: &GuideState, grid: &TimeGrid) -> Result<PosteriorSummary> {
    let t = guide.bin_count();
    if t != grid.bin_count() {
        return Err(Error::Contract(format!(
            "guide has {t} bins, grid has {}",
            grid.bin_count()
        )));
    }
    let trajectory = (0..t)
        .map(|i| {
            let s = lognormal_summary("population", "persons", guide.population(i));
            let (lo, hi) = grid.bin_bounds(i);
            TrajectoryRow {
                year: grid.midpoint(i),
                bin_start_year: lo,
                bin_end_year: hi,
                mean: s.mean,
                std: s.std,
                median: s.median,
                q25: s.q25,
                q75: s.q75,
                map: s.map,
            }
        })
        .collect();
    let parameters = vec![
        lognormal_summary(PARAMETERS[0].0, PARAMETERS[0].1, guide.loss_rate()),
        lognormal_summary(PARAMETERS[1].0, PARAMETERS[1].1, guide.scaling_factor()),
        logit_normal_summary(PARAMETERS[2].0, PARAMETERS[2].1, guide.sampling_prob()),
    ];
    Ok(PosteriorSummary { parameters, trajectory })
}

/// Linear-interpolation quantile of sorted data (the usual "type 7").
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean and sample std, summed in sorted order so that row order cannot
/// change the result.
fn sorted_moments(sorted: &[f64]) -> (f64, f64) {
    if sorted[0] == sorted[sorted.len() - 1] {
        return (sorted[0], 0.0);
    }
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let mut devs: Vec<f64> = sorted.iter().map(|x| (x - mean) * (x - mean)).collect();
    devs.sort_by(f64::total_cmp);
    (mean, (devs.iter().sum::<f64>() / (n - 1.0)).sqrt())
}

struct ColumnStats {
    mean: f64,
    std: f64,
    median: f64,
    q05: f64,
    q25: f64,
    q75: f64,
    q95: f64,
    density: MarginalDensity,
}

fn column_stats(column: &[f64], support: Support) -> ColumnStats {
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mean, std) = sorted_moments(&sorted);
    let mut unconstrained: Vec<f64> = sorted.iter().map(|&x| support.to_unconstrained(x)).collect();
    unconstrained.sort_by(f64::total_cmp);
    let (location, scale) = sorted_moments(&unconstrained);
    // A constant column has zero spread; keep the fitted density proper.
    let scale = scale.max(1e-12);
    let density = match support {
        Support::UnitInterval => MarginalDensity::LogitNormal { location, scale },
        _ => MarginalDensity::LogNormal { location, scale },
    };
    ColumnStats {
        mean,
        std,
        median: sorted_quantile(&sorted, 0.5),
        q05: sorted_quantile(&sorted, 0.05),
        q25: sorted_quantile(&sorted, 0.25),
        q75: sorted_quantile(&sorted, 0.75),
        q95: sorted_quantile(&sorted, 0.95),
        density,
    }
}

/// Empirical summaries of natural-space draws laid out `[N.., λ, a, p]`.
///
/// The MAP is the draw with the highest joint density under `density`; ties
/// go to the lexicographically smallest row, so row order never matters.
pub fn summarize_samples(
    samples: &PosteriorSamples,
    density: &JointDensity,
    grid: &TimeGrid,
) -> Result<PosteriorSummary> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let t = grid.bin_count();
    if samples.dim != t + 3 || density.dim() != samples.dim {
        return Err(Error::Contract(format!(
            "samples have {} columns; grid implies {}",
            samples.dim,
            t + 3
        )));
    }

    let mut supports = vec![Support::Positive; t + 2];
    supports.push(Support::UnitInterval);
    let mut u = vec![0.0; samples.dim];
    let mut best: Option<(f64, usize)> = None;
    for i in 0..samples.len() {
        let row = samples.row(i);
        for j in 0..samples.dim {
            u[j] = supports[j].to_unconstrained(row[j]);
        }
        let lj = density.log_density(&u, None);
        let better = match best {
            None => true,
            Some((b, k)) => {
                lj > b || (lj == b && row.iter().partial_cmp(samples.row(k).iter()) == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some((lj, i));
        }
    }
    let map_row = samples.row(best.expect("at least one sample").1);

    let stats: Vec<ColumnStats> = (0..samples.dim)
        .map(|j| column_stats(&samples.column(j), supports[j]))
        .collect();
    let trajectory = (0..t)
        .map(|i| {
            let s = &stats[i];
            let (lo, hi) = grid.bin_bounds(i);
            TrajectoryRow {
                year: grid.midpoint(i),
                bin_start_year: lo,
                bin_end_year: hi,
                mean: s.mean,
                std: s.std,
                median: s.median,
                q25: s.q25,
                q75: s.q75,
                map: map_row[i],
            }
        })
        .collect();
    let parameters = PARAMETERS
        .iter()
        .enumerate()
        .map(|(k, (name, units))| {
            let s = &stats[t + k];
            LatentSummary {
                name: (*name).into(),
                units: (*units).into(),
                mean: s.mean,
                std: s.std,
                median: s.median,
                q05: s.q05,
                q25: s.q25,
                q75: s.q75,
                q95: s.q95,
                map: map_row[t + k],
                density: s.density,
            }
        })
        .collect();
    Ok(PosteriorSummary { parameters, trajectory })
}
