use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dists::{RngState, StreamRng};
use crate::error::{Error, Result};
use crate::model::{expected_counts, ModelParams, ObservedCounts, TimeGrid};

/// Parameters a synthetic dataset was drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub params: ModelParams,
    pub seed: u64,
}

impl SyntheticTruth {
    pub fn new(params: ModelParams, seed: u64) -> Result<Self> {
        let ok = params.populations.iter().all(|n| n.is_finite() && *n > 0.0)
            && params.loss_rate.is_finite()
            && params.loss_rate > 0.0
            && params.scaling_factor.is_finite()
            && params.scaling_factor > 0.0
            && params.scaling_exponent.is_finite()
            && params.scaling_exponent > 0.0
            && params.sampling_prob > 0.0
            && params.sampling_prob < 1.0;
        if !ok {
            return Err(Error::Domain(
                "truth needs positive finite populations, λ, a, b and p in (0, 1)".into(),
            ));
        }
        Ok(Self { params, seed })
    }
}

/// Independent Poisson counts at the model's expected rates.
pub fn simulate_dataset(truth: &SyntheticTruth, grid: &TimeGrid, rng: RngState) -> Result<ObservedCounts> {
    let rates = expected_counts(&truth.params, grid)?;
    let mut stream = StreamRng::new(rng);
    Ok(ObservedCounts(rates.iter().map(|&mu| stream.poisson(mu)).collect()))
}

const COUNTS_HEADER: [&str; 3] = ["bin_start_year", "bin_end_year", "count"];

/// Writes `bin_start_year,bin_end_year,count` rows.
pub fn write_counts<W: Write>(counts: &ObservedCounts, grid: &TimeGrid, writer: W) -> Result<()> {
    if counts.len() != grid.bin_count() {
        return Err(Error::Contract(format!(
            "{} counts for a {}-bin grid",
            counts.len(),
            grid.bin_count()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COUNTS_HEADER)?;
    for (i, k) in counts.0.iter().enumerate() {
        let (lo, hi) = grid.bin_bounds(i);
        w.write_record([lo.to_string(), hi.to_string(), k.to_string()])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Reads counts written by [`write_counts`], checking the bins against `grid`.
pub fn read_counts<R: Read>(reader: R, grid: &TimeGrid) -> Result<ObservedCounts> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    if rdr.headers()?.iter().ne(COUNTS_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", COUNTS_HEADER.join(",")),
        });
    }
    let mut counts = Vec::with_capacity(grid.bin_count());
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |j: usize| Error::Parse {
            line,
            message: format!(
                "{} `{}` is not a valid value",
                COUNTS_HEADER[j],
                row.get(j).unwrap_or("")
            ),
        };
        let lo: i64 = row.get(0).unwrap_or("").parse().map_err(|_| bad(0))?;
        let hi: i64 = row.get(1).unwrap_or("").parse().map_err(|_| bad(1))?;
        let k: u64 = row.get(2).unwrap_or("").parse().map_err(|_| bad(2))?;
        let i = counts.len();
        if i >= grid.bin_count() || grid.bin_bounds(i) != (lo, hi) {
            return Err(Error::Parse {
                line,
                message: format!("bin {lo}..{hi} does not match the configured grid"),
            });
        }
        counts.push(k);
    }
    if counts.len() != grid.bin_count() {
        return Err(Error::Parse {
            line: counts.len() as u64 + 1,
            message: format!("{} bins present, grid has {}", counts.len(), grid.bin_count()),
        });
    }
    Ok(ObservedCounts(counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dists::GammaParams;
    use crate::model::{build_priors, log_likelihood, PriorConfig};
    use rand_distr::{Beta, Distribution, Gamma};

    fn cyprus_truth(p: f64) -> SyntheticTruth {
        let grid = TimeGrid::cyprus_default();
        let priors = build_priors(&grid, &PriorConfig::default()).unwrap();
        SyntheticTruth::new(
            ModelParams {
                populations: priors.population.iter().map(|g| g.mode().unwrap()).collect(),
                loss_rate: 0.00065,
                scaling_factor: 25.78,
                scaling_exponent: 1.0,
                sampling_prob: p,
            },
            0,
        )
        .unwrap()
    }

    #[test]
    fn vanishing_sampling_gives_zeros() {
        let c = simulate_dataset(&cyprus_truth(1e-12), &TimeGrid::cyprus_default(), RngState::new(1, 0)).unwrap();
        assert!(c.0.iter().all(|&k| k == 0));
    }

    #[test]
    fn deterministic() {
        let g = TimeGrid::cyprus_default();
        let t = cyprus_truth(0.01);
        assert_eq!(
            simulate_dataset(&t, &g, RngState::new(4, 0)).unwrap(),
            simulate_dataset(&t, &g, RngState::new(4, 0)).unwrap()
        );
    }

    #[test]
    fn replicate_means_match_rates() {
        let g = TimeGrid::new(-1_000, 1_000, 400, 2_022).unwrap();
        let truth = SyntheticTruth::new(
            ModelParams {
                populations: vec![2e4, 5e4, 3e4, 1e5, 2e5],
                loss_rate: 6.5e-4,
                scaling_factor: 25.78,
                scaling_exponent: 1.0,
                sampling_prob: 0.01,
            },
            0,
        )
        .unwrap();
        let mu = expected_counts(&truth.params, &g).unwrap();
        let reps = 10_000;
        let mut sums = vec![0.0; 5];
        for r in 0..reps {
            let c = simulate_dataset(&truth, &g, RngState::new(9, r)).unwrap();
            for (s, k) in sums.iter_mut().zip(&c.0) {
                *s += *k as f64;
            }
        }
        for (i, s) in sums.iter().enumerate() {
            let mean = s / reps as f64;
            let se = (mu[i] / reps as f64).sqrt();
            assert!((mean - mu[i]).abs() < 3.0 * se, "bin {i}: {mean} vs {}", mu[i]);
        }
    }

    #[test]
    fn truth_beats_prior_draws() {
        let grid = TimeGrid::cyprus_default();
        let priors = build_priors(&grid, &PriorConfig::default()).unwrap();
        let truth = cyprus_truth(0.01);
        let counts = simulate_dataset(&truth, &grid, RngState::new(2, 0)).unwrap();
        let ll_true = log_likelihood(&truth.params, &counts, &grid).unwrap();
        let mut rng = StreamRng::new(RngState::new(2, 1));
        let draw = |g: &GammaParams, r: &mut StreamRng| Gamma::new(g.shape, 1.0 / g.rate).unwrap().sample(r.engine());
        let beta = Beta::new(priors.sampling_prob.alpha, priors.sampling_prob.beta).unwrap();
        let n = 1_000;
        let beaten = (0..n)
            .filter(|_| {
                let p = ModelParams {
                    populations: priors.population.iter().map(|g| draw(g, &mut rng)).collect(),
                    loss_rate: draw(&priors.loss_rate, &mut rng),
                    scaling_factor: draw(&priors.scaling_factor, &mut rng),
                    scaling_exponent: 1.0,
                    sampling_prob: beta.sample(rng.engine()),
                };
                log_likelihood(&p, &counts, &grid).unwrap() < ll_true
            })
            .count();
        assert!(beaten as f64 >= 0.95 * n as f64, "{beaten}/{n}");
    }

    #[test]
    fn counts_csv_round_trip() {
        let g = TimeGrid::new(-1_000, 1_000, 400, 2_022).unwrap();
        let c = ObservedCounts(vec![1, 3, 0, 9, 24]);
        let mut buf = Vec::new();
        write_counts(&c, &g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("bin_start_year,bin_end_year,count\n-1000,-600,1\n"));
        assert_eq!(read_counts(buf.as_slice(), &g).unwrap(), c);
        let other = TimeGrid::new(-1_000, 1_000, 200, 2_022).unwrap();
        assert!(read_counts(buf.as_slice(), &other).is_err());
        assert!(matches!(
            read_counts("bin_start_year,bin_end_year,count\n-1000,-600,x\n".as_bytes(), &g),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn invalid_truth_rejected() {
        let mut t = cyprus_truth(0.01).params;
        t.sampling_prob = 1.5;
        assert!(SyntheticTruth::new(t, 0).is_err());
    }
}
