//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 keystream addressed by `(seed, stream)`. ChaCha is
//! counter-based, so distinct stream ids give independent sequences without
//! any coordination, and the same `(seed, stream)` always replays the same
//! draws.

use rand::RngExt;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub stream: u64,
}

impl RngState {
    pub const fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Same seed, different stream.
    pub const fn with_stream(self, stream: u64) -> Self {
        Self {
            seed: self.seed,
            stream,
        }
    }
}

/// A live generator positioned somewhere inside one stream.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(state: RngState) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(state.seed);
        inner.set_stream(state.stream);
        Self { inner }
    }

    /// Underlying engine, for use with `rand_distr` distributions.
    pub fn engine(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Poisson draw; a non-positive or non-finite rate yields zero.
    pub fn poisson(&mut self, rate: f64) -> u64 {
        if !(rate > 0.0) || !rate.is_finite() {
            return 0;
        }
        match Poisson::new(rate) {
            Ok(dist) => {
                let k: f64 = dist.sample(&mut self.inner);
                k as u64
            }
            Err(_) => u64::MAX,
        }
    }
}

/// One standard-normal draw, advancing `rng`.
pub fn sample_standard_normal(rng: &mut StreamRng) -> f64 {
    rng.standard_normal()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_seed_first_draw() {
        let mut rng = StreamRng::new(RngState::new(42, 0));
        let first = sample_standard_normal(&mut rng);
        // Regression fixture recorded on first run.
        assert_eq!(first.to_bits(), FIRST_DRAW_SEED_42.to_bits(), "{first:?}");
    }

    const FIRST_DRAW_SEED_42: f64 = 0.477_981_238_351_021_74;

    #[test]
    fn equal_states_replay() {
        let s = RngState::new(7, 3);
        let mut a = StreamRng::new(s);
        let mut b = StreamRng::new(s);
        for _ in 0..1000 {
            assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = StreamRng::new(RngState::new(7, 0));
        let mut b = StreamRng::new(RngState::new(7, 1));
        let same = (0..100).filter(|_| a.standard_normal() == b.standard_normal()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn normal_moments() {
        let mut rng = StreamRng::new(RngState::new(2024, 0));
        let n = 1_000_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        let xs: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        for x in &xs {
            sum += x;
        }
        let mean = sum / n as f64;
        for x in &xs {
            sq += (x - mean) * (x - mean);
        }
        let var = sq / (n - 1) as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn poisson_mean() {
        let mut rng = StreamRng::new(RngState::new(5, 0));
        for rate in [0.3, 4.0657, 60.0] {
            let n = 100_000;
            let mean = (0..n).map(|_| rng.poisson(rate) as f64).sum::<f64>() / n as f64;
            assert!((mean - rate).abs() < 4.0 * (rate / n as f64).sqrt(), "{rate}: {mean}");
        }
        assert_eq!(rng.poisson(0.0), 0);
        assert_eq!(rng.poisson(-1.0), 0);
    }
}
