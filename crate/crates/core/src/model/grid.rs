use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform calendar-year bins over `[start_year, end_year)`, observed at
/// `observation_year`. Years are signed with BCE negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTimeGrid")]
pub struct TimeGrid {
    start_year: i64,
    end_year: i64,
    bin_width: i64,
    observation_year: i64,
}

#[derive(Deserialize)]
struct RawTimeGrid {
    start_year: i64,
    end_year: i64,
    bin_width: i64,
    observation_year: i64,
}

impl TryFrom<RawTimeGrid> for TimeGrid {
    type Error = Error;

    fn try_from(raw: RawTimeGrid) -> Result<Self> {
        TimeGrid::new(raw.start_year, raw.end_year, raw.bin_width, raw.observation_year)
    }
}

impl TimeGrid {
    pub fn new(start_year: i64, end_year: i64, bin_width: i64, observation_year: i64) -> Result<Self> {
        if end_year <= start_year {
            return Err(Error::Config(format!(
                "grid end {end_year} must be after start {start_year}"
            )));
        }
        if bin_width <= 0 || (end_year - start_year) % bin_width != 0 {
            return Err(Error::Config(format!(
                "bin width {bin_width} must be positive and divide the span {}",
                end_year - start_year
            )));
        }
        if observation_year < end_year {
            return Err(Error::Config(format!(
                "observation year {observation_year} precedes grid end {end_year}"
            )));
        }
        Ok(Self {
            start_year,
            end_year,
            bin_width,
            observation_year,
        })
    }

    /// 11,000 BCE to 1000 CE in century bins, observed in 2022.
    pub fn cyprus_default() -> Self {
        Self::new(-11_000, 1_000, 100, 2_022).expect("default grid is valid")
    }

    pub fn start_year(&self) -> i64 {
        self.start_year
    }

    pub fn end_year(&self) -> i64 {
        self.end_year
    }

    pub fn bin_width(&self) -> i64 {
        self.bin_width
    }

    pub fn observation_year(&self) -> i64 {
        self.observation_year
    }

    pub fn bin_count(&self) -> usize {
        ((self.end_year - self.start_year) / self.bin_width) as usize
    }

    /// Half-open `[lo, hi)` year bounds of bin `i`.
    pub fn bin_bounds(&self, i: usize) -> (i64, i64) {
        let lo = self.start_year + i as i64 * self.bin_width;
        (lo, lo + self.bin_width)
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        let (lo, hi) = self.bin_bounds(i);
        0.5 * (lo + hi) as f64
    }

    /// Years between the bin midpoint and observation.
    pub fn elapsed(&self, i: usize) -> f64 {
        self.observation_year as f64 - self.midpoint(i)
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.bin_count()).map(|i| self.midpoint(i)).collect()
    }

    pub fn elapsed_times(&self) -> Vec<f64> {
        (0..self.bin_count()).map(|i| self.elapsed(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = TimeGrid::cyprus_default();
        assert_eq!(g.bin_count(), 120);
        assert_eq!(g.bin_bounds(0), (-11_000, -10_900));
        assert_eq!(g.bin_bounds(119), (900, 1_000));
        assert_eq!(g.midpoint(0), -10_950.0);
        assert_eq!(g.elapsed(0), 12_972.0);
        let mids = g.midpoints();
        assert!(mids.windows(2).all(|w| w[1] > w[0]));
        assert!(g.elapsed_times().iter().all(|&d| d > 0.0));
    }

    #[test]
    fn rejects_invalid() {
        assert!(TimeGrid::new(0, 0, 10, 0).is_err());
        assert!(TimeGrid::new(0, 100, 30, 200).is_err());
        assert!(TimeGrid::new(0, 100, 0, 200).is_err());
        assert!(TimeGrid::new(0, 100, 10, 50).is_err());
    }

    #[test]
    fn deserialization_validates() {
        let bad = r#"{"start_year":0,"end_year":100,"bin_width":30,"observation_year":200}"#;
        assert!(serde_json::from_str::<TimeGrid>(bad).is_err());
        let good = r#"{"start_year":0,"end_year":100,"bin_width":25,"observation_year":200}"#;
        assert_eq!(serde_json::from_str::<TimeGrid>(good).unwrap().bin_count(), 4);
    }
}
