use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::BinningRule;
use crate::error::{Error, Result};
use crate::infer::{McmcConfig, SviConfig};
use crate::model::{build_priors, ModelParams, PriorConfig, PriorSpec, TimeGrid};

/// Everything a run depends on. Written into every JSON artifact.
///
/// Precedence, lowest first: built-in defaults, the `--config` file,
/// `PALEO_SEED`, command-line flags. The top-level `seed` also becomes
/// `svi.seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: TimeGrid,
    pub priors: PriorConfig,
    pub svi: SviConfig,
    /// When set, `fit` also runs the Metropolis sampler and writes `mcmc.json`.
    pub mcmc: Option<McmcConfig>,
    pub truth: TruthConfig,
    /// Dataset read by `fit`; defaults to `<out_dir>/counts.csv`.
    pub input: Option<PathBuf>,
    pub input_format: InputFormat,
    /// Period chronology for `settlement_periods` input.
    pub periods: Option<PathBuf>,
    pub binning: BinningRule,
    pub out_dir: PathBuf,
    pub band: Band,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            grid: TimeGrid::cyprus_default(),
            priors: PriorConfig::default(),
            svi: SviConfig::default(),
            mcmc: None,
            truth: TruthConfig::default(),
            input: None,
            input_format: InputFormat::Counts,
            periods: None,
            binning: BinningRule::default(),
            out_dir: PathBuf::from("out"),
            band: Band::Iqr,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    /// `bin_start_year,bin_end_year,count`, as written by `simulate`.
    #[default]
    Counts,
    /// `site_id,start_year,end_year` occupation records.
    Settlements,
    /// `site_id,period_label` rows resolved through `periods`.
    SettlementPeriods,
}

/// Uncertainty band drawn around the trajectory. Only the interquartile
/// range exists so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    #[default]
    Iqr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationCurve {
    PriorMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PopulationTruth {
    Curve(PopulationCurve),
    Values(Vec<f64>),
}

/// Parameters `simulate` draws data from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruthConfig {
    pub populations: PopulationTruth,
    pub loss_rate: f64,
    pub scaling_factor: f64,
    pub scaling_exponent: f64,
    pub sampling_prob: f64,
}

impl Default for TruthConfig {
    fn default() -> Self {
        Self {
            populations: PopulationTruth::Curve(PopulationCurve::PriorMode),
            loss_rate: crate::verify::TRUE_LOSS_RATE,
            scaling_factor: crate::verify::TRUE_SCALING_FACTOR,
            scaling_exponent: 1.0,
            sampling_prob: crate::verify::TRUE_SAMPLING_PROB,
        }
    }
}

impl TruthConfig {
    pub fn resolve(&self, priors: &PriorSpec) -> Result<ModelParams> {
        let populations = match &self.populations {
            PopulationTruth::Curve(PopulationCurve::PriorMode) => priors
                .population
                .iter()
                .map(|g| g.mode().unwrap_or_else(|| g.mean()))
                .collect(),
            PopulationTruth::Values(v) => {
                if v.len() != priors.bin_count() {
                    return Err(Error::Config(format!(
                        "truth has {} populations, grid has {} bins",
                        v.len(),
                        priors.bin_count()
                    )));
                }
                v.clone()
            }
        };
        Ok(ModelParams {
            populations,
            loss_rate: self.loss_rate,
            scaling_factor: self.scaling_factor,
            scaling_exponent: self.scaling_exponent,
            sampling_prob: self.sampling_prob,
        })
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    pub learning_rate: Option<f64>,
    pub mc_samples: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub band: Option<Band>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Applies the documented precedence and validates the result.
    pub fn resolve(file: Option<&Path>, env_seed: Option<&str>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match file {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(s) = env_seed {
            cfg.seed = s
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("PALEO_SEED `{s}` is not an unsigned integer")))?;
        }
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(n) = overrides.iterations {
            cfg.svi.iterations = n;
        }
        if let Some(lr) = overrides.learning_rate {
            cfg.svi.learning_rate = lr;
        }
        if let Some(n) = overrides.mc_samples {
            cfg.svi.mc_samples = n;
        }
        if let Some(d) = &overrides.out_dir {
            cfg.out_dir = d.clone();
        }
        if let Some(i) = &overrides.input {
            cfg.input = Some(i.clone());
        }
        if let Some(b) = overrides.band {
            cfg.band = b;
        }
        cfg.svi.seed = cfg.seed;
        if let Some(m) = &mut cfg.mcmc {
            m.seed = cfg.seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.svi.validate()?;
        if !(self.svi.learning_rate.is_finite() && self.svi.learning_rate > 0.0) {
            return Err(Error::Config("svi.learning_rate must be positive".into()));
        }
        let priors = self.prior_spec()?;
        if let Some(m) = &self.mcmc {
            m.validate(self.grid.bin_count() + 3)?;
        }
        if let PopulationTruth::Values(_) = self.truth.populations {
            self.truth.resolve(&priors)?;
        }
        if self.input_format == InputFormat::SettlementPeriods && self.periods.is_none() {
            return Err(Error::Config("settlement_periods input needs `periods`".into()));
        }
        Ok(())
    }

    pub fn prior_spec(&self) -> Result<PriorSpec> {
        build_priors(&self.grid, &self.priors)
    }

    pub fn input_path(&self) -> PathBuf {
        self.input.clone().unwrap_or_else(|| self.out_dir.join("counts.csv"))
    }
}
