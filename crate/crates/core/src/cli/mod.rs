//! The `paleo` command line: `simulate`, `fit`, `report` and `verify`.
//!
//! Every JSON artifact carries the resolved [`RunConfig`] under `run_config`.
//! Exit codes: 0 success, 2 input or configuration error, 3 divergence,
//! 4 failed verification.

mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use config::{Band, InputFormat, Overrides, PopulationCurve, PopulationTruth, RunConfig, TruthConfig};

use crate::data::{
    bin_occupations_with, parse_settlements, read_counts, simulate_dataset, write_counts, PeriodTable, SyntheticTruth,
};
use crate::dists::RngState;
use crate::error::{Error, Result};
use crate::infer::{fit_svi, mh_sample, FitResult, McmcConfig};
use crate::model::{expected_counts, JointDensity, ObservedCounts};
use crate::report::{export_tables, render_density_svg, render_trajectory_svg, PosteriorSummary, Report};
use crate::verify::{run_verify, VerifyReport, SIMULATION_STREAM};

#[derive(Debug, Parser)]
#[command(name = "paleo", version, about = "Population trajectories from settlement counts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic counts dataset from the configured truth.
    Simulate(CommonArgs),
    /// Fit the model to a dataset and write posterior summaries.
    Fit(CommonArgs),
    /// Render SVG figures from the fit summaries.
    Report(CommonArgs),
    /// Run the gradient, oracle and coverage checks.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration. Omitted fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config file and PALEO_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub band: Option<Band>,
    /// verify: gradient checks only.
    #[arg(long)]
    pub quick: bool,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            iterations: self.iterations,
            learning_rate: self.learning_rate,
            mc_samples: self.mc_samples,
            out_dir: self.out_dir.clone(),
            input: self.input.clone(),
            band: self.band,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TruthArtifact {
    pub run_config: RunConfig,
    pub truth: SyntheticTruth,
    pub expected_counts: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitArtifact {
    pub run_config: RunConfig,
    pub fit: FitResult,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SummaryArtifact {
    pub run_config: RunConfig,
    pub report: Report,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct McmcArtifact {
    pub run_config: RunConfig,
    pub config: McmcConfig,
    pub acceptance_rate: f64,
    pub warning: Option<String>,
    pub kept_samples: usize,
    pub summary: PosteriorSummary,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerifyArtifact {
    pub run_config: RunConfig,
    pub report: VerifyReport,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_file(path, artifact_json(value)?.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn prepare_out_dir(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))
}

/// Writes `counts.csv` and `truth.json`. Returns the files written.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let priors = cfg.prior_spec()?;
    let truth = SyntheticTruth::new(cfg.truth.resolve(&priors)?, cfg.seed)?;
    let counts = simulate_dataset(&truth, &cfg.grid, RngState::new(cfg.seed, SIMULATION_STREAM))?;
    let mut csv = Vec::new();
    write_counts(&counts, &cfg.grid, &mut csv)?;
    let artifact = TruthArtifact {
        run_config: cfg.clone(),
        expected_counts: expected_counts(&truth.params, &cfg.grid)?,
        truth,
    };
    prepare_out_dir(cfg)?;
    let counts_path = cfg.out_dir.join("counts.csv");
    let truth_path = cfg.out_dir.join("truth.json");
    write_file(&counts_path, &csv)?;
    write_json(&truth_path, &artifact)?;
    Ok(vec![counts_path, truth_path])
}

/// Loads the configured dataset in any of the supported input formats.
pub fn load_counts(cfg: &RunConfig) -> Result<ObservedCounts> {
    let path = cfg.input_path();
    let file = open(&path)?;
    let located = |e: Error| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    };
    match cfg.input_format {
        InputFormat::Counts => read_counts(file, &cfg.grid).map_err(located),
        InputFormat::Settlements => {
            let records = parse_settlements(file).map_err(located)?;
            Ok(bin_occupations_with(&records, &cfg.grid, cfg.binning))
        }
        InputFormat::SettlementPeriods => {
            let table_path = cfg.periods.as_deref().expect("validated");
            let table = PeriodTable::parse(open(table_path)?)?;
            let records = table.resolve(file).map_err(located)?;
            Ok(bin_occupations_with(&records, &cfg.grid, cfg.binning))
        }
    }
}

/// Writes `fit.json`, `summary.json`, `trajectory.csv`, `parameters.csv`,
/// `elbo.csv` and, with an `mcmc` section, `mcmc.json`. Nothing is written
/// unless the input parses and the fit converges.
pub fn cmd_fit(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let counts = load_counts(cfg)?;
    let priors = cfg.prior_spec()?;
    let fit = fit_svi(&counts, &priors, &cfg.grid, &cfg.svi)?;
    let summary = crate::report::summarize_guide(&fit.guide, &cfg.grid)?;
    let tables = export_tables(&summary, &fit)?;
    let mut elbo = csv::Writer::from_writer(Vec::new());
    elbo.write_record(["iteration", "elbo"])?;
    for p in &fit.elbo_trace {
        elbo.write_record([p.iteration.to_string(), p.elbo.to_string()])?;
    }
    let elbo = elbo.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    let mcmc = match &cfg.mcmc {
        Some(m) => {
            let chain = mh_sample(&counts, &priors, &cfg.grid, m)?;
            let density = JointDensity::new(&counts, &priors, &cfg.grid)?;
            Some(McmcArtifact {
                run_config: cfg.clone(),
                config: m.clone(),
                acceptance_rate: chain.acceptance_rate,
                warning: chain.warning.clone(),
                kept_samples: chain.samples.len(),
                summary: crate::report::summarize_samples(&chain.samples, &density, &cfg.grid)?,
            })
        }
        None => None,
    };

    prepare_out_dir(cfg)?;
    let dir = &cfg.out_dir;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
        let p = dir.join(name);
        write_file(&p, bytes)?;
        written.push(p);
        Ok(())
    };
    let fit_json = artifact_json(&FitArtifact {
        run_config: cfg.clone(),
        fit: fit.clone(),
    })?;
    put("fit.json", fit_json.as_bytes())?;
    let summary_json = artifact_json(&SummaryArtifact {
        run_config: cfg.clone(),
        report: Report::new(&summary, &fit),
    })?;
    put("summary.json", summary_json.as_bytes())?;
    put("trajectory.csv", tables.trajectory_csv.as_bytes())?;
    put("parameters.csv", tables.parameters_csv.as_bytes())?;
    put("elbo.csv", &elbo)?;
    if let Some(m) = &mcmc {
        put("mcmc.json", artifact_json(m)?.as_bytes())?;
    }
    Ok(written)
}

fn artifact_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Reads `summary.json` from the output directory and writes
/// `trajectory.svg` and `densities.svg`.
pub fn cmd_report(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let artifact: SummaryArtifact = read_json(&cfg.out_dir.join("summary.json"))?;
    let summary = &artifact.report.summary;
    // The grid comes from the fit that produced the summary.
    let trajectory = render_trajectory_svg(summary, &artifact.run_config.grid)?;
    let densities = render_density_svg(&summary.parameters);
    let t = cfg.out_dir.join("trajectory.svg");
    let d = cfg.out_dir.join("densities.svg");
    write_file(&t, trajectory.as_bytes())?;
    write_file(&d, densities.as_bytes())?;
    Ok(vec![t, d])
}

/// Writes `verify.json`; fails with [`Error::VerificationFailed`] naming the
/// failing checks after the report is on disk.
pub fn cmd_verify(cfg: &RunConfig, quick: bool) -> Result<Vec<PathBuf>> {
    let report = run_verify(cfg.seed, quick)?;
    prepare_out_dir(cfg)?;
    let path = cfg.out_dir.join("verify.json");
    let failed: Vec<String> = report.failed_checks().into_iter().map(String::from).collect();
    for c in &report.checks {
        eprintln!(
            "{} {}: measured {:.4e}, threshold {:.4e} ({:.1} s)",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.threshold,
            c.seconds
        );
    }
    write_json(
        &path,
        &VerifyArtifact {
            run_config: cfg.clone(),
            report,
        },
    )?;
    if failed.is_empty() {
        Ok(vec![path])
    } else {
        Err(Error::VerificationFailed { failed })
    }
}

pub fn execute(command: &Command, env_seed: Option<&str>) -> Result<Vec<PathBuf>> {
    let (args, run): (&CommonArgs, fn(&RunConfig, bool) -> Result<Vec<PathBuf>>) = match command {
        Command::Simulate(a) => (a, |c, _| cmd_simulate(c)),
        Command::Fit(a) => (a, |c, _| cmd_fit(c)),
        Command::Report(a) => (a, |c, _| cmd_report(c)),
        Command::Verify(a) => (a, cmd_verify),
    };
    let cfg = RunConfig::resolve(args.config.as_deref(), env_seed, &args.overrides())?;
    run(&cfg, args.quick)
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let env_seed = std::env::var("PALEO_SEED").ok();
    match execute(&cli.command, env_seed.as_deref()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("paleo: {e}");
            e.exit_code()
        }
    }
}
