use serde::{Deserialize, Serialize};

use super::summary::PosteriorSummary;
use crate::error::{Error, Result};
use crate::infer::{ElboPoint, FitDiagnostics, FitResult, SviConfig};

/// Machine-readable report: what was run and what it found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub config: SviConfig,
    pub diagnostics: FitDiagnostics,
    pub summary: PosteriorSummary,
    pub elbo_trace: Vec<ElboPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportedTables {
    pub json: String,
    /// `year,mean,map,q25,q75`
    pub trajectory_csv: String,
    /// `name,mean,std,q25,q75,map,units`
    pub parameters_csv: String,
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

impl Report {
    pub fn new(summary: &PosteriorSummary, fit: &FitResult) -> Self {
        Report {
            seed: fit.seed,
            config: fit.config,
            diagnostics: fit.diagnostics.clone(),
            summary: summary.clone(),
            elbo_trace: fit.elbo_trace.clone(),
        }
    }
}

/// Floats are written in shortest round-trip form.
pub fn export_tables(summary: &PosteriorSummary, fit: &FitResult) -> Result<ExportedTables> {
    let report = Report::new(summary, fit);
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    let trajectory_csv = csv_string(
        &["year", "mean", "map", "q25", "q75"],
        summary.trajectory.iter().map(|r| {
            vec![
                r.year.to_string(),
                r.mean.to_string(),
                r.map.to_string(),
                r.q25.to_string(),
                r.q75.to_string(),
            ]
        }),
    )?;
    let parameters_csv = csv_string(
        &["name", "mean", "std", "q25", "q75", "map", "units"],
        summary.parameters.iter().map(|p| {
            vec![
                p.name.clone(),
                p.mean.to_string(),
                p.std.to_string(),
                p.q25.to_string(),
                p.q75.to_string(),
                p.map.to_string(),
                p.units.clone(),
            ]
        }),
    )?;
    Ok(ExportedTables {
        json,
        trajectory_csv,
        parameters_csv,
    })
}
