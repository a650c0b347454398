//! Posterior summaries, tables and figures.
//!
//! Summaries come either from a fitted guide (closed-form log-normal moments,
//! quadrature for the logit-normal) or from sampler draws. Figures are plain
//! SVG with a fixed 800×500 viewBox; the shaded band is the interquartile
//! range.

mod export;
mod summary;
mod svg;

pub use export::{export_tables, ExportedTables, Report};
pub use summary::{
    summarize_guide, summarize_samples, LatentSummary, MarginalDensity, PosteriorSummary, TrajectoryRow, MIN_SAMPLES,
};
pub use svg::{density_curve, format_year, render_density_svg, render_trajectory_svg, DENSITY_POINTS};
