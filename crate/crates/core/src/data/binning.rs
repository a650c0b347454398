use serde::{Deserialize, Serialize};

use super::records::SettlementRecord;
use crate::model::{ObservedCounts, TimeGrid};

/// When a record counts as occupying a bin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinningRule {
    /// Overlap of at least half the bin width, or the whole span inside the
    /// bin.
    #[default]
    HalfOverlap,
    /// Any overlap at all.
    AnyOverlap,
}

/// Whether `record` counts in the half-open bin `[lo, hi)`.
///
/// Spans are treated as continuous intervals `[start, end]`, so a record
/// ending exactly at a bin's lower edge overlaps it by zero years.
pub fn occupies(record: &SettlementRecord, lo: i64, hi: i64, rule: BinningRule) -> bool {
    let (s, e) = (record.start_year, record.end_year);
    let inside = s >= lo && s < hi && e <= hi;
    let overlap = e.min(hi) - s.max(lo);
    match rule {
        BinningRule::HalfOverlap => inside || 2 * overlap >= hi - lo,
        BinningRule::AnyOverlap => inside || overlap > 0,
    }
}

/// Occupied-settlement counts per bin under the default rule.
pub fn bin_occupations(records: &[SettlementRecord], grid: &TimeGrid) -> ObservedCounts {
    bin_occupations_with(records, grid, BinningRule::default())
}

pub fn bin_occupations_with(records: &[SettlementRecord], grid: &TimeGrid, rule: BinningRule) -> ObservedCounts {
    ObservedCounts(
        (0..grid.bin_count())
            .map(|i| {
                let (lo, hi) = grid.bin_bounds(i);
                records.iter().filter(|r| occupies(r, lo, hi, rule)).count() as u64
            })
            .collect(),
    )
}
