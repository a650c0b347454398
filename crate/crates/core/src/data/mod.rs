//! Survey records, binning into occupied-settlement counts, and synthetic
//! datasets drawn from the forward model.

mod binning;
mod records;
mod synthetic;

pub use binning::{bin_occupations, bin_occupations_with, occupies, BinningRule};
pub use records::{parse_settlements, PeriodTable, SettlementRecord};
pub use synthetic::{read_counts, simulate_dataset, write_counts, SyntheticTruth};
