use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One occupation phase of one site. Multi-phase sites appear once per phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettlementRecord {
    pub site_id: String,
    pub start_year: i64,
    pub end_year: i64,
}

impl SettlementRecord {
    pub fn new(site_id: impl Into<String>, start_year: i64, end_year: i64) -> Result<Self> {
        let site_id = site_id.into();
        if end_year < start_year {
            return Err(Error::InvalidRecord {
                site_id,
                start_year,
                end_year,
            });
        }
        Ok(Self {
            site_id,
            start_year,
            end_year,
        })
    }
}

/// Reads rows of a headed CSV, checking the header and column count, and
/// yields `(line, fields)`.
fn read_rows<R: Read>(reader: R, header: &[&str]) -> Result<Vec<(u64, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
        });
    }
    let mut rows = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), row.len()),
            });
        }
        rows.push((line, row.iter().map(str::to_owned).collect()));
    }
    Ok(rows)
}

fn parse_year(field: &str, column: &str, line: u64) -> Result<i64> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{column} `{field}` is not an integer year"),
    })
}

/// Parses `site_id,start_year,end_year` rows; years are integers, BCE
/// negative.
pub fn parse_settlements<R: Read>(reader: R) -> Result<Vec<SettlementRecord>> {
    read_rows(reader, &["site_id", "start_year", "end_year"])?
        .into_iter()
        .map(|(line, f)| {
            if f[0].is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "empty site_id".into(),
                });
            }
            let start = parse_year(&f[1], "start_year", line)?;
            let end = parse_year(&f[2], "end_year", line)?;
            SettlementRecord::new(f[0].clone(), start, end)
        })
        .collect()
}

/// Maps archaeological period labels to calendar-year ranges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodTable {
    periods: BTreeMap<String, (i64, i64)>,
}

impl PeriodTable {
    /// Parses `period_label,start_year,end_year` rows.
    pub fn parse<R: Read>(reader: R) -> Result<Self> {
        let mut periods = BTreeMap::new();
        for (line, f) in read_rows(reader, &["period_label", "start_year", "end_year"])? {
            let start = parse_year(&f[1], "start_year", line)?;
            let end = parse_year(&f[2], "end_year", line)?;
            if end < start {
                return Err(Error::Parse {
                    line,
                    message: format!("period {} ends before it starts", f[0]),
                });
            }
            if periods.insert(f[0].clone(), (start, end)).is_some() {
                return Err(Error::Parse {
                    line,
                    message: format!("period {} listed twice", f[0]),
                });
            }
        }
        Ok(Self { periods })
    }

    pub fn get(&self, label: &str) -> Option<(i64, i64)> {
        self.periods.get(label).copied()
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// Converts `site_id,period_label` rows into dated records.
    pub fn resolve<R: Read>(&self, reader: R) -> Result<Vec<SettlementRecord>> {
        read_rows(reader, &["site_id", "period_label"])?
            .into_iter()
            .map(|(line, f)| {
                let (start, end) = self.get(&f[1]).ok_or_else(|| Error::Parse {
                    line,
                    message: format!("unknown period `{}`", f[1]),
                })?;
                SettlementRecord::new(f[0].clone(), start, end)
            })
            .collect()
    }
}
