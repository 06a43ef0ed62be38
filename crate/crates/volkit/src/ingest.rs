//! Loading daily volatility proxies from CSV.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use roughvol::scaling::{Units, VolSeries};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    /// Wide realized-library export: an ISO date first column and one
    /// `<ASSET>.<estimator>` column per series.
    OxfordManCsv,
    /// `date,value`.
    GenericCsv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub format: DataFormat,
    /// Column key such as `SPX2.rv`; required for the wide format.
    pub asset: Option<String>,
    pub units: Units,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
}

impl DatasetSpec {
    pub fn generic(path: impl Into<PathBuf>, units: Units) -> Self {
        Self {
            path: path.into(),
            format: DataFormat::GenericCsv,
            asset: None,
            units,
            from: None,
            to: None,
        }
    }

    pub fn oxford_man(path: impl Into<PathBuf>, asset: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            format: DataFormat::OxfordManCsv,
            asset: Some(asset.into()),
            units: Units::Var,
            from: None,
            to: None,
        }
    }

    fn label(&self) -> String {
        self.asset.clone().unwrap_or_else(|| {
            self.path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "series".into())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Missing,
    NonPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedRow {
    pub line: u64,
    pub date: NaiveDate,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ingested {
    pub series: VolSeries<f64>,
    pub dropped: Vec<DroppedRow>,
}

const MISSING: [&str; 5] = ["", "na", "nan", "null", "n/a"];

fn parse_date(field: &str, line: u64) -> Result<NaiveDate> {
    // realized-library dates carry a time and offset after the ISO date
    let head = field.get(..10).unwrap_or(field);
    NaiveDate::parse_from_str(head, "%Y-%m-%d").map_err(|e| Error::Parse {
        line,
        message: format!("bad date {field:?}: {e}"),
    })
}

pub fn ingest(spec: &DatasetSpec) -> Result<Ingested> {
    let file = File::open(&spec.path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", spec.path.display()))))?;
    ingest_from_reader(file, spec)
}

/// Parses CSV text according to `spec` (the path only names the series).
pub fn ingest_from_reader<R: Read>(input: R, spec: &DatasetSpec) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let value_col = match spec.format {
        DataFormat::GenericCsv => {
            if headers.len() < 2 || headers[0] != "date" || headers[1] != "value" {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header date,value, got {}", headers.join(",")),
                });
            }
            1
        }
        DataFormat::OxfordManCsv => {
            let key = spec
                .asset
                .as_deref()
                .ok_or_else(|| Error::Usage("the oxford-man-csv format needs an asset column key".into()))?;
            headers
                .iter()
                .position(|h| h == key)
                .filter(|&i| i > 0)
                .ok_or_else(|| Error::UnknownColumn {
                    column: key.into(),
                    available: headers[1..].to_vec(),
                })?
        }
    };

    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let date = parse_date(rec.get(0).unwrap_or(""), line)?;
        if spec.from.is_some_and(|f| date < f) || spec.to.is_some_and(|t| date > t) {
            continue;
        }
        let raw = rec.get(value_col).unwrap_or("");
        if MISSING.contains(&raw.to_ascii_lowercase().as_str()) {
            dropped.push(DroppedRow {
                line,
                date,
                reason: DropReason::Missing,
            });
            continue;
        }
        let v: f64 = raw.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| Error::Parse {
            line,
            message: format!("bad value {raw:?}"),
        })?;
        if spec.units != Units::LogVar && v <= 0.0 {
            dropped.push(DroppedRow {
                line,
                date,
                reason: DropReason::NonPositive,
            });
            continue;
        }
        rows.push((date, v));
    }
    if rows.is_empty() {
        return Err(Error::EmptyResult(spec.path.display().to_string()));
    }
    rows.sort_by_key(|r| r.0);
    let (dates, values) = rows.into_iter().unzip();
    Ok(Ingested {
        series: VolSeries::new(dates, values, spec.units, spec.label())?,
        dropped,
    })
}

/// Writes `date,value` with round-trip precision; reading it back as a
/// generic CSV with the same units reproduces the series.
pub fn write_generic_csv<W: Write>(series: &VolSeries<f64>, mut out: W) -> Result<()> {
    writeln!(out, "date,value")?;
    for (d, v) in series.dates().iter().zip(series.values()) {
        writeln!(out, "{d},{v}")?;
    }
    Ok(())
}

/// Resolves relative data paths against `VOLKIT_DATA_DIR` when it is set.
pub fn resolve_data_path(path: &Path) -> PathBuf {
    match std::env::var_os(crate::DATA_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}
