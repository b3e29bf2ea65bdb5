//! CSV ingestion and persistence.
//!
//! The canonical layout is a `region` column followed by the nine indicator
//! keys in schema order, UTF-8, LF line endings, RFC 4180 quoting. Numbers are
//! written as the shortest decimal that parses back to the same `f64`.
//!
//! Normalized datasets are cached in the same layout with a sidecar
//! `<file>.bounds.csv` holding `key,min,max` rows.

use std::fmt;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::dataset::{DataError, Dataset, IndicatorTable, RegionRecord};
use crate::preprocess::{Bounds, NormalizedDataset};
use crate::schema::{Indicator, INDICATOR_COUNT};

pub const REGION_COLUMN: &str = "region";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("header lacks column '{0}'")]
    MissingColumn(String),
    #[error("header repeats column '{0}'")]
    DuplicateColumn(String),
    #[error("bounds file: {0}")]
    Bounds(String),
    #[error("normalized cache: {0}")]
    Normalized(#[from] crate::preprocess::PreprocessError),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        IngestError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectReason {
    FieldCount { expected: usize, actual: usize },
    ParseError { column: String, cell: String },
    Invalid { message: String },
    DuplicateRegion { region: String },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::FieldCount { expected, actual } => {
                write!(f, "expected {expected} fields, found {actual}")
            }
            RejectReason::ParseError { column, cell } => {
                write!(f, "column '{column}': cannot parse '{cell}' as a number")
            }
            RejectReason::Invalid { message } => f.write_str(message),
            RejectReason::DuplicateRegion { region } => write!(f, "duplicate region '{region}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reject {
    pub line: u64,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub rejects: Vec<Reject>,
}

impl IngestReport {
    pub fn is_clean(&self) -> bool {
        self.rejects.is_empty()
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<(Dataset, IngestReport), IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_csv(file)
}

/// Column positions of `region` and each indicator in a header row.
fn header_layout(
    headers: &csv::StringRecord,
) -> Result<(usize, [usize; INDICATOR_COUNT]), IngestError> {
    let find = |name: &str| -> Result<usize, IngestError> {
        let mut hits = headers.iter().enumerate().filter(|(_, h)| h.trim() == name);
        let (pos, _) = hits
            .next()
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))?;
        if hits.next().is_some() {
            return Err(IngestError::DuplicateColumn(name.to_string()));
        }
        Ok(pos)
    };
    let region = find(REGION_COLUMN)?;
    let mut columns = [0usize; INDICATOR_COUNT];
    for ind in Indicator::ALL {
        columns[ind.index()] = find(ind.key())?;
    }
    Ok((region, columns))
}

pub fn read_csv<R: Read>(reader: R) -> Result<(Dataset, IngestReport), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let (region_col, columns) = header_layout(&headers)?;

    let mut report = IngestReport::default();
    let mut records: Vec<RegionRecord> = Vec::new();
    let mut seen = std::collections::HashSet::new();

    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        report.rows_read += 1;
        match parse_row(&row, &headers, region_col, &columns) {
            Ok(record) => {
                if !seen.insert(record.region().to_string()) {
                    report.rejects.push(Reject {
                        line,
                        reason: RejectReason::DuplicateRegion {
                            region: record.region().to_string(),
                        },
                    });
                    continue;
                }
                records.push(record);
            }
            Err(reason) => report.rejects.push(Reject { line, reason }),
        }
    }
    report.rows_accepted = records.len();
    for r in &report.rejects {
        log::warn!("line {}: rejected ({})", r.line, r.reason);
    }
    Ok((Dataset::new(records)?, report))
}

fn parse_row(
    row: &csv::StringRecord,
    headers: &csv::StringRecord,
    region_col: usize,
    columns: &[usize; INDICATOR_COUNT],
) -> Result<RegionRecord, RejectReason> {
    if row.len() != headers.len() {
        return Err(RejectReason::FieldCount {
            expected: headers.len(),
            actual: row.len(),
        });
    }
    let mut values = [0.0; INDICATOR_COUNT];
    for ind in Indicator::ALL {
        let cell = &row[columns[ind.index()]];
        values[ind.index()] = cell
            .trim()
            .parse::<f64>()
            .map_err(|_| RejectReason::ParseError {
                column: ind.key().to_string(),
                cell: cell.to_string(),
            })?;
    }
    RegionRecord::new(&row[region_col], values).map_err(|e| RejectReason::Invalid {
        message: e.to_string(),
    })
}

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn write_records<W: Write>(records: &[RegionRecord], w: W) -> Result<(), csv::Error> {
    let mut wtr = csv_writer(w);
    let mut header = vec![REGION_COLUMN];
    header.extend(Indicator::ALL.iter().map(|i| i.key()));
    wtr.write_record(&header)?;
    for r in records {
        let mut row = Vec::with_capacity(INDICATOR_COUNT + 1);
        row.push(r.region().to_string());
        row.extend(r.values().iter().map(|v| format!("{v}")));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_dataset<W: Write>(dataset: &Dataset, w: W) -> Result<(), IngestError> {
    Ok(write_records(dataset.records(), w)?)
}

/// The canonical CSV bytes of a dataset; the checksum in reports is taken
/// over these bytes.
pub fn to_csv_bytes(dataset: &Dataset) -> Vec<u8> {
    let mut buf = Vec::new();
    // writing into a Vec cannot fail
    write_records(dataset.records(), &mut buf).expect("in-memory csv write");
    buf
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), IngestError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| IngestError::io(path, e))?;
    write_dataset(dataset, file)
}

pub fn bounds_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".bounds.csv");
    path.with_file_name(name)
}

pub fn save_normalized(
    normalized: &NormalizedDataset,
    path: impl AsRef<Path>,
) -> Result<(), IngestError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| IngestError::io(path, e))?;
    write_records(normalized.records(), file)?;

    let bpath = bounds_path(path);
    let file = File::create(&bpath).map_err(|e| IngestError::io(&bpath, e))?;
    let mut wtr = csv_writer(file);
    wtr.write_record(["key", "min", "max"])?;
    for ind in Indicator::ALL {
        let b = normalized.bounds()[ind.index()];
        wtr.write_record([
            ind.key().to_string(),
            format!("{}", b.min),
            format!("{}", b.max),
        ])?;
    }
    wtr.flush().map_err(|e| IngestError::io(&bpath, e))?;
    Ok(())
}

pub fn load_normalized(path: impl AsRef<Path>) -> Result<NormalizedDataset, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers()?.clone();
    let (region_col, columns) = header_layout(&headers)?;
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let mut values = [0.0; INDICATOR_COUNT];
        for ind in Indicator::ALL {
            let cell = &row[columns[ind.index()]];
            values[ind.index()] = cell
                .trim()
                .parse()
                .map_err(|_| IngestError::Bounds(format!("line {line}: bad value '{cell}'")))?;
        }
        records.push(RegionRecord::unchecked(&row[region_col], values)?);
    }

    let bpath = bounds_path(path);
    let file = File::open(&bpath).map_err(|e| IngestError::io(&bpath, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut bounds: [Option<Bounds>; INDICATOR_COUNT] = [None; INDICATOR_COUNT];
    for row in rdr.records() {
        let row = row?;
        if row.len() != 3 {
            return Err(IngestError::Bounds(format!(
                "expected key,min,max, got {} fields",
                row.len()
            )));
        }
        let ind = Indicator::from_key(row[0].trim())
            .ok_or_else(|| IngestError::Bounds(format!("unknown key '{}'", &row[0])))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| IngestError::Bounds(format!("bad number '{s}'")))
        };
        bounds[ind.index()] = Some(Bounds {
            min: parse(&row[1])?,
            max: parse(&row[2])?,
        });
    }
    let mut resolved = [Bounds { min: 0.0, max: 0.0 }; INDICATOR_COUNT];
    for ind in Indicator::ALL {
        resolved[ind.index()] = bounds[ind.index()]
            .ok_or_else(|| IngestError::Bounds(format!("missing key '{}'", ind.key())))?;
    }
    Ok(NormalizedDataset::from_parts(records, resolved)?)
}
