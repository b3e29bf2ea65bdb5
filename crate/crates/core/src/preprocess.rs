//! Min-max scaling and descriptive statistics over the raw dataset.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{build_index, DataError, Dataset, IndicatorTable, RegionRecord};
use crate::schema::{default_schema, Indicator, IndicatorSchema, INDICATOR_COUNT};
use crate::similarity::{pearson, SimilarityError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PreprocessError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("need at least {needed} regions, have {actual}")]
    TooFewRegions { needed: usize, actual: usize },
    #[error("indicator {0} is constant across regions")]
    ConstantColumn(Indicator),
    #[error("region '{region}': {indicator} = {value} lies outside [{min}, {max}]")]
    OutsideBounds {
        region: String,
        indicator: Indicator,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Global bounds of one indicator column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        values.into_iter().fold(None, |acc, v| match acc {
            None => Some(Bounds { min: v, max: v }),
            Some(b) => Some(Bounds {
                min: b.min.min(v),
                max: b.max.max(v),
            }),
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.max <= self.min
    }

    /// `(v - min) / (max - min)`, or 0 for a degenerate column.
    pub fn scale(&self, value: f64) -> f64 {
        if self.is_degenerate() {
            0.0
        } else {
            (value - self.min) / (self.max - self.min)
        }
    }
}

/// Min-max scaled dataset with the bounds used to scale it.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizedDataset {
    #[serde(skip)]
    schema: IndicatorSchema,
    records: Vec<RegionRecord>,
    bounds: [Bounds; INDICATOR_COUNT],
    degenerate: Vec<Indicator>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl NormalizedDataset {
    /// Reassembles a normalized dataset, e.g. from the on-disk cache. Every
    /// value must lie in `[0, 1]`.
    pub fn from_parts(
        records: Vec<RegionRecord>,
        bounds: [Bounds; INDICATOR_COUNT],
    ) -> Result<Self, PreprocessError> {
        for r in &records {
            for ind in Indicator::ALL {
                r.check_range(ind, 0.0, 1.0)?;
            }
        }
        let index = build_index(&records)?;
        let degenerate = Indicator::ALL
            .into_iter()
            .filter(|i| bounds[i.index()].is_degenerate())
            .collect();
        Ok(Self {
            schema: default_schema(),
            records,
            bounds,
            degenerate,
            index,
        })
    }

    pub fn schema(&self) -> &IndicatorSchema {
        &self.schema
    }

    pub fn bounds(&self) -> &[Bounds; INDICATOR_COUNT] {
        &self.bounds
    }

    /// Indicators whose raw column was constant and were mapped to 0.
    pub fn degenerate(&self) -> &[Indicator] {
        &self.degenerate
    }

    /// The scaled values viewed as a dataset, e.g. to feed back into [`normalize`].
    pub fn to_dataset(&self) -> Result<Dataset, DataError> {
        Dataset::new(self.records.clone())
    }
}

impl PartialEq for NormalizedDataset {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records && self.bounds == other.bounds
    }
}

impl IndicatorTable for NormalizedDataset {
    fn records(&self) -> &[RegionRecord] {
        &self.records
    }

    fn position(&self, region: &str) -> Option<usize> {
        self.index.get(region.trim()).copied()
    }
}

pub fn column_bounds(dataset: &Dataset) -> Result<[Bounds; INDICATOR_COUNT], PreprocessError> {
    let mut bounds = [Bounds { min: 0.0, max: 0.0 }; INDICATOR_COUNT];
    for ind in Indicator::ALL {
        bounds[ind.index()] =
            Bounds::of(dataset.column(ind)).ok_or(PreprocessError::EmptyDataset)?;
    }
    Ok(bounds)
}

/// Scales every indicator to `[0, 1]` using the global bounds of the whole
/// dataset. A constant indicator is mapped to 0 with a warning.
pub fn normalize(dataset: &Dataset) -> Result<NormalizedDataset, PreprocessError> {
    let bounds = column_bounds(dataset)?;
    normalize_with_bounds(dataset, &bounds)
}

/// Scales `dataset` with externally supplied bounds. Values outside the
/// bounds are an error.
pub fn normalize_with_bounds(
    dataset: &Dataset,
    bounds: &[Bounds; INDICATOR_COUNT],
) -> Result<NormalizedDataset, PreprocessError> {
    if dataset.is_empty() {
        return Err(PreprocessError::EmptyDataset);
    }
    for ind in Indicator::ALL {
        if bounds[ind.index()].is_degenerate() {
            log::warn!("indicator {ind} is constant; normalized to 0");
        }
    }
    let mut records = Vec::with_capacity(dataset.len());
    for r in dataset.records() {
        let mut values = [0.0; INDICATOR_COUNT];
        for ind in Indicator::ALL {
            let b = bounds[ind.index()];
            let v = r.get(ind);
            if v < b.min || v > b.max {
                return Err(PreprocessError::OutsideBounds {
                    region: r.region().to_string(),
                    indicator: ind,
                    value: v,
                    min: b.min,
                    max: b.max,
                });
            }
            values[ind.index()] = b.scale(v);
        }
        records.push(RegionRecord::unchecked(r.region(), values)?);
    }
    NormalizedDataset::from_parts(records, *bounds)
}

/// Quantile by linear interpolation between order statistics (R type 7).
/// `sorted` must be non-empty and ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outlier {
    pub region: String,
    pub value: f64,
}

/// Tukey box summary of one indicator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxSummary {
    pub indicator: Indicator,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub outliers: Vec<Outlier>,
}

impl BoxSummary {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }

    /// Lower and upper 1.5·IQR fences.
    pub fn fences(&self) -> (f64, f64) {
        (self.q1 - 1.5 * self.iqr(), self.q3 + 1.5 * self.iqr())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorStats {
    pub summaries: Vec<BoxSummary>,
}

impl IndicatorStats {
    pub fn get(&self, indicator: Indicator) -> &BoxSummary {
        &self.summaries[indicator.index()]
    }
}

pub fn box_stats(dataset: &Dataset) -> Result<IndicatorStats, PreprocessError> {
    if dataset.is_empty() {
        return Err(PreprocessError::EmptyDataset);
    }
    let summaries = Indicator::ALL
        .into_iter()
        .map(|ind| {
            let column = dataset.column(ind);
            let mut sorted = column.clone();
            sorted.sort_by(f64::total_cmp);
            let mut summary = BoxSummary {
                indicator: ind,
                min: sorted[0],
                q1: quantile_sorted(&sorted, 0.25),
                median: quantile_sorted(&sorted, 0.5),
                q3: quantile_sorted(&sorted, 0.75),
                max: sorted[sorted.len() - 1],
                outliers: Vec::new(),
            };
            let (lo, hi) = summary.fences();
            summary.outliers = dataset
                .records()
                .iter()
                .zip(column)
                .filter(|(_, v)| *v < lo || *v > hi)
                .map(|(r, value)| Outlier {
                    region: r.region().to_string(),
                    value,
                })
                .collect();
            summary
        })
        .collect();
    Ok(IndicatorStats { summaries })
}

/// Symmetric matrix of Pearson correlations between indicator columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub indicators: Vec<Indicator>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: Indicator, b: Indicator) -> f64 {
        self.values[a.index()][b.index()]
    }
}

pub fn pcc_matrix(dataset: &Dataset) -> Result<CorrelationMatrix, PreprocessError> {
    if dataset.len() < 2 {
        return Err(PreprocessError::TooFewRegions {
            needed: 2,
            actual: dataset.len(),
        });
    }
    let columns: Vec<Vec<f64>> = Indicator::ALL.iter().map(|&i| dataset.column(i)).collect();
    let mut values = vec![vec![0.0; INDICATOR_COUNT]; INDICATOR_COUNT];
    for a in 0..INDICATOR_COUNT {
        for b in a..INDICATOR_COUNT {
            let r = pearson(&columns[a], &columns[b]).map_err(|e| match e {
                SimilarityError::ZeroVariance => {
                    let constant = if Bounds::of(columns[a].iter().copied())
                        .is_some_and(|x| x.is_degenerate())
                    {
                        a
                    } else {
                        b
                    };
                    PreprocessError::ConstantColumn(Indicator::ALL[constant])
                }
                other => unreachable!("columns have equal length >= 2: {other}"),
            })?;
            let r = if a == b { 1.0 } else { r };
            values[a][b] = r;
            values[b][a] = r;
        }
    }
    Ok(CorrelationMatrix {
        indicators: Indicator::ALL.to_vec(),
        values,
    })
}
