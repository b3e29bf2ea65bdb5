use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{default_schema, Dimension, Indicator, IndicatorSchema, INDICATOR_COUNT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("region name is empty")]
    EmptyRegion,
    #[error("region '{region}': {indicator} is not finite ({value})")]
    NonFinite {
        region: String,
        indicator: Indicator,
        value: f64,
    },
    #[error("region '{region}': {indicator} = {value} outside {min}..={max}")]
    OutOfRange {
        region: String,
        indicator: Indicator,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("duplicate region '{0}'")]
    DuplicateRegion(String),
}

/// One region's raw indicator values, stored in canonical column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    region: String,
    values: [f64; INDICATOR_COUNT],
}

impl RegionRecord {
    /// Builds a raw record. The name is trimmed; infection must be a rate in
    /// `[0, 1]` and population density non-negative.
    pub fn new(region: impl AsRef<str>, values: [f64; INDICATOR_COUNT]) -> Result<Self, DataError> {
        let record = Self::unchecked(region, values)?;
        record.check_range(Indicator::Infection, 0.0, 1.0)?;
        record.check_range(Indicator::PopulationDensity, 0.0, f64::INFINITY)?;
        Ok(record)
    }

    /// Builds a record checking only the name and finiteness.
    pub(crate) fn unchecked(
        region: impl AsRef<str>,
        values: [f64; INDICATOR_COUNT],
    ) -> Result<Self, DataError> {
        let region = region.as_ref().trim();
        if region.is_empty() {
            return Err(DataError::EmptyRegion);
        }
        for ind in Indicator::ALL {
            let value = values[ind.index()];
            if !value.is_finite() {
                return Err(DataError::NonFinite {
                    region: region.to_string(),
                    indicator: ind,
                    value,
                });
            }
        }
        Ok(Self {
            region: region.to_string(),
            values,
        })
    }

    pub(crate) fn check_range(
        &self,
        indicator: Indicator,
        min: f64,
        max: f64,
    ) -> Result<(), DataError> {
        let value = self.get(indicator);
        if value < min || value > max {
            return Err(DataError::OutOfRange {
                region: self.region.clone(),
                indicator,
                value,
                min,
                max,
            });
        }
        Ok(())
    }

    pub fn region(&self) -> &str {
        &self.region
    }

    pub fn values(&self) -> &[f64; INDICATOR_COUNT] {
        &self.values
    }

    pub fn get(&self, indicator: Indicator) -> f64 {
        self.values[indicator.index()]
    }

    /// Values of the indicators belonging to `dimension`, in schema order.
    pub fn dimension_values(&self, dimension: Dimension) -> Vec<f64> {
        Indicator::ALL
            .iter()
            .filter(|i| i.dimension() == dimension)
            .map(|&i| self.get(i))
            .collect()
    }
}

/// Read access to a table of per-region indicator rows. Implemented by both
/// the raw [`Dataset`] and the min-max scaled
/// [`NormalizedDataset`](crate::preprocess::NormalizedDataset).
pub trait IndicatorTable {
    fn records(&self) -> &[RegionRecord];

    fn position(&self, region: &str) -> Option<usize>;

    fn record(&self, region: &str) -> Option<&RegionRecord> {
        self.position(region).map(|i| &self.records()[i])
    }

    fn len(&self) -> usize {
        self.records().len()
    }

    fn is_empty(&self) -> bool {
        self.records().is_empty()
    }

    fn column(&self, indicator: Indicator) -> Vec<f64> {
        self.records().iter().map(|r| r.get(indicator)).collect()
    }
}

pub(crate) fn build_index(records: &[RegionRecord]) -> Result<HashMap<String, usize>, DataError> {
    let mut index = HashMap::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if index.insert(r.region.clone(), i).is_some() {
            return Err(DataError::DuplicateRegion(r.region.clone()));
        }
    }
    Ok(index)
}

/// Ordered collection of raw region records with unique names.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr", into = "DatasetRepr")]
pub struct Dataset {
    schema: IndicatorSchema,
    records: Vec<RegionRecord>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct DatasetRepr {
    records: Vec<RegionRecord>,
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = DataError;

    fn try_from(repr: DatasetRepr) -> Result<Self, Self::Error> {
        for r in &repr.records {
            r.check_range(Indicator::Infection, 0.0, 1.0)?;
            r.check_range(Indicator::PopulationDensity, 0.0, f64::INFINITY)?;
        }
        Dataset::new(repr.records)
    }
}

impl From<Dataset> for DatasetRepr {
    fn from(d: Dataset) -> Self {
        DatasetRepr { records: d.records }
    }
}

impl Dataset {
    pub fn new(records: Vec<RegionRecord>) -> Result<Self, DataError> {
        let index = build_index(&records)?;
        Ok(Self {
            schema: default_schema(),
            records,
            index,
        })
    }

    pub fn empty() -> Self {
        Self {
            schema: default_schema(),
            records: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn schema(&self) -> &IndicatorSchema {
        &self.schema
    }

    pub fn region_names(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.region())
    }

    pub fn into_records(self) -> Vec<RegionRecord> {
        self.records
    }
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

impl IndicatorTable for Dataset {
    fn records(&self) -> &[RegionRecord] {
        &self.records
    }

    fn position(&self, region: &str) -> Option<usize> {
        self.index.get(region.trim()).copied()
    }
}
