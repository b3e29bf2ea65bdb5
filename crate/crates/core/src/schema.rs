//! The fixed nine-indicator evaluation system.
//!
//! Indicators are grouped into three dimensions:
//!
//! * `Alpha`: basis of national epidemic prevention and control (four index scores),
//! * `Beta`: social resilience (education, young population share, density, living level),
//! * `Gamma`: infection situation (confirmed cases over population).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of indicators in the evaluation system.
pub const INDICATOR_COUNT: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Alpha,
    Beta,
    Gamma,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Alpha, Dimension::Beta, Dimension::Gamma];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Alpha => "alpha",
            Dimension::Beta => "beta",
            Dimension::Gamma => "gamma",
        }
    }

    /// Human label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Dimension::Alpha => "national_base",
            Dimension::Beta => "mass_base",
            Dimension::Gamma => "infection_situation",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dimension {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alpha" | "national_base" => Ok(Dimension::Alpha),
            "beta" | "mass_base" => Ok(Dimension::Beta),
            "gamma" | "infection" => Ok(Dimension::Gamma),
            other => Err(SchemaError::UnknownDimension(other.to_string())),
        }
    }
}

/// One indicator of the evaluation system. The discriminant is the column
/// position in the canonical CSV layout (after the `region` column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    Infection = 0,
    GovernmentRiskManagement = 1,
    EmergencyPreparedness = 2,
    CareQualityAccess = 3,
    EducationLevel = 4,
    YoungDistribution = 5,
    PopulationDensity = 6,
    MassLivingLevel = 7,
    MonitoringDiagnosis = 8,
}

impl Indicator {
    /// Canonical column order.
    pub const ALL: [Indicator; INDICATOR_COUNT] = [
        Indicator::Infection,
        Indicator::GovernmentRiskManagement,
        Indicator::EmergencyPreparedness,
        Indicator::CareQualityAccess,
        Indicator::EducationLevel,
        Indicator::YoungDistribution,
        Indicator::PopulationDensity,
        Indicator::MassLivingLevel,
        Indicator::MonitoringDiagnosis,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        match self {
            Indicator::Infection => "infection",
            Indicator::GovernmentRiskManagement => "government_risk_management",
            Indicator::EmergencyPreparedness => "emergency_preparedness",
            Indicator::CareQualityAccess => "care_quality_access",
            Indicator::EducationLevel => "education_level",
            Indicator::YoungDistribution => "young_distribution",
            Indicator::PopulationDensity => "population_density",
            Indicator::MassLivingLevel => "mass_living_level",
            Indicator::MonitoringDiagnosis => "monitoring_diagnosis",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Indicator::Infection => "Infection",
            Indicator::GovernmentRiskManagement => "Government Risk Management Efficiency",
            Indicator::EmergencyPreparedness => "Emergency Preparedness",
            Indicator::CareQualityAccess => "Quality and Accessibility of Care",
            Indicator::EducationLevel => "Education Level",
            Indicator::YoungDistribution => "Young Distribution",
            Indicator::PopulationDensity => "Population Density",
            Indicator::MassLivingLevel => "Mass Living Level",
            Indicator::MonitoringDiagnosis => "Monitoring and Diagnosis",
        }
    }

    pub fn dimension(self) -> Dimension {
        match self {
            Indicator::Infection => Dimension::Gamma,
            Indicator::GovernmentRiskManagement
            | Indicator::EmergencyPreparedness
            | Indicator::CareQualityAccess
            | Indicator::MonitoringDiagnosis => Dimension::Alpha,
            Indicator::EducationLevel
            | Indicator::YoungDistribution
            | Indicator::PopulationDensity
            | Indicator::MassLivingLevel => Dimension::Beta,
        }
    }

    pub fn from_key(key: &str) -> Option<Indicator> {
        Indicator::ALL.into_iter().find(|i| i.key() == key)
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Indicator {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Indicator::from_key(s.trim()).ok_or_else(|| SchemaError::UnknownIndicator(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("unknown indicator '{0}'")]
    UnknownIndicator(String),
    #[error("unknown dimension '{0}'")]
    UnknownDimension(String),
    #[error("schema must list {expected} indicators, got {actual}")]
    WrongIndicatorCount { expected: usize, actual: usize },
    #[error("duplicate indicator '{0}' in schema")]
    DuplicateIndicator(Indicator),
    #[error("dimension {dimension} must hold {expected} indicators, got {actual}")]
    WrongDimensionSize {
        dimension: Dimension,
        expected: usize,
        actual: usize,
    },
}

/// Ordered list of indicators with their dimension tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorSchema {
    indicators: Vec<Indicator>,
}

impl IndicatorSchema {
    pub fn new(indicators: Vec<Indicator>) -> Result<Self, SchemaError> {
        if indicators.len() != INDICATOR_COUNT {
            return Err(SchemaError::WrongIndicatorCount {
                expected: INDICATOR_COUNT,
                actual: indicators.len(),
            });
        }
        let mut seen = [false; INDICATOR_COUNT];
        for &ind in &indicators {
            if std::mem::replace(&mut seen[ind.index()], true) {
                return Err(SchemaError::DuplicateIndicator(ind));
            }
        }
        for (dimension, expected) in [
            (Dimension::Alpha, 4),
            (Dimension::Beta, 4),
            (Dimension::Gamma, 1),
        ] {
            let actual = indicators
                .iter()
                .filter(|i| i.dimension() == dimension)
                .count();
            if actual != expected {
                return Err(SchemaError::WrongDimensionSize {
                    dimension,
                    expected,
                    actual,
                });
            }
        }
        Ok(Self { indicators })
    }

    pub fn indicators(&self) -> &[Indicator] {
        &self.indicators
    }

    pub fn keys(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.indicators.iter().map(|i| i.key())
    }

    pub fn dimension(&self, dimension: Dimension) -> Vec<Indicator> {
        self.indicators
            .iter()
            .copied()
            .filter(|i| i.dimension() == dimension)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.indicators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indicators.is_empty()
    }
}

impl Default for IndicatorSchema {
    fn default() -> Self {
        default_schema()
    }
}

/// The canonical schema in CSV column order.
pub fn default_schema() -> IndicatorSchema {
    IndicatorSchema {
        indicators: Indicator::ALL.to_vec(),
    }
}
