//! Pearson similarity and the per-dimension collaborative filter.
//!
//! Regions play the role of users and the indicators of one dimension the
//! role of co-rated items. Each region is centered by its own mean over that
//! dimension's indicators, so the per-dimension similarity of two regions is
//! the Pearson correlation of their two indicator vectors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::IndicatorTable;
use crate::neighbor::NeighborSet;
use crate::schema::Dimension;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 shared items, have {0}")]
    TooShort(usize),
    #[error("constant vector has zero variance")]
    ZeroVariance,
    #[error("unknown region '{0}'")]
    UnknownRegion(String),
    #[error("dimension {0} has fewer than 2 indicators")]
    DimensionTooSmall(Dimension),
}

fn is_constant(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

/// Pearson correlation coefficient, clamped to `[-1, 1]`.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    if a.len() != b.len() {
        return Err(SimilarityError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(SimilarityError::TooShort(a.len()));
    }
    if is_constant(a) || is_constant(b) {
        return Err(SimilarityError::ZeroVariance);
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut cov, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(SimilarityError::ZeroVariance);
    }
    Ok((cov / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0))
}

/// Similarity of regions `i` and `j` over the indicators of `dimension`.
pub fn dimension_similarity(
    table: &impl IndicatorTable,
    i: &str,
    j: &str,
    dimension: Dimension,
) -> Result<f64, SimilarityError> {
    let ri = table
        .record(i)
        .ok_or_else(|| SimilarityError::UnknownRegion(i.to_string()))?;
    let rj = table
        .record(j)
        .ok_or_else(|| SimilarityError::UnknownRegion(j.to_string()))?;
    let (a, b) = (
        ri.dimension_values(dimension),
        rj.dimension_values(dimension),
    );
    if a.len() < 2 {
        return Err(SimilarityError::DimensionTooSmall(dimension));
    }
    pearson(&a, &b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityEntry {
    pub region: String,
    pub alpha: f64,
    pub beta: f64,
    /// Set when a zero-variance vector forced `alpha` to 0.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub alpha_degenerate: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub beta_degenerate: bool,
}

impl SimilarityEntry {
    pub fn new(region: impl Into<String>, alpha: f64, beta: f64) -> Self {
        Self {
            region: region.into(),
            alpha,
            beta,
            alpha_degenerate: false,
            beta_degenerate: false,
        }
    }

    pub fn point(&self) -> [f64; 2] {
        [self.alpha, self.beta]
    }
}

/// Per-neighbor (alpha, beta) similarities against a target, in neighbor order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityProfile {
    pub target: String,
    pub entries: Vec<SimilarityEntry>,
}

impl SimilarityProfile {
    pub fn get(&self, region: &str) -> Option<&SimilarityEntry> {
        self.entries.iter().find(|e| e.region == region)
    }
}

fn similarity_or_zero(
    table: &impl IndicatorTable,
    target: &str,
    region: &str,
    dimension: Dimension,
) -> Result<(f64, bool), SimilarityError> {
    match dimension_similarity(table, target, region, dimension) {
        Ok(s) => Ok((s, false)),
        Err(SimilarityError::ZeroVariance) => {
            log::warn!("{target} vs {region}: zero variance on {dimension}; similarity set to 0");
            Ok((0.0, true))
        }
        Err(e) => Err(e),
    }
}

pub fn similarity_profile(
    table: &impl IndicatorTable,
    neighbors: &NeighborSet,
) -> Result<SimilarityProfile, SimilarityError> {
    let entries = neighbors
        .regions()
        .map(|region| {
            let (alpha, alpha_degenerate) =
                similarity_or_zero(table, &neighbors.target, region, Dimension::Alpha)?;
            let (beta, beta_degenerate) =
                similarity_or_zero(table, &neighbors.target, region, Dimension::Beta)?;
            Ok(SimilarityEntry {
                region: region.to_string(),
                alpha,
                beta,
                alpha_degenerate,
                beta_degenerate,
            })
        })
        .collect::<Result<_, SimilarityError>>()?;
    Ok(SimilarityProfile {
        target: neighbors.target.clone(),
        entries,
    })
}

/// Square matrix of pairwise similarities among `regions` on one dimension,
/// for heat-map plotting. Degenerate pairs are reported as NaN.
pub fn similarity_matrix(
    table: &impl IndicatorTable,
    regions: &[String],
    dimension: Dimension,
) -> Result<Vec<Vec<f64>>, SimilarityError> {
    let mut out = vec![vec![f64::NAN; regions.len()]; regions.len()];
    for (a, ra) in regions.iter().enumerate() {
        for (b, rb) in regions.iter().enumerate().skip(a) {
            let s = match dimension_similarity(table, ra, rb, dimension) {
                Ok(s) => s,
                Err(SimilarityError::ZeroVariance) => f64::NAN,
                Err(e) => return Err(e),
            };
            out[a][b] = s;
            out[b][a] = s;
        }
    }
    Ok(out)
}
