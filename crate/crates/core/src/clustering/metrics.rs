//! Distance-based summaries of a point set: contrast (relative spread between
//! nearest and furthest neighbors) and an intrinsic-dimension estimate from
//! the moments of the pairwise distance distribution.
//!
//! Several formulas are in use for both; each is a registered strategy.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::kmeans::sq_dist;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("need at least 3 points, have {0}")]
    TooFewPoints(usize),
    #[error("point {index} has dimension {actual}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("query index {query} out of range for {points} points")]
    QueryOutOfRange { query: usize, points: usize },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
}

/// All pairwise Euclidean distances of a point set.
#[derive(Debug, Clone)]
pub struct PairwiseDistances {
    n: usize,
    dist: Vec<f64>,
}

impl PairwiseDistances {
    pub fn new(points: &[Vec<f64>]) -> Result<Self, MetricsError> {
        let n = points.len();
        if n < 3 {
            return Err(MetricsError::TooFewPoints(n));
        }
        let dim = points[0].len();
        if let Some((index, p)) = points.iter().enumerate().find(|(_, p)| p.len() != dim) {
            return Err(MetricsError::DimensionMismatch {
                index,
                expected: dim,
                actual: p.len(),
            });
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = sq_dist(&points[i], &points[j]).sqrt();
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Self { n, dist })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Distances of unordered pairs `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| self.get(i, j)))
    }

    /// Nearest (non-coincident) and furthest neighbor distance of point `i`.
    pub fn near_far(&self, i: usize) -> Result<(f64, f64), MetricsError> {
        let mut near = f64::INFINITY;
        let mut far = 0.0f64;
        let mut coincident = 0;
        for j in (0..self.n).filter(|&j| j != i) {
            let d = self.get(i, j);
            if d == 0.0 {
                coincident += 1;
                continue;
            }
            near = near.min(d);
            far = far.max(d);
        }
        if coincident > 0 {
            log::warn!("point {i} coincides with {coincident} other point(s); excluded from its nearest distance");
        }
        if !near.is_finite() {
            return Err(MetricsError::DegenerateGeometry(format!(
                "point {i} coincides with every other point"
            )));
        }
        Ok((near, far))
    }
}

pub trait ContrastEstimator: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// `query` is the point of interest; estimators that average over all
    /// points ignore it.
    fn contrast(&self, distances: &PairwiseDistances, query: usize) -> Result<f64, MetricsError>;
}

pub trait IntrinsicDimEstimator: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn intrinsic_dim(&self, distances: &PairwiseDistances) -> Result<f64, MetricsError>;
}

/// `(d_far(q) - d_near(q)) / d_near(q)` seen from the query point.
#[derive(Debug, Clone, Copy, Default)]
pub struct QueryRelativeContrast;

impl QueryRelativeContrast {
    pub const NAME: &'static str = "query-relative";
}

impl ContrastEstimator for QueryRelativeContrast {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn contrast(&self, distances: &PairwiseDistances, query: usize) -> Result<f64, MetricsError> {
        if query >= distances.len() {
            return Err(MetricsError::QueryOutOfRange {
                query,
                points: distances.len(),
            });
        }
        let (near, far) = distances.near_far(query)?;
        Ok((far - near) / near)
    }
}

/// Mean over points of `(d_far - d_near) / d_near`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanRelativeContrast;

impl MeanRelativeContrast {
    pub const NAME: &'static str = "mean-relative";
}

impl ContrastEstimator for MeanRelativeContrast {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn contrast(&self, distances: &PairwiseDistances, _query: usize) -> Result<f64, MetricsError> {
        let mut total = 0.0;
        for i in 0..distances.len() {
            let (near, far) = distances.near_far(i)?;
            total += (far - near) / near;
        }
        Ok(total / distances.len() as f64)
    }
}

/// Mean over points of `d_far / d_near`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanRatioContrast;

impl MeanRatioContrast {
    pub const NAME: &'static str = "mean-ratio";
}

impl ContrastEstimator for MeanRatioContrast {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn contrast(&self, distances: &PairwiseDistances, _query: usize) -> Result<f64, MetricsError> {
        let mut total = 0.0;
        for i in 0..distances.len() {
            let (near, far) = distances.near_far(i)?;
            total += far / near;
        }
        Ok(total / distances.len() as f64)
    }
}

fn distance_moments(distances: &PairwiseDistances) -> Result<(f64, f64), MetricsError> {
    let d: Vec<f64> = distances.pairs().collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if var <= f64::EPSILON * mean * mean {
        return Err(MetricsError::DegenerateGeometry(
            "pairwise distances have zero variance".into(),
        ));
    }
    Ok((mean, var))
}

/// Squared mean pairwise distance over the (population) variance of the
/// pairwise distances.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanSqOverVariance;

impl MeanSqOverVariance {
    pub const NAME: &'static str = "mean-sq-over-var";
}

impl IntrinsicDimEstimator for MeanSqOverVariance {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn intrinsic_dim(&self, distances: &PairwiseDistances) -> Result<f64, MetricsError> {
        let (mean, var) = distance_moments(distances)?;
        Ok(mean * mean / var)
    }
}

/// `mean^2 / (2 var)` of the pairwise distances.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfMeanSqOverVariance;

impl HalfMeanSqOverVariance {
    pub const NAME: &'static str = "half-mean-sq-over-var";
}

impl IntrinsicDimEstimator for HalfMeanSqOverVariance {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn intrinsic_dim(&self, distances: &PairwiseDistances) -> Result<f64, MetricsError> {
        let (mean, var) = distance_moments(distances)?;
        Ok(mean * mean / (2.0 * var))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub contrast: f64,
    pub intrinsic_dim: f64,
    pub contrast_variant: String,
    pub intrinsic_variant: String,
}

pub fn metrics(
    points: &[Vec<f64>],
    query: usize,
    contrast: &dyn ContrastEstimator,
    intrinsic: &dyn IntrinsicDimEstimator,
) -> Result<MetricsReport, MetricsError> {
    let distances = PairwiseDistances::new(points)?;
    Ok(MetricsReport {
        contrast: contrast.contrast(&distances, query)?,
        intrinsic_dim: intrinsic.intrinsic_dim(&distances)?,
        contrast_variant: contrast.name().to_string(),
        intrinsic_variant: intrinsic.name().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn triangle() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]]
    }

    #[test]
    fn equilateral_triangle() {
        let d = PairwiseDistances::new(&triangle()).unwrap();
        for c in [
            &QueryRelativeContrast as &dyn ContrastEstimator,
            &MeanRelativeContrast,
        ] {
            assert_relative_eq!(c.contrast(&d, 0).unwrap(), 0.0, epsilon = 1e-12);
        }
        assert_relative_eq!(
            MeanRatioContrast.contrast(&d, 0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            MeanSqOverVariance.intrinsic_dim(&d),
            Err(MetricsError::DegenerateGeometry(_))
        ));
        assert!(metrics(
            &triangle(),
            0,
            &QueryRelativeContrast,
            &HalfMeanSqOverVariance
        )
        .is_err());
    }

    #[test]
    fn collinear_hand_values() {
        // points 0, 1, 3 on a line: pair distances 1, 3, 2
        let points = vec![vec![0.0], vec![1.0], vec![3.0]];
        let d = PairwiseDistances::new(&points).unwrap();
        // from 0: near 1, far 3 -> 2
        assert_relative_eq!(QueryRelativeContrast.contrast(&d, 0).unwrap(), 2.0);
        // per point: (3-1)/1, (2-1)/1, (3-2)/2 -> mean 3.5/3
        assert_relative_eq!(MeanRelativeContrast.contrast(&d, 0).unwrap(), 3.5 / 3.0);
        assert_relative_eq!(
            MeanRatioContrast.contrast(&d, 0).unwrap(),
            (3.0 + 2.0 + 1.5) / 3.0
        );
        // mean 2, population variance 2/3
        assert_relative_eq!(
            MeanSqOverVariance.intrinsic_dim(&d).unwrap(),
            6.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            HalfMeanSqOverVariance.intrinsic_dim(&d).unwrap(),
            3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn coincident_points_skip_zero_distance() {
        let points = vec![vec![0.0], vec![0.0], vec![2.0], vec![3.0]];
        let d = PairwiseDistances::new(&points).unwrap();
        assert_eq!(d.near_far(0).unwrap(), (2.0, 3.0));
        let all_same = vec![vec![1.0], vec![1.0], vec![1.0]];
        let d = PairwiseDistances::new(&all_same).unwrap();
        assert!(matches!(
            d.near_far(0),
            Err(MetricsError::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn input_errors() {
        assert_eq!(
            PairwiseDistances::new(&[vec![0.0], vec![1.0]]).unwrap_err(),
            MetricsError::TooFewPoints(2)
        );
        assert!(matches!(
            PairwiseDistances::new(&[vec![0.0], vec![1.0], vec![1.0, 2.0]]),
            Err(MetricsError::DimensionMismatch { index: 2, .. })
        ));
        let d = PairwiseDistances::new(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(
            QueryRelativeContrast.contrast(&d, 5).unwrap_err(),
            MetricsError::QueryOutOfRange {
                query: 5,
                points: 3
            }
        );
    }
}
