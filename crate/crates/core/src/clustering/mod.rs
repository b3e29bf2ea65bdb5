//! K-means, SSE curves and elbow selection, the second similarity filter,
//! the all-regions baseline, and distance-based quality metrics.

pub mod elbow;
pub mod filter;
pub mod kmeans;
pub mod metrics;

use thiserror::Error;

use crate::registry::RegistryError;

pub use elbow::{ElbowRule, InsignificantDrop, MaxCurvature};
pub use filter::{
    baseline_kmeans, baseline_kmeans_with, second_filter, second_filter_points, second_filter_with,
    BaselineResult, LabeledPoint, SecondFilterResult, TARGET_POINT,
};
pub use kmeans::{
    fit_k, fit_range, kmeans, kmeans_with, sse, sse_curve, ClusterCount, ClusterResult, CurvePoint,
    KMeansConfig,
};
pub use metrics::{
    metrics, ContrastEstimator, IntrinsicDimEstimator, MetricsError, MetricsReport,
    PairwiseDistances,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("no points to cluster")]
    EmptyInput,
    #[error("point {index} has dimension {actual}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("k = {k} exceeds the {points} points available")]
    KTooLarge { k: usize, points: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("SSE curve needs k = 1..k_max with k_max >= 3, got {0} points")]
    CurveTooShort(usize),
    #[error("malformed SSE curve: {0}")]
    MalformedCurve(String),
    #[error("second filter needs at least 3 neighbors, got {0}")]
    TooFewEntries(usize),
    #[error("unknown region '{0}'")]
    UnknownRegion(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// Picks k from an SSE curve with the default elbow rule.
pub fn choose_k_elbow(curve: &[CurvePoint]) -> Result<usize, ClusterError> {
    InsignificantDrop::default().choose(curve)
}
