//! Rules that pick the cluster count from an SSE curve.

use std::fmt::Debug;

use super::kmeans::CurvePoint;
use super::ClusterError;

/// Picks k from an SSE curve covering `k = 1..=k_max`.
pub trait ElbowRule: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn choose(&self, curve: &[CurvePoint]) -> Result<usize, ClusterError>;
}

fn validate(curve: &[CurvePoint]) -> Result<(), ClusterError> {
    if curve.len() < 3 {
        return Err(ClusterError::CurveTooShort(curve.len()));
    }
    for (i, p) in curve.iter().enumerate() {
        if p.k != i + 1 {
            return Err(ClusterError::MalformedCurve(format!(
                "expected k = {} at position {i}, got {}",
                i + 1,
                p.k
            )));
        }
        if !p.sse.is_finite() || p.sse < 0.0 {
            return Err(ClusterError::MalformedCurve(format!(
                "sse at k = {} is {}",
                p.k, p.sse
            )));
        }
    }
    Ok(())
}

/// Interior k with the largest second difference
/// `(sse[k-1] - sse[k]) - (sse[k] - sse[k+1])`; ties go to the smaller k.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxCurvature;

impl MaxCurvature {
    pub const NAME: &'static str = "max-curvature";

    fn pick(curve: &[CurvePoint]) -> usize {
        let mut best_k = 2;
        let mut best = f64::NEG_INFINITY;
        for w in curve.windows(3) {
            let d2 = (w[0].sse - w[1].sse) - (w[1].sse - w[2].sse);
            if d2 > best {
                best = d2;
                best_k = w[1].k;
            }
        }
        best_k
    }
}

impl ElbowRule for MaxCurvature {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn choose(&self, curve: &[CurvePoint]) -> Result<usize, ClusterError> {
        validate(curve)?;
        Ok(Self::pick(curve))
    }
}

/// Smallest k after which the next step removes less than `threshold` of the
/// one-cluster SSE, i.e. where the descent stops paying off. Falls back to
/// [`MaxCurvature`] when every step is significant.
#[derive(Debug, Clone, Copy)]
pub struct InsignificantDrop {
    pub threshold: f64,
}

impl InsignificantDrop {
    pub const NAME: &'static str = "insignificant-drop";
    pub const DEFAULT_THRESHOLD: f64 = 0.05;
}

impl Default for InsignificantDrop {
    fn default() -> Self {
        Self {
            threshold: Self::DEFAULT_THRESHOLD,
        }
    }
}

impl ElbowRule for InsignificantDrop {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn choose(&self, curve: &[CurvePoint]) -> Result<usize, ClusterError> {
        validate(curve)?;
        let total = curve[0].sse;
        if total == 0.0 {
            return Ok(1);
        }
        let cutoff = self.threshold * total;
        Ok(curve
            .windows(2)
            .find(|w| w[0].sse - w[1].sse < cutoff)
            .map(|w| w[0].k)
            .unwrap_or_else(|| MaxCurvature::pick(curve)))
    }
}
