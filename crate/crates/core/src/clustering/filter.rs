//! Second similarity filter and the all-regions K-means baseline.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_with, ClusterResult, KMeansConfig};
use super::ClusterError;
use crate::dataset::IndicatorTable;
use crate::preprocess::NormalizedDataset;
use crate::registry::StrategyRegistry;
use crate::similarity::SimilarityProfile;

/// A region's own similarity in both dimensions.
pub const TARGET_POINT: [f64; 2] = [1.0, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub region: String,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondFilterResult {
    /// Clustered points: the target first, then neighbors by name.
    pub points: Vec<LabeledPoint>,
    pub clustering: ClusterResult,
    pub recommended: BTreeSet<String>,
}

impl SecondFilterResult {
    pub fn coordinates(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.point.clone()).collect()
    }

    pub fn cluster_of(&self, region: &str) -> Option<usize> {
        self.points
            .iter()
            .position(|p| p.region == region)
            .map(|i| self.clustering.assignments[i])
    }
}

/// The (alpha, beta) points clustered by the second filter. Neighbors are
/// sorted by name so the outcome does not depend on profile order.
pub fn second_filter_points(profile: &SimilarityProfile) -> Vec<LabeledPoint> {
    let mut entries: Vec<_> = profile.entries.iter().collect();
    entries.sort_by(|a, b| a.region.cmp(&b.region));
    std::iter::once(LabeledPoint {
        region: profile.target.clone(),
        point: TARGET_POINT.to_vec(),
    })
    .chain(entries.into_iter().map(|e| LabeledPoint {
        region: e.region.clone(),
        point: e.point().to_vec(),
    }))
    .collect()
}

fn same_cluster_as_first(labels: &[LabeledPoint], clustering: &ClusterResult) -> BTreeSet<String> {
    let home = clustering.assignments[0];
    clustering
        .members(home)
        .filter(|&i| i != 0)
        .map(|i| labels[i].region.clone())
        .collect()
}

pub fn second_filter_with(
    profile: &SimilarityProfile,
    config: &KMeansConfig,
    registry: &StrategyRegistry,
) -> Result<SecondFilterResult, ClusterError> {
    if profile.entries.len() < 3 {
        return Err(ClusterError::TooFewEntries(profile.entries.len()));
    }
    let points = second_filter_points(profile);
    let coords: Vec<Vec<f64>> = points.iter().map(|p| p.point.clone()).collect();
    let clustering = kmeans_with(&coords, config, registry)?;
    let recommended = same_cluster_as_first(&points, &clustering);
    Ok(SecondFilterResult {
        points,
        clustering,
        recommended,
    })
}

/// Clusters the target with its neighbors' similarity points; regions that
/// share the target's cluster are recommended.
pub fn second_filter(
    profile: &SimilarityProfile,
    config: &KMeansConfig,
) -> Result<SecondFilterResult, ClusterError> {
    second_filter_with(profile, config, &StrategyRegistry::builtin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub target: String,
    /// Region of each clustered point, in dataset order.
    pub regions: Vec<String>,
    pub clustering: ClusterResult,
    pub recommended: BTreeSet<String>,
}

impl BaselineResult {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clustering.cluster_sizes()
    }
}

pub fn baseline_kmeans_with(
    normalized: &NormalizedDataset,
    target: &str,
    config: &KMeansConfig,
    registry: &StrategyRegistry,
) -> Result<BaselineResult, ClusterError> {
    let target_index = normalized
        .position(target)
        .ok_or_else(|| ClusterError::UnknownRegion(target.trim().to_string()))?;
    let regions: Vec<String> = normalized
        .records()
        .iter()
        .map(|r| r.region().to_string())
        .collect();
    let coords: Vec<Vec<f64>> = normalized
        .records()
        .iter()
        .map(|r| r.values().to_vec())
        .collect();
    let clustering = kmeans_with(&coords, config, registry)?;
    let home = clustering.assignments[target_index];
    let recommended = clustering
        .members(home)
        .filter(|&i| i != target_index)
        .map(|i| regions[i].clone())
        .collect();
    Ok(BaselineResult {
        target: regions[target_index].clone(),
        regions,
        clustering,
        recommended,
    })
}

/// Clusters every region on its full normalized indicator vector.
pub fn baseline_kmeans(
    normalized: &NormalizedDataset,
    target: &str,
    config: &KMeansConfig,
) -> Result<BaselineResult, ClusterError> {
    baseline_kmeans_with(normalized, target, config, &StrategyRegistry::builtin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::ClusterCount;
    use crate::similarity::SimilarityEntry;

    fn profile(entries: &[(&str, f64, f64)]) -> SimilarityProfile {
        SimilarityProfile {
            target: "T".into(),
            entries: entries
                .iter()
                .map(|(r, a, b)| SimilarityEntry::new(*r, *a, *b))
                .collect(),
        }
    }

    #[test]
    fn coincident_neighbor_is_recommended() {
        let p = profile(&[
            ("Twin", 1.0, 1.0),
            ("Far1", -0.9, -0.8),
            ("Far2", -0.8, -0.9),
            ("Far3", 0.0, -1.0),
        ]);
        let cfg = KMeansConfig::default().with_k(ClusterCount::Fixed(2));
        let r = second_filter(&p, &cfg).unwrap();
        assert_eq!(r.recommended, BTreeSet::from(["Twin".to_string()]));
        assert_eq!(r.points[0].region, "T");
        assert_eq!(r.cluster_of("Twin"), r.cluster_of("T"));
    }

    #[test]
    fn needs_three_entries() {
        let p = profile(&[("A", 0.1, 0.2), ("B", 0.3, 0.4)]);
        assert_eq!(
            second_filter(&p, &KMeansConfig::default()).unwrap_err(),
            ClusterError::TooFewEntries(2)
        );
    }

    #[test]
    fn points_are_name_sorted_after_target() {
        let p = profile(&[("C", 0.1, 0.2), ("A", 0.3, 0.4), ("B", 0.5, 0.6)]);
        let names: Vec<_> = second_filter_points(&p)
            .into_iter()
            .map(|l| l.region)
            .collect();
        assert_eq!(names, vec!["T", "A", "B", "C"]);
    }
}
