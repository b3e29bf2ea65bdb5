//! First similarity filter: the `p` regions closest to a target on the
//! normalized infection rate.
//!
//! The search is an exact sorted scan. With a single scalar feature and a
//! few hundred regions there is nothing to gain from an index, and exactness
//! keeps results reproducible. Equal distances are ordered by region name.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::IndicatorTable;
use crate::preprocess::NormalizedDataset;
use crate::schema::Indicator;

pub const DEFAULT_NEIGHBORS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NeighborError {
    #[error("unknown region '{0}'")]
    UnknownRegion(String),
    #[error("p = {p} exceeds the {available} other regions available")]
    PTooLarge { p: usize, available: usize },
    #[error("p must be positive")]
    ZeroNeighbors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub region: String,
    pub distance: f64,
}

/// Target plus its `p` nearest regions, closest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborSet {
    pub target: String,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborSet {
    pub fn regions(&self) -> impl Iterator<Item = &str> {
        self.neighbors.iter().map(|n| n.region.as_str())
    }

    pub fn contains(&self, region: &str) -> bool {
        self.regions().any(|r| r == region)
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

fn by_distance_then_name(a: &Neighbor, b: &Neighbor) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.region.cmp(&b.region))
}

pub fn first_filter(
    normalized: &NormalizedDataset,
    target: &str,
    p: usize,
) -> Result<NeighborSet, NeighborError> {
    nearest_on(normalized, Indicator::Infection, target, p)
}

/// `p` nearest regions to `target` by absolute difference on one indicator.
pub fn nearest_on(
    table: &impl IndicatorTable,
    indicator: Indicator,
    target: &str,
    p: usize,
) -> Result<NeighborSet, NeighborError> {
    let target_record = table
        .record(target)
        .ok_or_else(|| NeighborError::UnknownRegion(target.trim().to_string()))?;
    if p == 0 {
        return Err(NeighborError::ZeroNeighbors);
    }
    let available = table.len() - 1;
    if p > available {
        return Err(NeighborError::PTooLarge { p, available });
    }
    let origin = target_record.get(indicator);
    let mut candidates: Vec<Neighbor> = table
        .records()
        .iter()
        .filter(|r| r.region() != target_record.region())
        .map(|r| Neighbor {
            region: r.region().to_string(),
            distance: (r.get(indicator) - origin).abs(),
        })
        .collect();
    candidates.sort_by(by_distance_then_name);
    candidates.truncate(p);
    Ok(NeighborSet {
        target: target_record.region().to_string(),
        neighbors: candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dataset, RegionRecord};
    use crate::preprocess::normalize;

    fn infection_only(rates: &[(&str, f64)]) -> NormalizedDataset {
        let rows = rates
            .iter()
            .map(|(n, i)| {
                RegionRecord::new(n, [*i, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap()
            })
            .collect();
        normalize(&Dataset::new(rows).unwrap()).unwrap()
    }

    #[test]
    fn toy_three_regions() {
        // raw 0.1 / 0.2 / 0.9 normalize to 0, 0.125, 1
        let n = infection_only(&[("A", 0.1), ("B", 0.2), ("C", 0.9)]);
        let set = first_filter(&n, "A", 1).unwrap();
        assert_eq!(set.target, "A");
        assert_eq!(set.neighbors.len(), 1);
        assert_eq!(set.neighbors[0].region, "B");
        assert!((set.neighbors[0].distance - 0.125).abs() < 1e-12);
    }

    #[test]
    fn unit_interval_toy() {
        let n = infection_only(&[("A", 0.0), ("B", 0.1), ("C", 0.2), ("D", 0.9), ("E", 1.0)]);
        let set = first_filter(&n, "B", 2).unwrap();
        let names: Vec<_> = set.regions().collect();
        // A and C are both 0.1 away; name order breaks the tie
        assert_eq!(names, vec!["A", "C"]);
        assert!(!set.contains("B"));
    }

    #[test]
    fn errors() {
        let n = infection_only(&[("A", 0.0), ("B", 0.1), ("C", 0.2)]);
        assert_eq!(
            first_filter(&n, "Atlantis", 1),
            Err(NeighborError::UnknownRegion("Atlantis".into()))
        );
        assert_eq!(
            first_filter(&n, "A", 3),
            Err(NeighborError::PTooLarge { p: 3, available: 2 })
        );
        assert_eq!(first_filter(&n, "A", 0), Err(NeighborError::ZeroNeighbors));
    }

    #[test]
    fn symmetric_distance_for_mutual_nearest() {
        let n = infection_only(&[("A", 0.0), ("B", 0.05), ("C", 0.5), ("D", 1.0)]);
        let ab = first_filter(&n, "A", 1).unwrap();
        let ba = first_filter(&n, "B", 1).unwrap();
        assert_eq!(ab.neighbors[0].region, "B");
        assert_eq!(ba.neighbors[0].region, "A");
        assert_eq!(ab.neighbors[0].distance, ba.neighbors[0].distance);
    }
}
