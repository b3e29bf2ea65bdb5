//! Generators, independent oracles and property checks shared by the
//! property suite and the acceptance runner.

#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use stdsa_core::clustering::{fit_k, KMeansConfig};
use stdsa_core::dataset::{Dataset, IndicatorTable, RegionRecord};
use stdsa_core::ingest::{read_csv, to_csv_bytes};
use stdsa_core::neighbor::first_filter;
use stdsa_core::preprocess::normalize;
use stdsa_core::schema::{Indicator, INDICATOR_COUNT};
use stdsa_core::similarity::{pearson, SimilarityError};

pub type Check = Result<(), TestCaseError>;

// ---- generators

/// 1 to 8 points in 1 to 3 dimensions, with k between 1 and min(3, n).
pub fn small_instance() -> impl Strategy<Value = (Vec<Vec<f64>>, usize)> {
    (1usize..=3, 1usize..=8).prop_flat_map(|(dim, n)| {
        (
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dim), n),
            1usize..=n.min(3),
        )
    })
}

pub fn cloud() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=4, 2usize..=40).prop_flat_map(|(dim, n)| {
        prop::collection::vec(prop::collection::vec(-100.0f64..100.0, dim), n)
    })
}

pub fn vector_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=16).prop_flat_map(|n| {
        (
            prop::collection::vec(-1e3f64..1e3, n),
            prop::collection::vec(-1e3f64..1e3, n),
        )
    })
}

fn indicator_values() -> impl Strategy<Value = [f64; INDICATOR_COUNT]> {
    (0.0f64..=1.0, prop::array::uniform8(0.0f64..500.0)).prop_map(|(infection, rest)| {
        let mut v = [0.0; INDICATOR_COUNT];
        v[0] = infection;
        v[1..].copy_from_slice(&rest);
        v
    })
}

/// Region names with characters that need CSV quoting.
fn region_name() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z ,\"'.-]{0,14}[A-Za-z]".prop_map(|s| s)
}

pub fn dataset(min: usize, max: usize) -> impl Strategy<Value = Dataset> {
    prop::collection::btree_map(region_name(), indicator_values(), min..=max).prop_map(|rows| {
        Dataset::new(
            rows.into_iter()
                .map(|(n, v)| RegionRecord::new(n, v).unwrap())
                .collect(),
        )
        .unwrap()
    })
}

/// Dataset whose infection rates come from a coarse grid, so ties occur.
pub fn tied_dataset() -> impl Strategy<Value = Dataset> {
    prop::collection::btree_map("[a-z]{1,6}", (0u8..=6, indicator_values()), 2..=30).prop_map(
        |rows| {
            let records = rows
                .into_iter()
                .map(|(n, (step, mut v))| {
                    v[0] = f64::from(step) / 6.0;
                    RegionRecord::new(n, v).unwrap()
                })
                .collect();
            Dataset::new(records).unwrap()
        },
    )
}

// ---- oracles

fn cluster_cost(points: &[Vec<f64>], labels: &[usize], blocks: usize) -> f64 {
    let dim = points[0].len();
    let mut total = 0.0;
    for c in 0..blocks {
        let members: Vec<&Vec<f64>> = points
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(p, _)| p)
            .collect();
        let m = members.len() as f64;
        for d in 0..dim {
            let mean = members.iter().map(|p| p[d]).sum::<f64>() / m;
            total += members.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>();
        }
    }
    total
}

/// Minimum SSE over every partition of `points` into at most `k` blocks.
pub fn exhaustive_sse(points: &[Vec<f64>], k: usize) -> f64 {
    fn walk(
        i: usize,
        used: usize,
        k: usize,
        labels: &mut Vec<usize>,
        points: &[Vec<f64>],
        best: &mut f64,
    ) {
        if i == points.len() {
            *best = best.min(cluster_cost(points, labels, used));
            return;
        }
        for c in 0..=used.min(k - 1) {
            labels[i] = c;
            walk(i + 1, used.max(c + 1), k, labels, points, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(0, 0, k, &mut vec![0; points.len()], points, &mut best);
    best
}

/// Pearson correlation as covariance over the product of standard deviations.
pub fn pearson_oracle(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / n;
    let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n;
    let vb = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n;
    cov / (va * vb).sqrt()
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

// ---- checks

pub fn check_kmeans_optimal(points: &[Vec<f64>], k: usize) -> Check {
    let result = fit_k(points, k, &KMeansConfig::default())
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let best = exhaustive_sse(points, k);
    prop_assert!(
        result.sse <= best + 1e-9 * (1.0 + best),
        "k={k}: k-means {} vs exhaustive {best} on {points:?}",
        result.sse
    );
    prop_assert!(result.sse >= best - 1e-9 * (1.0 + best));
    Ok(())
}

pub fn check_lloyd_monotone(points: &[Vec<f64>], k: usize, seed: u64) -> Check {
    let cfg = KMeansConfig::default().with_seed(seed).with_restarts(1);
    let result = fit_k(points, k, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for w in result.sse_history.windows(2) {
        prop_assert!(
            w[1] <= w[0] * (1.0 + 1e-12) + 1e-12,
            "history rose: {:?}",
            result.sse_history
        );
    }
    Ok(())
}

pub fn check_pearson(a: &[f64], b: &[f64], scale: f64, shift: f64) -> Check {
    if spread(a) < 1e-6 || spread(b) < 1e-6 {
        prop_assert_eq!(pearson(a, b), Err(SimilarityError::ZeroVariance));
        return Ok(());
    }
    let r = pearson(a, b).unwrap();
    prop_assert!((-1.0..=1.0).contains(&r));
    prop_assert!((r - pearson_oracle(a, b)).abs() < 1e-9);
    prop_assert_eq!(r, pearson(b, a).unwrap());
    let moved: Vec<f64> = a.iter().map(|x| scale * x + shift).collect();
    let r2 = pearson(&moved, b).unwrap();
    let expected = if scale > 0.0 { r } else { -r };
    prop_assert!((r2 - expected).abs() < 1e-9, "{r2} vs {expected}");
    prop_assert!((pearson(a, a).unwrap() - 1.0).abs() < 1e-12);
    Ok(())
}

pub fn check_knn(dataset: &Dataset, target_pick: usize, p_pick: usize) -> Check {
    let nd = normalize(dataset).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let names: Vec<&str> = nd.records().iter().map(|r| r.region()).collect();
    let target = names[target_pick % names.len()];
    let p = 1 + p_pick % (names.len() - 1);
    let got = first_filter(&nd, target, p).unwrap();

    // a region is a neighbor iff fewer than p others beat it on (distance, name)
    let origin = nd.record(target).unwrap().get(Indicator::Infection);
    let dist = |n: &str| (nd.record(n).unwrap().get(Indicator::Infection) - origin).abs();
    let expected: BTreeSet<&str> = names
        .iter()
        .copied()
        .filter(|&n| n != target)
        .filter(|&n| {
            let beaten_by = names
                .iter()
                .filter(|&&m| {
                    m != target && m != n && (dist(m) < dist(n) || (dist(m) == dist(n) && m < n))
                })
                .count();
            beaten_by < p
        })
        .collect();
    let got_set: BTreeSet<&str> = got.regions().collect();
    prop_assert_eq!(got_set, expected);
    prop_assert!(got
        .neighbors
        .windows(2)
        .all(|w| w[0].distance <= w[1].distance));
    for n in &got.neighbors {
        prop_assert_eq!(n.distance, dist(&n.region));
    }
    Ok(())
}

pub fn check_normalize(dataset: &Dataset) -> Check {
    let nd = normalize(dataset).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for ind in Indicator::ALL {
        let raw = dataset.column(ind);
        let scaled = nd.column(ind);
        for i in 0..raw.len() {
            prop_assert!((0.0..=1.0).contains(&scaled[i]));
            for j in 0..raw.len() {
                if raw[i] < raw[j] {
                    prop_assert!(scaled[i] <= scaled[j], "{ind:?}: order broken");
                }
            }
        }
    }
    let again = normalize(&nd.to_dataset().unwrap()).unwrap();
    prop_assert_eq!(again.records(), nd.records());
    Ok(())
}

pub fn check_csv_round_trip(dataset: &Dataset) -> Check {
    let bytes = to_csv_bytes(dataset);
    let (back, report) =
        read_csv(bytes.as_slice()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(report.is_clean(), "{:?}", report.rejects);
    prop_assert_eq!(&back, dataset);
    prop_assert_eq!(to_csv_bytes(&back), bytes);
    Ok(())
}
