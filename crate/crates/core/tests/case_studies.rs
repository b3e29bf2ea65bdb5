//! Second filter on published (alpha, beta) similarity values for two
//! targets, checked against exhaustive-search SSE and hand-built metrics.

use std::collections::BTreeSet;

use approx::assert_relative_eq;
use stdsa_core::clustering::{choose_k_elbow, second_filter, CurvePoint, KMeansConfig};
use stdsa_core::similarity::{SimilarityEntry, SimilarityProfile};

fn profile(target: &str, rows: &[(&str, f64, f64)]) -> SimilarityProfile {
    SimilarityProfile {
        target: target.to_string(),
        entries: rows
            .iter()
            .map(|&(r, a, b)| SimilarityEntry::new(r, a, b))
            .collect(),
    }
}

fn sweden() -> SimilarityProfile {
    profile(
        "Sweden",
        &[
            ("United States", 0.80, 0.50),
            ("Uruguay", 0.73, 0.39),
            ("Norway", 0.55, 0.98),
            ("Greece", 0.85, 0.66),
            ("Spain", 1.00, 0.94),
            ("Croatia", 0.81, 0.08),
            ("Ireland", 0.92, 0.92),
            ("Italy", 0.99, 0.88),
        ],
    )
}

fn china() -> SimilarityProfile {
    profile(
        "China",
        &[
            ("Taiwan", -0.77, 0.77),
            ("Egypt", -0.39, 0.94),
            ("Algeria", -0.66, 0.94),
            ("Cambodia", 0.10, 0.87),
            ("Myanmar", 0.41, 0.93),
            ("Bangladesh", 0.27, 0.80),
            ("Saudi Arabia", 0.39, 0.21),
            ("Indonesia", 0.02, 0.91),
        ],
    )
}

/// Optimal SSE for each number of non-empty clusters, by walking every set
/// partition as a restricted growth string. Index 0 is unused.
fn brute_force_sse(points: &[[f64; 2]]) -> Vec<f64> {
    fn walk(i: usize, used: usize, labels: &mut [usize], points: &[[f64; 2]], best: &mut [f64]) {
        if i == points.len() {
            let mut total = 0.0;
            for c in 0..used {
                let members: Vec<&[f64; 2]> = points
                    .iter()
                    .zip(labels.iter())
                    .filter(|(_, &l)| l == c)
                    .map(|(p, _)| p)
                    .collect();
                let m = members.len() as f64;
                let cx = members.iter().map(|p| p[0]).sum::<f64>() / m;
                let cy = members.iter().map(|p| p[1]).sum::<f64>() / m;
                total += members
                    .iter()
                    .map(|p| (p[0] - cx).powi(2) + (p[1] - cy).powi(2))
                    .sum::<f64>();
            }
            best[used] = best[used].min(total);
            return;
        }
        for c in 0..=used {
            labels[i] = c;
            walk(i + 1, used.max(c + 1), labels, points, best);
        }
    }
    let mut best = vec![f64::INFINITY; points.len() + 1];
    walk(0, 0, &mut vec![0; points.len()], points, &mut best);
    best
}

fn all_points(p: &SimilarityProfile) -> Vec<[f64; 2]> {
    std::iter::once([1.0, 1.0])
        .chain(p.entries.iter().map(|e| [e.alpha, e.beta]))
        .collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn sse_curves_match_exhaustive_search() {
    for p in [sweden(), china()] {
        let r = second_filter(&p, &KMeansConfig::default()).unwrap();
        let best_by_k = brute_force_sse(&all_points(&p));
        for CurvePoint { k, sse } in &r.clustering.sse_curve {
            let best = best_by_k[*k];
            assert!(
                (sse - best).abs() < 1e-9,
                "{} k={k}: {sse} vs optimum {best}",
                p.target
            );
        }
    }
}

#[test]
fn elbow_lands_on_four() {
    for p in [sweden(), china()] {
        let r = second_filter(&p, &KMeansConfig::default()).unwrap();
        assert_eq!(r.clustering.chosen_k, 4, "{}", p.target);
        assert_eq!(choose_k_elbow(&r.clustering.sse_curve).unwrap(), 4);
    }
}

#[test]
fn sweden_recommendations() {
    let r = second_filter(&sweden(), &KMeansConfig::default()).unwrap();
    assert_eq!(r.recommended, set(&["Ireland", "Italy", "Spain"]));
}

#[test]
fn china_stands_alone() {
    let r = second_filter(&china(), &KMeansConfig::default()).unwrap();
    assert!(r.recommended.is_empty(), "{:?}", r.recommended);
}

#[test]
fn sweden_sse_curve_values() {
    let r = second_filter(&sweden(), &KMeansConfig::default()).unwrap();
    let sse: Vec<f64> = r.clustering.sse_curve.iter().map(|c| c.sse).collect();
    // k = 1: squared distances to the mean of all nine points
    let pts = all_points(&sweden());
    let mx = pts.iter().map(|p| p[0]).sum::<f64>() / 9.0;
    let my = pts.iter().map(|p| p[1]).sum::<f64>() / 9.0;
    let total: f64 = pts
        .iter()
        .map(|p| (p[0] - mx).powi(2) + (p[1] - my).powi(2))
        .sum();
    assert_relative_eq!(sse[0], total, epsilon = 1e-12);
    assert!(sse.windows(2).all(|w| w[1] <= w[0]));
}
