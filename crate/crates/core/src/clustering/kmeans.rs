use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ClusterError;
use crate::registry::{StrategyRegistry, DEFAULT_ELBOW_RULE};

/// Number of clusters: fixed, or picked from the SSE curve by an elbow rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterCount {
    #[default]
    Auto,
    #[serde(untagged)]
    Fixed(usize),
}

impl fmt::Display for ClusterCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusterCount::Auto => f.write_str("auto"),
            ClusterCount::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for ClusterCount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ClusterCount::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected 'auto' or a positive integer, got '{s}'")),
            Ok(k) => Ok(ClusterCount::Fixed(k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: ClusterCount,
    pub max_iterations: usize,
    /// Independent k-means++ seedings; the lowest-SSE run wins.
    pub restarts: usize,
    pub seed: u64,
    /// Stop once no centroid moves further than this.
    pub tolerance: f64,
    /// Largest k on the SSE curve; `None` means `min(8, n - 1)`.
    pub k_max: Option<usize>,
    /// Registered name of the elbow rule used when `k` is `Auto`.
    pub elbow_rule: String,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: ClusterCount::Auto,
            max_iterations: 300,
            restarts: 20,
            seed: 42,
            tolerance: 1e-6,
            k_max: None,
            elbow_rule: DEFAULT_ELBOW_RULE.to_string(),
        }
    }
}

impl KMeansConfig {
    pub fn with_k(mut self, k: ClusterCount) -> Self {
        self.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_max = Some(k_max);
        self
    }

    pub fn with_elbow_rule(mut self, name: impl Into<String>) -> Self {
        self.elbow_rule = name.into();
        self
    }

    pub fn effective_k_max(&self, n: usize) -> usize {
        self.k_max
            .unwrap_or_else(|| 8.min(n.saturating_sub(1)))
            .min(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    /// Cluster index of each input point.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sse: f64,
    /// SSE after each Lloyd iteration of the winning run.
    pub sse_history: Vec<f64>,
    pub sse_curve: Vec<CurvePoint>,
    pub chosen_k: usize,
    pub iterations_run: usize,
    pub seed: u64,
}

impl ClusterResult {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignments
            .iter()
            .enumerate()
            .filter(move |(_, &a)| a == cluster)
            .map(|(i, _)| i)
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Sum of squared distances of points to their assigned centroids.
pub fn sse(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

pub(crate) fn validate_points(points: &[Vec<f64>]) -> Result<usize, ClusterError> {
    let first = points.first().ok_or(ClusterError::EmptyInput)?;
    let dim = first.len();
    for (index, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(ClusterError::DimensionMismatch {
                index,
                expected: dim,
                actual: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFinite { index });
        }
    }
    Ok(dim)
}

fn check_k(k: usize, n: usize) -> Result<(), ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if k > n {
        return Err(ClusterError::KTooLarge { k, points: n });
    }
    Ok(())
}

/// Nearest centroid per point. On equal distance a point keeps its current
/// cluster, otherwise the lowest index wins.
fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>], current: Option<&[usize]>) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if let Some(cur) = current {
                if sq_dist(p, &centroids[cur[i]]) == best_d {
                    return cur[i];
                }
            }
            best
        })
        .collect()
}

fn member_means(
    points: &[Vec<f64>],
    assignments: &[usize],
    k: usize,
    dim: usize,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    (sums, counts)
}

/// Centroid update. An empty cluster takes over the point farthest from its
/// own centroid among clusters with at least two members.
fn update(points: &[Vec<f64>], assignments: &mut [usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    loop {
        let (centroids, counts) = member_means(points, assignments, k, dim);
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return centroids;
        };
        let donor = points
            .iter()
            .enumerate()
            .filter(|(i, _)| counts[assignments[*i]] >= 2)
            .map(|(i, p)| (i, sq_dist(p, &centroids[assignments[i]])))
            .fold(None::<(usize, f64)>, |best, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        // k <= n guarantees a cluster with two or more members when one is empty
        let (i, _) = donor.expect("k <= n");
        assignments[i] = empty;
    }
}

struct Run {
    assignments: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    sse: f64,
    history: Vec<f64>,
    iterations: usize,
}

fn lloyd(points: &[Vec<f64>], init: Vec<Vec<f64>>, config: &KMeansConfig) -> Run {
    let k = init.len();
    let dim = points[0].len();
    let mut assignments = assign(points, &init, None);
    let mut previous = init;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let centroids = update(points, &mut assignments, k, dim);
        history.push(sse(points, &assignments, &centroids));
        let next = assign(points, &centroids, Some(&assignments));
        let shift = previous
            .iter()
            .zip(&centroids)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        let done =
            next == assignments || iterations >= config.max_iterations || shift < config.tolerance;
        previous = centroids;
        if done {
            break;
        }
        assignments = next;
    }
    let passes = transfer(points, &mut assignments, k, dim, config.max_iterations);
    if passes > 0 {
        iterations += passes;
        previous = member_means(points, &assignments, k, dim).0;
        history.push(sse(points, &assignments, &previous));
    }
    Run {
        sse: *history.last().expect("at least one iteration"),
        assignments,
        centroids: previous,
        history,
        iterations,
    }
}

/// Single-point transfers (Hartigan): moves a point to another cluster
/// whenever that lowers the total SSE, until no move does. Lloyd stops at
/// any partition where every point is nearest its own centroid; this also
/// accounts for how each move shifts both centroids. Returns the number of
/// passes that moved something.
fn transfer(
    points: &[Vec<f64>],
    assignments: &mut [usize],
    k: usize,
    dim: usize,
    max_passes: usize,
) -> usize {
    let (mut centroids, mut counts) = member_means(points, assignments, k, dim);
    let mut passes = 0;
    while passes < max_passes {
        let mut moved = false;
        for (i, p) in points.iter().enumerate() {
            let from = assignments[i];
            let n_from = counts[from] as f64;
            if counts[from] < 2 {
                continue;
            }
            let removal = n_from / (n_from - 1.0) * sq_dist(p, &centroids[from]);
            let mut best: Option<(usize, f64)> = None;
            for (c, centroid) in centroids.iter().enumerate() {
                if c == from {
                    continue;
                }
                let n_to = counts[c] as f64;
                let addition = n_to / (n_to + 1.0) * sq_dist(p, centroid);
                if best.is_none_or(|(_, b)| addition < b) {
                    best = Some((c, addition));
                }
            }
            let Some((to, addition)) = best else {
                continue;
            };
            if addition < removal - 1e-12 * (1.0 + removal) {
                assignments[i] = to;
                (centroids, counts) = member_means(points, assignments, k, dim);
                moved = true;
            }
        }
        if !moved {
            break;
        }
        passes += 1;
    }
    passes
}

/// k-means++ seeding: the first centre uniformly, then each next centre with
/// probability proportional to its squared distance from the chosen ones.
fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, &points[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            if d2[pick] == 0.0 {
                // rounding pushed past the end
                pick = d2.iter().rposition(|&w| w > 0.0).expect("total > 0");
            }
            pick
        } else {
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed.wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn into_result(run: Run, seed: u64) -> ClusterResult {
    ClusterResult {
        chosen_k: run.centroids.len(),
        assignments: run.assignments,
        centroids: run.centroids,
        sse: run.sse,
        sse_history: run.history,
        sse_curve: Vec::new(),
        iterations_run: run.iterations,
        seed,
    }
}

/// Best of `restarts` seeded runs for a fixed `k`, plus an optional warm start.
fn best_run(
    points: &[Vec<f64>],
    k: usize,
    config: &KMeansConfig,
    warm: Option<Vec<Vec<f64>>>,
) -> Run {
    let mut best: Option<Run> = None;
    let runs = (0..config.restarts.max(1))
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(config.seed, r));
            plus_plus(points, k, &mut rng)
        })
        .chain(warm);
    for init in runs {
        let run = lloyd(points, init, config);
        if best.as_ref().is_none_or(|b| run.sse < b.sse) {
            best = Some(run);
        }
    }
    best.expect("at least one run")
}

/// Lloyd's algorithm for a fixed `k`.
pub fn fit_k(
    points: &[Vec<f64>],
    k: usize,
    config: &KMeansConfig,
) -> Result<ClusterResult, ClusterError> {
    validate_points(points)?;
    check_k(k, points.len())?;
    Ok(into_result(best_run(points, k, config, None), config.seed))
}

/// Best clustering for every k in `1..=k_max`. Each k also gets a run seeded
/// from the (k-1) solution plus the point farthest from its centroid, so the
/// SSE curve never increases.
pub fn fit_range(
    points: &[Vec<f64>],
    k_max: usize,
    config: &KMeansConfig,
) -> Result<Vec<ClusterResult>, ClusterError> {
    validate_points(points)?;
    check_k(k_max, points.len())?;
    let mut out: Vec<ClusterResult> = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let warm = out.last().map(|prev| {
            let far = points
                .iter()
                .enumerate()
                .map(|(i, p)| (i, sq_dist(p, &prev.centroids[prev.assignments[i]])))
                .fold(
                    (0, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                )
                .0;
            let mut init = prev.centroids.clone();
            init.push(points[far].clone());
            init
        });
        out.push(into_result(best_run(points, k, config, warm), config.seed));
    }
    let curve: Vec<CurvePoint> = out
        .iter()
        .map(|r| CurvePoint {
            k: r.k(),
            sse: r.sse,
        })
        .collect();
    for r in &mut out {
        r.sse_curve = curve.clone();
    }
    Ok(out)
}

pub fn sse_curve(
    points: &[Vec<f64>],
    k_max: usize,
    config: &KMeansConfig,
) -> Result<Vec<CurvePoint>, ClusterError> {
    Ok(fit_range(points, k_max, config)?
        .into_iter()
        .map(|r| CurvePoint {
            k: r.k(),
            sse: r.sse,
        })
        .collect())
}

/// Clusters with `config.k`, resolving `Auto` through the elbow rule named
/// in the config. The SSE curve up to the effective `k_max` is always attached.
pub fn kmeans_with(
    points: &[Vec<f64>],
    config: &KMeansConfig,
    registry: &StrategyRegistry,
) -> Result<ClusterResult, ClusterError> {
    validate_points(points)?;
    let n = points.len();
    match config.k {
        ClusterCount::Fixed(k) => {
            let mut result = fit_k(points, k, config)?;
            let k_max = config.effective_k_max(n);
            if k_max >= 1 {
                result.sse_curve = sse_curve(points, k_max, config)?;
            }
            Ok(result)
        }
        ClusterCount::Auto => {
            let rule = registry.elbow(&config.elbow_rule)?;
            let k_max = config.effective_k_max(n);
            if k_max < 3 {
                return Err(ClusterError::CurveTooShort(k_max));
            }
            let mut results = fit_range(points, k_max, config)?;
            let chosen = rule.choose(&results[0].sse_curve)?;
            Ok(results.swap_remove(chosen - 1))
        }
    }
}

pub fn kmeans(points: &[Vec<f64>], config: &KMeansConfig) -> Result<ClusterResult, ClusterError> {
    kmeans_with(points, config, &StrategyRegistry::builtin())
}
