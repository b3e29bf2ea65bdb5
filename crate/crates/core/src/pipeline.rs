//! End-to-end run: normalize, first filter, per-dimension similarity, second
//! filter, metrics, and the all-regions baseline for comparison.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::clustering::{
    baseline_kmeans_with, metrics, second_filter_with, BaselineResult, ClusterCount, ClusterError,
    CurvePoint, KMeansConfig, MetricsError, MetricsReport, SecondFilterResult,
};
use crate::dataset::{Dataset, IndicatorTable};
use crate::ingest::to_csv_bytes;
use crate::neighbor::{first_filter, NeighborError, NeighborSet, DEFAULT_NEIGHBORS};
use crate::preprocess::{normalize, NormalizedDataset, PreprocessError};
use crate::registry::{RegistryError, StrategyRegistry, DEFAULT_CONTRAST, DEFAULT_INTRINSIC};
use crate::similarity::{similarity_profile, SimilarityError, SimilarityProfile};

pub const DEFAULT_BASELINE_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityInput {
    /// Min-max scaled values.
    #[default]
    Normalized,
    /// Raw indicator values.
    Raw,
}

impl fmt::Display for SimilarityInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimilarityInput::Normalized => "normalized",
            SimilarityInput::Raw => "raw",
        })
    }
}

impl std::str::FromStr for SimilarityInput {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "normalized" => Ok(SimilarityInput::Normalized),
            "raw" => Ok(SimilarityInput::Raw),
            other => Err(format!("expected 'normalized' or 'raw', got '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdsaOptions {
    pub p: usize,
    pub k: ClusterCount,
    pub baseline_k: ClusterCount,
    /// Seed, restarts, iteration limits and elbow rule shared by both clusterings.
    pub kmeans: KMeansConfig,
    pub similarity_input: SimilarityInput,
    pub contrast_variant: String,
    pub intrinsic_variant: String,
}

impl Default for StdsaOptions {
    fn default() -> Self {
        Self {
            p: DEFAULT_NEIGHBORS,
            k: ClusterCount::Auto,
            baseline_k: ClusterCount::Fixed(DEFAULT_BASELINE_K),
            kmeans: KMeansConfig::default(),
            similarity_input: SimilarityInput::Normalized,
            contrast_variant: DEFAULT_CONTRAST.to_string(),
            intrinsic_variant: DEFAULT_INTRINSIC.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Configure,
    Normalize,
    FirstFilter,
    Similarity,
    SecondFilter,
    Metrics,
    Baseline,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Configure => "configure",
            Stage::Normalize => "normalize",
            Stage::FirstFilter => "first_filter",
            Stage::Similarity => "similarity",
            Stage::SecondFilter => "second_filter",
            Stage::Metrics => "metrics",
            Stage::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StageError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Neighbor(#[from] NeighborError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("stage {stage}: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: StageError,
}

impl PipelineError {
    /// Whether the failure stems from the input data or request (unknown
    /// region, too few regions, degenerate values) rather than a fault.
    pub fn is_data_error(&self) -> bool {
        match &self.source {
            StageError::Registry(_) => false,
            StageError::Preprocess(_)
            | StageError::Neighbor(_)
            | StageError::Similarity(_)
            | StageError::Metrics(_) => true,
            StageError::Cluster(e) => !matches!(e, ClusterError::Registry(_)),
        }
    }
}

fn at<E: Into<StageError>>(stage: Stage) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError {
        stage,
        source: e.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub p: usize,
    pub k: ClusterCount,
    pub chosen_k: usize,
    pub baseline_k: ClusterCount,
    pub baseline_chosen_k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub elbow_rule: String,
    pub similarity_input: SimilarityInput,
    pub contrast_variant: String,
    pub intrinsic_variant: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCluster {
    pub region: String,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub k: usize,
    pub cluster_sizes: Vec<usize>,
    pub sse: f64,
    pub sse_curve: Vec<CurvePoint>,
    pub assignments: Vec<RegionCluster>,
}

impl From<&BaselineResult> for BaselineSummary {
    fn from(b: &BaselineResult) -> Self {
        Self {
            k: b.clustering.k(),
            cluster_sizes: b.cluster_sizes(),
            sse: b.clustering.sse,
            sse_curve: b.clustering.sse_curve.clone(),
            assignments: b
                .regions
                .iter()
                .zip(&b.clustering.assignments)
                .map(|(region, &cluster)| RegionCluster {
                    region: region.clone(),
                    cluster,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub stdsa_count: usize,
    pub baseline_count: usize,
    pub intersection: BTreeSet<String>,
    /// Every region recommended by the two-stage filter is also in the
    /// target's baseline cluster.
    pub stdsa_within_baseline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset_sha256: String,
    pub regions: usize,
    pub generated_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationReport {
    pub target: String,
    pub parameters: Parameters,
    pub neighbor_set: NeighborSet,
    pub profile: SimilarityProfile,
    pub second_filter: SecondFilterResult,
    pub stdsa_recommended: BTreeSet<String>,
    pub baseline: BaselineSummary,
    pub baseline_recommended: BTreeSet<String>,
    pub metrics: MetricsReport,
    pub comparison: Comparison,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl RecommendationReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// Intermediate artifacts of a run, kept for debugging and export.
#[derive(Debug, Clone)]
pub struct StdsaRun {
    pub normalized: NormalizedDataset,
    pub baseline: BaselineResult,
    pub report: RecommendationReport,
}

pub fn dataset_checksum(dataset: &Dataset) -> String {
    hex::encode(Sha256::digest(to_csv_bytes(dataset)))
}

pub fn compare(report: &RecommendationReport) -> Comparison {
    compare_sets(&report.stdsa_recommended, &report.baseline_recommended)
}

pub fn compare_sets(stdsa: &BTreeSet<String>, baseline: &BTreeSet<String>) -> Comparison {
    let intersection: BTreeSet<String> = stdsa.intersection(baseline).cloned().collect();
    Comparison {
        stdsa_count: stdsa.len(),
        baseline_count: baseline.len(),
        stdsa_within_baseline: intersection.len() == stdsa.len(),
        intersection,
    }
}

pub fn run_stdsa(
    dataset: &Dataset,
    target: &str,
    options: &StdsaOptions,
) -> Result<RecommendationReport, PipelineError> {
    run_stdsa_with(&StrategyRegistry::builtin(), dataset, target, options).map(|run| run.report)
}

pub fn run_stdsa_with(
    registry: &StrategyRegistry,
    dataset: &Dataset,
    target: &str,
    options: &StdsaOptions,
) -> Result<StdsaRun, PipelineError> {
    let contrast = registry
        .contrast(&options.contrast_variant)
        .map_err(at(Stage::Configure))?;
    let intrinsic = registry
        .intrinsic(&options.intrinsic_variant)
        .map_err(at(Stage::Configure))?;
    registry
        .elbow(&options.kmeans.elbow_rule)
        .map_err(at(Stage::Configure))?;

    let mut warnings = Vec::new();
    let normalized = normalize(dataset).map_err(at(Stage::Normalize))?;
    warnings.extend(
        normalized
            .degenerate()
            .iter()
            .map(|i| format!("indicator {i} is constant across regions; normalized to 0")),
    );

    let neighbor_set =
        first_filter(&normalized, target, options.p).map_err(at(Stage::FirstFilter))?;

    let profile = match options.similarity_input {
        SimilarityInput::Normalized => similarity_profile(&normalized, &neighbor_set),
        SimilarityInput::Raw => similarity_profile(dataset, &neighbor_set),
    }
    .map_err(at(Stage::Similarity))?;
    for e in &profile.entries {
        if e.alpha_degenerate || e.beta_degenerate {
            warnings.push(format!("{}: zero-variance similarity set to 0", e.region));
        }
    }

    let second_cfg = options.kmeans.clone().with_k(options.k);
    let second =
        second_filter_with(&profile, &second_cfg, registry).map_err(at(Stage::SecondFilter))?;

    let metrics = metrics(
        &second.coordinates(),
        0,
        contrast.as_ref(),
        intrinsic.as_ref(),
    )
    .map_err(at(Stage::Metrics))?;

    let baseline_cfg = options.kmeans.clone().with_k(options.baseline_k);
    let baseline = baseline_kmeans_with(&normalized, &neighbor_set.target, &baseline_cfg, registry)
        .map_err(at(Stage::Baseline))?;

    let stdsa_recommended = second.recommended.clone();
    let baseline_recommended = baseline.recommended.clone();
    let comparison = compare_sets(&stdsa_recommended, &baseline_recommended);

    let report = RecommendationReport {
        target: neighbor_set.target.clone(),
        parameters: Parameters {
            p: options.p,
            k: options.k,
            chosen_k: second.clustering.chosen_k,
            baseline_k: options.baseline_k,
            baseline_chosen_k: baseline.clustering.chosen_k,
            seed: options.kmeans.seed,
            restarts: options.kmeans.restarts,
            max_iterations: options.kmeans.max_iterations,
            tolerance: options.kmeans.tolerance,
            elbow_rule: options.kmeans.elbow_rule.clone(),
            similarity_input: options.similarity_input,
            contrast_variant: contrast.name().to_string(),
            intrinsic_variant: intrinsic.name().to_string(),
        },
        neighbor_set,
        profile,
        second_filter: second,
        stdsa_recommended,
        baseline: BaselineSummary::from(&baseline),
        baseline_recommended,
        metrics,
        comparison,
        warnings,
        provenance: Provenance {
            dataset_sha256: dataset_checksum(dataset),
            regions: dataset.len(),
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        },
    };
    Ok(StdsaRun {
        normalized,
        baseline,
        report,
    })
}

fn join(set: &BTreeSet<String>) -> String {
    if set.is_empty() {
        "(none)".to_string()
    } else {
        set.iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Human-readable summary of a report.
pub fn render_text(report: &RecommendationReport) -> String {
    let mut out = String::new();
    let p = &report.parameters;
    let _ = writeln!(out, "Target: {}", report.target);
    let _ = writeln!(
        out,
        "Parameters: p={} k={} (chosen {}) baseline_k={} (chosen {}) seed={} restarts={} elbow={}",
        p.p, p.k, p.chosen_k, p.baseline_k, p.baseline_chosen_k, p.seed, p.restarts, p.elbow_rule
    );
    let _ = writeln!(out, "\nFirst filter (infection distance):");
    for n in &report.neighbor_set.neighbors {
        let _ = writeln!(out, "  {:<32} {:.4}", n.region, n.distance);
    }
    let _ = writeln!(
        out,
        "\nSimilarity ({} input):          national_base  mass_base",
        p.similarity_input
    );
    for e in &report.profile.entries {
        let _ = writeln!(out, "  {:<32} {:>13.2} {:>10.2}", e.region, e.alpha, e.beta);
    }
    let _ = writeln!(out, "\nRecommended: {}", join(&report.stdsa_recommended));
    let _ = writeln!(
        out,
        "Baseline (k={}, sizes {:?}): {} regions share the target's cluster",
        report.baseline.k,
        report.baseline.cluster_sizes,
        report.baseline_recommended.len()
    );
    let c = &report.comparison;
    let _ = writeln!(
        out,
        "Overlap: {} of {} recommended regions are in the baseline cluster (contained: {})",
        c.intersection.len(),
        c.stdsa_count,
        c.stdsa_within_baseline
    );
    let _ = writeln!(
        out,
        "Metrics: contrast {:.2} ({}), intrinsic dim {:.2} ({})",
        report.metrics.contrast,
        report.metrics.contrast_variant,
        report.metrics.intrinsic_dim,
        report.metrics.intrinsic_variant
    );
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    let _ = writeln!(
        out,
        "Dataset sha256 {} ({} regions), generated {}",
        report.provenance.dataset_sha256, report.provenance.regions, report.provenance.generated_at
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn comparison_containment() {
        let c = compare_sets(
            &set(&["Spain", "Italy"]),
            &set(&["Spain", "Italy", "France"]),
        );
        assert!(c.stdsa_within_baseline);
        assert_eq!(c.intersection, set(&["Italy", "Spain"]));
        assert_eq!((c.stdsa_count, c.baseline_count), (2, 3));

        let empty = compare_sets(&BTreeSet::new(), &set(&["France"]));
        assert!(empty.intersection.is_empty());
        assert!(empty.stdsa_within_baseline);

        let outside = compare_sets(&set(&["Peru"]), &set(&["France"]));
        assert!(!outside.stdsa_within_baseline);
    }

    #[test]
    fn similarity_input_parsing() {
        assert_eq!(
            "raw".parse::<SimilarityInput>().unwrap(),
            SimilarityInput::Raw
        );
        assert!("zscore".parse::<SimilarityInput>().is_err());
    }
}
