use std::path::PathBuf;

use stdsa_core::clustering::{baseline_kmeans, metrics, second_filter, ClusterCount, KMeansConfig};
use stdsa_core::export::write_intermediates;
use stdsa_core::ingest::load_csv;
use stdsa_core::pipeline::{run_stdsa, run_stdsa_with, SimilarityInput, Stage, StdsaOptions};
use stdsa_core::registry::StrategyRegistry;
use stdsa_core::{first_filter, normalize, similarity_profile, Dataset};

fn sample() -> Dataset {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sample_regions.csv");
    let (ds, report) = load_csv(path).unwrap();
    assert!(report.is_clean());
    ds
}

#[test]
fn reruns_differ_only_in_timestamp() {
    let ds = sample();
    let opts = StdsaOptions::default();
    let mut a = run_stdsa(&ds, "Germany", &opts).unwrap();
    let mut b = run_stdsa(&ds, "Germany", &opts).unwrap();
    a.provenance.generated_at.clear();
    b.provenance.generated_at.clear();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn stages_run_separately_agree_with_pipeline() {
    let ds = sample();
    let opts = StdsaOptions::default();
    let report = run_stdsa(&ds, "Japan", &opts).unwrap();

    let nd = normalize(&ds).unwrap();
    let neighbors = first_filter(&nd, "Japan", opts.p).unwrap();
    assert_eq!(neighbors, report.neighbor_set);
    let profile = similarity_profile(&nd, &neighbors).unwrap();
    assert_eq!(profile, report.profile);
    let second = second_filter(&profile, &opts.kmeans).unwrap();
    assert_eq!(second, report.second_filter);
    assert_eq!(second.recommended, report.stdsa_recommended);

    let registry = StrategyRegistry::builtin();
    let m = metrics(
        &second.coordinates(),
        0,
        registry.contrast(&opts.contrast_variant).unwrap().as_ref(),
        registry
            .intrinsic(&opts.intrinsic_variant)
            .unwrap()
            .as_ref(),
    )
    .unwrap();
    assert_eq!(m, report.metrics);

    let baseline = baseline_kmeans(
        &nd,
        "Japan",
        &opts.kmeans.clone().with_k(ClusterCount::Fixed(5)),
    )
    .unwrap();
    assert_eq!(baseline.recommended, report.baseline_recommended);
    assert_eq!(baseline.cluster_sizes(), report.baseline.cluster_sizes);
}

#[test]
fn report_echoes_parameters() {
    let opts = StdsaOptions {
        p: 6,
        k: ClusterCount::Fixed(4),
        kmeans: KMeansConfig::default().with_seed(7),
        ..StdsaOptions::default()
    };
    let r = run_stdsa(&sample(), "Canada", &opts).unwrap();
    assert_eq!(r.parameters.p, 6);
    assert_eq!(r.parameters.k, ClusterCount::Fixed(4));
    assert_eq!(r.parameters.chosen_k, 4);
    assert_eq!(r.parameters.seed, 7);
    assert_eq!(r.parameters.baseline_k, ClusterCount::Fixed(5));
    assert_eq!(r.neighbor_set.len(), 6);
    assert_eq!(r.provenance.regions, 10);
    assert_eq!(r.provenance.dataset_sha256.len(), 64);
}

#[test]
fn raw_similarity_input_is_selectable() {
    let ds = sample();
    let opts = StdsaOptions {
        similarity_input: SimilarityInput::Raw,
        ..StdsaOptions::default()
    };
    let raw = run_stdsa(&ds, "France", &opts).unwrap();
    let normalized = run_stdsa(&ds, "France", &StdsaOptions::default()).unwrap();
    assert_eq!(raw.neighbor_set, normalized.neighbor_set);
    assert_ne!(raw.profile, normalized.profile);
    assert_eq!(raw.parameters.similarity_input, SimilarityInput::Raw);
}

#[test]
fn comparison_is_consistent_with_sets() {
    let r = run_stdsa(&sample(), "Australia", &StdsaOptions::default()).unwrap();
    let c = &r.comparison;
    assert_eq!(c.stdsa_count, r.stdsa_recommended.len());
    assert_eq!(c.baseline_count, r.baseline_recommended.len());
    assert!(c.intersection.is_subset(&r.stdsa_recommended));
    assert_eq!(
        c.stdsa_within_baseline,
        r.stdsa_recommended.is_subset(&r.baseline_recommended)
    );
}

#[test]
fn unknown_target_fails_in_first_filter() {
    let err = run_stdsa(&sample(), "Atlantis", &StdsaOptions::default()).unwrap_err();
    assert_eq!(err.stage, Stage::FirstFilter);
    assert!(err.is_data_error());
    assert!(
        err.to_string().contains("unknown region 'Atlantis'"),
        "{err}"
    );
}

#[test]
fn unknown_variant_fails_before_any_work() {
    let opts = StdsaOptions {
        contrast_variant: "median-gap".into(),
        ..StdsaOptions::default()
    };
    let err = run_stdsa(&sample(), "Germany", &opts).unwrap_err();
    assert_eq!(err.stage, Stage::Configure);
    assert!(!err.is_data_error());
}

#[test]
fn too_many_neighbors_is_a_data_error() {
    let opts = StdsaOptions {
        p: 10,
        ..StdsaOptions::default()
    };
    let err = run_stdsa(&sample(), "Germany", &opts).unwrap_err();
    assert_eq!(err.stage, Stage::FirstFilter);
    assert!(err.is_data_error());
}

#[test]
fn intermediates_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_stdsa_with(
        &StrategyRegistry::builtin(),
        &sample(),
        "Israel",
        &StdsaOptions::default(),
    )
    .unwrap();
    let files = write_intermediates(dir.path(), &run).unwrap();
    for f in &files {
        assert!(f.exists(), "{}", f.display());
    }
    let neighbors = std::fs::read_to_string(dir.path().join("neighbors.csv")).unwrap();
    assert_eq!(neighbors.lines().count(), 1 + 1 + 8);
    assert!(neighbors.lines().nth(1).unwrap().starts_with("Israel,0,"));
    let clusters = std::fs::read_to_string(dir.path().join("baseline_clusters.csv")).unwrap();
    assert_eq!(clusters.lines().count(), 11);
}
