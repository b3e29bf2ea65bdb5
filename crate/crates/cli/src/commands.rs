use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;
use stdsa_core::clustering::{
    baseline_kmeans_with, metrics, sse_curve, CurvePoint, KMeansConfig, MetricsReport,
};
use stdsa_core::export::{
    write_assignments, write_box_stats, write_correlation, write_intermediates, write_sse_curve,
};
use stdsa_core::ingest::{load_csv, save_dataset, save_normalized, IngestReport};
use stdsa_core::pipeline::{
    render_text, run_stdsa_with, BaselineSummary, StdsaOptions, DEFAULT_BASELINE_K,
};
use stdsa_core::preprocess::{box_stats, pcc_matrix, BoxSummary, CorrelationMatrix};
use stdsa_core::registry::{StrategyRegistry, DEFAULT_CONTRAST, DEFAULT_INTRINSIC};
use stdsa_core::{normalize, ClusterCount, Dataset, Indicator, IndicatorTable};

use crate::config::ConfigFile;
use crate::error::CliError;
use crate::{ClusterArgs, Command, Common, Format, RecommendArgs};

const DATASET_ENV: &str = "STDSA_DATASET";

struct Context {
    config: ConfigFile,
    dataset: Option<PathBuf>,
    format: Format,
    output_dir: Option<PathBuf>,
    registry: StrategyRegistry,
}

impl Context {
    fn new(common: Common) -> Result<Self, CliError> {
        let config = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let dataset = common
            .dataset
            .or_else(|| config.get("dataset").map(PathBuf::from))
            .or_else(|| std::env::var_os(DATASET_ENV).map(PathBuf::from));
        let format = config
            .pick(common.format, "format")?
            .unwrap_or(Format::Text);
        let output_dir = common
            .output_dir
            .or_else(|| config.get("output_dir").map(PathBuf::from));
        Ok(Self {
            config,
            dataset,
            format,
            output_dir,
            registry: StrategyRegistry::builtin(),
        })
    }

    fn load(&self) -> Result<(Dataset, IngestReport), CliError> {
        let path = self.dataset.as_ref().ok_or_else(|| {
            CliError::usage(format!(
                "no dataset given (use --dataset, a config file, or ${DATASET_ENV})"
            ))
        })?;
        load_csv(path).map_err(CliError::load)
    }

    /// Loads the dataset, logging skipped rows.
    fn dataset(&self) -> Result<Dataset, CliError> {
        let (ds, report) = self.load()?;
        for reject in &report.rejects {
            log::warn!("skipped line {}: {}", reject.line, reject.reason);
        }
        Ok(ds)
    }

    fn kmeans(&self, args: &ClusterArgs) -> Result<KMeansConfig, CliError> {
        let mut cfg = KMeansConfig::default();
        if let Some(seed) = self.config.pick(args.seed, "seed")? {
            cfg.seed = seed;
        }
        if let Some(restarts) = self.config.pick(args.restarts, "restarts")? {
            if restarts == 0 {
                return Err(CliError::usage("--restarts must be positive"));
            }
            cfg.restarts = restarts;
        }
        if let Some(rule) = self.config.pick(args.elbow_rule.clone(), "elbow_rule")? {
            cfg.elbow_rule = rule;
        }
        self.registry
            .elbow(&cfg.elbow_rule)
            .map_err(|e| CliError::usage(e.to_string()))?;
        Ok(cfg)
    }

    /// Contrast and intrinsic variant names from `--metric-variant` and the config.
    fn variants(&self, flags: &[String]) -> Result<(String, String), CliError> {
        let mut contrast = self
            .config
            .get("contrast")
            .unwrap_or(DEFAULT_CONTRAST)
            .to_string();
        let mut intrinsic = self
            .config
            .get("intrinsic")
            .unwrap_or(DEFAULT_INTRINSIC)
            .to_string();
        for flag in flags {
            match flag.split_once('=') {
                Some(("contrast", name)) => contrast = name.trim().to_string(),
                Some(("intrinsic", name)) => intrinsic = name.trim().to_string(),
                _ => {
                    return Err(CliError::usage(format!(
                        "--metric-variant expects contrast=NAME or intrinsic=NAME, got '{flag}'"
                    )))
                }
            }
        }
        self.registry
            .contrast(&contrast)
            .map_err(|e| CliError::usage(e.to_string()))?;
        self.registry
            .intrinsic(&intrinsic)
            .map_err(|e| CliError::usage(e.to_string()))?;
        Ok((contrast, intrinsic))
    }

    fn out_dir(&self) -> Result<Option<&Path>, CliError> {
        match &self.output_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::write(format!("{}: {e}", dir.display())))?;
                Ok(Some(dir))
            }
            None => Ok(None),
        }
    }

    fn emit<T: Serialize>(
        &self,
        value: &T,
        text: impl FnOnce() -> String,
        csv: impl FnOnce() -> String,
    ) -> Result<(), CliError> {
        match self.format {
            Format::Json => println!("{}", to_json(value)?),
            Format::Text => print!("{}", text()),
            Format::Csv => print!("{}", csv()),
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::internal(format!("json: {e}")))
}

fn create(dir: &Path, name: &str) -> Result<File, CliError> {
    let path = dir.join(name);
    File::create(&path).map_err(|e| CliError::write(format!("{}: {e}", path.display())))
}

fn write_text(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| CliError::write(format!("{}: {e}", path.display())))
}

fn csv_string(
    write: impl FnOnce(&mut Vec<u8>) -> Result<(), stdsa_core::ingest::IngestError>,
) -> String {
    let mut buf = Vec::new();
    // in-memory writes do not fail
    write(&mut buf).expect("in-memory csv");
    String::from_utf8(buf).expect("csv output is utf-8")
}

fn file_stem(target: &str) -> String {
    target
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

pub fn run(common: Common, command: Command) -> Result<(), CliError> {
    let ctx = Context::new(common)?;
    match command {
        Command::Ingest => ingest(&ctx),
        Command::Stats { indicator, cluster } => stats(&ctx, indicator.as_deref(), &cluster),
        Command::Recommend(args) => recommend(&ctx, &args),
        Command::Baseline {
            target,
            baseline_k,
            cluster,
        } => baseline(&ctx, &target, baseline_k, &cluster),
        Command::Metrics {
            points,
            query,
            target,
            metric_variant,
        } => match (points, target) {
            (Some(points), _) => metrics_from_points(&ctx, &points, query, &metric_variant),
            (None, Some(target)) => metrics_for_target(&ctx, &target, &metric_variant),
            (None, None) => Err(CliError::usage("metrics needs --points or --target")),
        },
    }
}

fn ingest(ctx: &Context) -> Result<(), CliError> {
    let (ds, report) = ctx.load()?;
    if let Some(dir) = ctx.out_dir()? {
        save_dataset(&ds, dir.join("dataset.csv")).map_err(CliError::write)?;
        let nd = normalize(&ds).map_err(|e| CliError::data(format!("stage normalize: {e}")))?;
        save_normalized(&nd, dir.join("normalized.csv")).map_err(CliError::write)?;
    }
    ctx.emit(
        &report,
        || {
            let mut s = format!(
                "rows read {}, accepted {}, rejected {}\n",
                report.rows_read,
                report.rows_accepted,
                report.rejects.len()
            );
            for r in &report.rejects {
                let _ = writeln!(s, "  line {}: {}", r.line, r.reason);
            }
            s
        },
        || {
            let mut s = String::from("line,reason\n");
            for r in &report.rejects {
                let _ = writeln!(
                    s,
                    "{},\"{}\"",
                    r.line,
                    r.reason.to_string().replace('"', "\"\"")
                );
            }
            s
        },
    )
}

#[derive(Serialize)]
struct StatsOutput<'a> {
    box_stats: Vec<&'a BoxSummary>,
    correlation: &'a CorrelationMatrix,
    sse_curve: Vec<CurvePoint>,
    elbow_k: Option<usize>,
}

fn stats(ctx: &Context, indicator: Option<&str>, cluster: &ClusterArgs) -> Result<(), CliError> {
    let ds = ctx.dataset()?;
    let only = indicator
        .map(|key| {
            Indicator::from_key(key)
                .ok_or_else(|| CliError::usage(format!("unknown indicator '{key}'")))
        })
        .transpose()?;
    let data_err = |e: &dyn std::fmt::Display| CliError::data(format!("stage stats: {e}"));
    let boxes = box_stats(&ds).map_err(|e| data_err(&e))?;
    let pcc = pcc_matrix(&ds).map_err(|e| data_err(&e))?;
    let nd = normalize(&ds).map_err(|e| CliError::data(format!("stage normalize: {e}")))?;
    let points: Vec<Vec<f64>> = nd.records().iter().map(|r| r.values().to_vec()).collect();
    let cfg = ctx.kmeans(cluster)?;
    let curve =
        sse_curve(&points, cfg.effective_k_max(points.len()), &cfg).map_err(|e| data_err(&e))?;
    let elbow_k = ctx
        .registry
        .elbow(&cfg.elbow_rule)
        .ok()
        .and_then(|rule| rule.choose(&curve).ok());

    if let Some(dir) = ctx.out_dir()? {
        write_box_stats(&boxes, create(dir, "box_stats.csv")?).map_err(CliError::write)?;
        write_correlation(&pcc, create(dir, "pcc.csv")?).map_err(CliError::write)?;
        write_sse_curve(&curve, create(dir, "sse_curve.csv")?).map_err(CliError::write)?;
    }

    let selected: Vec<&BoxSummary> = boxes
        .summaries
        .iter()
        .filter(|s| only.is_none_or(|i| s.indicator == i))
        .collect();
    let out = StatsOutput {
        box_stats: selected.clone(),
        correlation: &pcc,
        sse_curve: curve.clone(),
        elbow_k,
    };
    ctx.emit(
        &out,
        || {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{:<28} {:>9} {:>9} {:>9} {:>9} {:>9}  outliers",
                "indicator", "min", "q1", "median", "q3", "max"
            );
            for b in &selected {
                let names: Vec<&str> = b.outliers.iter().map(|o| o.region.as_str()).collect();
                let _ = writeln!(
                    s,
                    "{:<28} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3}  {}",
                    b.indicator.key(),
                    b.min,
                    b.q1,
                    b.median,
                    b.q3,
                    b.max,
                    if names.is_empty() {
                        "-".to_string()
                    } else {
                        names.join(", ")
                    }
                );
            }
            let _ = writeln!(s, "\nSSE curve over all regions:");
            for c in &curve {
                let _ = writeln!(s, "  k={:<2} {:.6}", c.k, c.sse);
            }
            if let Some(k) = elbow_k {
                let _ = writeln!(s, "elbow ({}): k={k}", cfg.elbow_rule);
            }
            s
        },
        || {
            let filtered = stdsa_core::preprocess::IndicatorStats {
                summaries: selected.iter().map(|b| (*b).clone()).collect(),
            };
            csv_string(|buf| write_box_stats(&filtered, buf))
        },
    )
}

fn options(ctx: &Context, args: &RecommendArgs) -> Result<StdsaOptions, CliError> {
    let (contrast_variant, intrinsic_variant) = ctx.variants(&args.metric_variant)?;
    let defaults = StdsaOptions::default();
    Ok(StdsaOptions {
        p: ctx.config.pick(args.p, "p")?.unwrap_or(defaults.p),
        k: ctx.config.pick(args.k, "k")?.unwrap_or(defaults.k),
        baseline_k: ctx
            .config
            .pick(args.baseline_k, "baseline_k")?
            .unwrap_or(defaults.baseline_k),
        kmeans: ctx.kmeans(&args.cluster)?,
        similarity_input: ctx
            .config
            .pick(args.similarity_input, "similarity_input")?
            .unwrap_or(defaults.similarity_input),
        contrast_variant,
        intrinsic_variant,
    })
}

fn recommend(ctx: &Context, args: &RecommendArgs) -> Result<(), CliError> {
    let opts = options(ctx, args)?;
    if args.keep_intermediate && ctx.output_dir.is_none() {
        return Err(CliError::usage("--keep-intermediate needs --output-dir"));
    }
    let ds = ctx.dataset()?;
    let run = run_stdsa_with(&ctx.registry, &ds, &args.target, &opts)?;
    let report = &run.report;

    if let Some(dir) = ctx.out_dir()? {
        let stem = file_stem(&report.target);
        write_text(dir, &format!("report_{stem}.json"), &to_json(report)?)?;
        if args.keep_intermediate {
            write_intermediates(dir, &run).map_err(CliError::write)?;
            save_normalized(&run.normalized, dir.join("normalized.csv"))
                .map_err(CliError::write)?;
        }
    }
    ctx.emit(report, || render_text(report), || second_filter_csv(report))
}

fn second_filter_csv(report: &stdsa_core::RecommendationReport) -> String {
    let second = &report.second_filter;
    let mut s = String::from("region,national_base,mass_base,cluster,recommended\n");
    for (p, &cluster) in second.points.iter().zip(&second.clustering.assignments) {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            csv_field(&p.region),
            p.point[0],
            p.point[1],
            cluster,
            report.stdsa_recommended.contains(&p.region)
        );
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct BaselineOutput {
    target: String,
    requested_k: ClusterCount,
    seed: u64,
    restarts: usize,
    recommended: BTreeSet<String>,
    #[serde(flatten)]
    summary: BaselineSummary,
}

fn baseline(
    ctx: &Context,
    target: &str,
    k: Option<ClusterCount>,
    cluster: &ClusterArgs,
) -> Result<(), CliError> {
    let requested = ctx
        .config
        .pick(k, "baseline_k")?
        .unwrap_or(ClusterCount::Fixed(DEFAULT_BASELINE_K));
    let cfg = ctx.kmeans(cluster)?.with_k(requested);
    let ds = ctx.dataset()?;
    let nd = normalize(&ds).map_err(|e| CliError::data(format!("stage normalize: {e}")))?;
    let b = baseline_kmeans_with(&nd, target, &cfg, &ctx.registry)
        .map_err(|e| CliError::data(format!("stage baseline: {e}")))?;
    let out = BaselineOutput {
        target: b.target.clone(),
        requested_k: requested,
        seed: cfg.seed,
        restarts: cfg.restarts,
        recommended: b.recommended.clone(),
        summary: BaselineSummary::from(&b),
    };
    if let Some(dir) = ctx.out_dir()? {
        write_text(
            dir,
            &format!("baseline_{}.json", file_stem(&out.target)),
            &to_json(&out)?,
        )?;
        write_assignments(
            &b.regions,
            &b.clustering.assignments,
            create(dir, "baseline_clusters.csv")?,
        )
        .map_err(CliError::write)?;
        write_sse_curve(&b.clustering.sse_curve, create(dir, "baseline_sse.csv")?)
            .map_err(CliError::write)?;
    }
    ctx.emit(
        &out,
        || {
            let mut s = format!(
                "Baseline k={} (sizes {:?}), SSE {:.6}\n",
                out.summary.k, out.summary.cluster_sizes, out.summary.sse
            );
            let _ = writeln!(
                s,
                "{} regions share {}'s cluster:",
                out.recommended.len(),
                out.target
            );
            for r in &out.recommended {
                let _ = writeln!(s, "  {r}");
            }
            s
        },
        || csv_string(|buf| write_assignments(&b.regions, &b.clustering.assignments, buf)),
    )
}

fn metrics_text(m: &MetricsReport) -> String {
    format!(
        "contrast {:.4} ({})\nintrinsic dim {:.4} ({})\n",
        m.contrast, m.contrast_variant, m.intrinsic_dim, m.intrinsic_variant
    )
}

fn metrics_csv(m: &MetricsReport) -> String {
    format!(
        "contrast,intrinsic_dim,contrast_variant,intrinsic_variant\n{},{},{},{}\n",
        m.contrast, m.intrinsic_dim, m.contrast_variant, m.intrinsic_variant
    )
}

fn read_points(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::data(format!("stage metrics: {}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row =
            row.map_err(|e| CliError::data(format!("stage metrics: {}: {e}", path.display())))?;
        let point = row
            .iter()
            .map(|cell| cell.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|_| {
                CliError::data(format!(
                    "stage metrics: {} line {}: non-numeric cell",
                    path.display(),
                    i + 2
                ))
            })?;
        points.push(point);
    }
    Ok(points)
}

fn metrics_from_points(
    ctx: &Context,
    path: &Path,
    query: usize,
    variants: &[String],
) -> Result<(), CliError> {
    let (contrast, intrinsic) = ctx.variants(variants)?;
    let points = read_points(path)?;
    let m = metrics(
        &points,
        query,
        ctx.registry
            .contrast(&contrast)
            .map_err(|e| CliError::usage(e.to_string()))?
            .as_ref(),
        ctx.registry
            .intrinsic(&intrinsic)
            .map_err(|e| CliError::usage(e.to_string()))?
            .as_ref(),
    )
    .map_err(|e| CliError::data(format!("stage metrics: {e}")))?;
    ctx.emit(&m, || metrics_text(&m), || metrics_csv(&m))
}

fn metrics_for_target(ctx: &Context, target: &str, variants: &[String]) -> Result<(), CliError> {
    let (contrast_variant, intrinsic_variant) = ctx.variants(variants)?;
    let opts = StdsaOptions {
        p: ctx
            .config
            .pick(None, "p")?
            .unwrap_or(StdsaOptions::default().p),
        k: ctx.config.pick(None, "k")?.unwrap_or_default(),
        kmeans: ctx.kmeans(&ClusterArgs::default())?,
        contrast_variant,
        intrinsic_variant,
        ..StdsaOptions::default()
    };
    let ds = ctx.dataset()?;
    let report = run_stdsa_with(&ctx.registry, &ds, target, &opts)?.report;
    let m = report.metrics;
    ctx.emit(&m, || metrics_text(&m), || metrics_csv(&m))
}
