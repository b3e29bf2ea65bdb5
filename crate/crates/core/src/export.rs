//! CSV writers for intermediate artifacts: indicator statistics, correlation
//! and similarity matrices, neighbor tables, SSE curves and cluster labels.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::clustering::CurvePoint;
use crate::dataset::IndicatorTable;
use crate::ingest::{csv_writer, IngestError, REGION_COLUMN};
use crate::neighbor::NeighborSet;
use crate::pipeline::StdsaRun;
use crate::preprocess::{CorrelationMatrix, IndicatorStats, NormalizedDataset};
use crate::schema::{Dimension, Indicator};
use crate::similarity::SimilarityProfile;

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write_box_stats<W: Write>(stats: &IndicatorStats, w: W) -> Result<(), IngestError> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["indicator", "min", "q1", "median", "q3", "max", "outliers"])?;
    for s in &stats.summaries {
        let outliers: Vec<&str> = s.outliers.iter().map(|o| o.region.as_str()).collect();
        wtr.write_record([
            s.indicator.key().to_string(),
            num(s.min),
            num(s.q1),
            num(s.median),
            num(s.q3),
            num(s.max),
            outliers.join(";"),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_correlation<W: Write>(matrix: &CorrelationMatrix, w: W) -> Result<(), IngestError> {
    let labels: Vec<String> = matrix
        .indicators
        .iter()
        .map(|i| i.key().to_string())
        .collect();
    write_square(&labels, &matrix.values, "indicator", w)
}

/// Labelled square matrix; NaN cells are left empty.
pub fn write_square<W: Write>(
    labels: &[String],
    values: &[Vec<f64>],
    corner: &str,
    w: W,
) -> Result<(), IngestError> {
    let mut wtr = csv_writer(w);
    let mut header = vec![corner.to_string()];
    header.extend(labels.iter().cloned());
    wtr.write_record(&header)?;
    for (label, row) in labels.iter().zip(values) {
        let mut rec = vec![label.clone()];
        rec.extend(
            row.iter()
                .map(|&v| if v.is_nan() { String::new() } else { num(v) }),
        );
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Target row followed by its neighbors, with the normalized indicators.
pub fn write_neighbor_table<W: Write>(
    normalized: &NormalizedDataset,
    set: &NeighborSet,
    w: W,
) -> Result<(), IngestError> {
    let mut wtr = csv_writer(w);
    let mut header = vec![REGION_COLUMN.to_string(), "distance".to_string()];
    header.extend(Indicator::ALL.iter().map(|i| i.key().to_string()));
    wtr.write_record(&header)?;
    let rows = std::iter::once((set.target.as_str(), 0.0)).chain(
        set.neighbors
            .iter()
            .map(|n| (n.region.as_str(), n.distance)),
    );
    for (region, distance) in rows {
        let Some(record) = normalized.record(region) else {
            continue;
        };
        let mut rec = vec![region.to_string(), num(distance)];
        rec.extend(record.values().iter().map(|&v| num(v)));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_profile<W: Write>(profile: &SimilarityProfile, w: W) -> Result<(), IngestError> {
    let mut wtr = csv_writer(w);
    wtr.write_record([
        REGION_COLUMN,
        Dimension::Alpha.label(),
        Dimension::Beta.label(),
    ])?;
    for e in &profile.entries {
        wtr.write_record([e.region.clone(), num(e.alpha), num(e.beta)])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_sse_curve<W: Write>(curve: &[CurvePoint], w: W) -> Result<(), IngestError> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["k", "sse"])?;
    for c in curve {
        wtr.write_record([c.k.to_string(), num(c.sse)])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_assignments<W: Write>(
    regions: &[String],
    assignments: &[usize],
    w: W,
) -> Result<(), IngestError> {
    let mut wtr = csv_writer(w);
    wtr.write_record([REGION_COLUMN, "cluster"])?;
    for (region, cluster) in regions.iter().zip(assignments) {
        wtr.write_record([region.clone(), cluster.to_string()])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<File, IngestError> {
    let path = dir.join(name);
    File::create(&path).map_err(|e| IngestError::io(&path, e))
}

/// Writes every intermediate of a run into `dir`, returning the files made.
pub fn write_intermediates(dir: &Path, run: &StdsaRun) -> Result<Vec<PathBuf>, IngestError> {
    std::fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
    let report = &run.report;
    let second = &report.second_filter;
    let second_regions: Vec<String> = second.points.iter().map(|p| p.region.clone()).collect();

    write_neighbor_table(
        &run.normalized,
        &report.neighbor_set,
        create(dir, "neighbors.csv")?,
    )?;
    write_profile(&report.profile, create(dir, "similarity.csv")?)?;
    write_sse_curve(
        &second.clustering.sse_curve,
        create(dir, "second_filter_sse.csv")?,
    )?;
    write_assignments(
        &second_regions,
        &second.clustering.assignments,
        create(dir, "second_filter_clusters.csv")?,
    )?;
    write_sse_curve(
        &run.baseline.clustering.sse_curve,
        create(dir, "baseline_sse.csv")?,
    )?;
    write_assignments(
        &run.baseline.regions,
        &run.baseline.clustering.assignments,
        create(dir, "baseline_clusters.csv")?,
    )?;

    let names = [
        "neighbors.csv",
        "similarity.csv",
        "second_filter_sse.csv",
        "second_filter_clusters.csv",
        "baseline_sse.csv",
        "baseline_clusters.csv",
    ];
    Ok(names.iter().map(|n| dir.join(n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_matrix_blanks_nan() {
        let mut buf = Vec::new();
        let labels = vec!["a".to_string(), "b,c".to_string()];
        write_square(
            &labels,
            &[vec![1.0, f64::NAN], vec![f64::NAN, 1.0]],
            "region",
            &mut buf,
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "region,a,\"b,c\"\na,1,\n\"b,c\",,1\n"
        );
    }

    #[test]
    fn curve_rows() {
        let mut buf = Vec::new();
        let curve = [
            CurvePoint { k: 1, sse: 2.5 },
            CurvePoint { k: 2, sse: 0.125 },
        ];
        write_sse_curve(&curve, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,sse\n1,2.5\n2,0.125\n");
    }
}
