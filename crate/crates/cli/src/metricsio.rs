//! Metrics CSV files.
//!
//! Per-level file: header `level,completable,e,n,d,p,l,r2,j,j_i`, one row
//! per level in that exact column order. Reference file: rows of
//! `metric,mean,std` (std may be empty), `#` comments allowed; the `c` row
//! carries the completable fraction.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use levelgen_core::metrics::{reference_summary, BatchSummary, LevelMetrics, MetricId};

pub const CSV_HEADER: &str = "level,completable,e,n,d,p,l,r2,j,j_i";

pub fn render_metrics(rows: &[(String, LevelMetrics)]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (name, m) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            name, m.completable as u8, m.e, m.n, m.d, m.p, m.l, m.r2, m.j, m.j_i
        ));
    }
    out
}

pub fn parse_metrics(text: &str) -> Result<Vec<(String, LevelMetrics)>> {
    let mut lines = text.lines();
    let header = lines.next().context("metrics file is empty")?;
    if header != CSV_HEADER {
        bail!("unexpected metrics header `{header}`");
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            bail!("metrics line {}: expected 10 fields, got {}", i + 2, fields.len());
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse().with_context(|| format!("metrics line {}: bad {what} `{s}`", i + 2))
        };
        out.push((
            fields[0].to_string(),
            LevelMetrics {
                completable: fields[1] == "1",
                e: parse_f(fields[2], "e")?,
                n: parse_f(fields[3], "n")?,
                d: parse_f(fields[4], "d")?,
                p: parse_f(fields[5], "p")?,
                l: fields[6]
                    .parse()
                    .with_context(|| format!("metrics line {}: bad l", i + 2))?,
                r2: parse_f(fields[7], "r2")?,
                j: fields[8]
                    .parse()
                    .with_context(|| format!("metrics line {}: bad j", i + 2))?,
                j_i: fields[9]
                    .parse()
                    .with_context(|| format!("metrics line {}: bad j_i", i + 2))?,
            },
        ));
    }
    Ok(out)
}

pub fn write_metrics(path: &Path, rows: &[(String, LevelMetrics)]) -> Result<()> {
    fs::write(path, render_metrics(rows))
        .with_context(|| format!("writing metrics {}", path.display()))
}

pub fn read_metrics(path: &Path) -> Result<Vec<(String, LevelMetrics)>> {
    parse_metrics(
        &fs::read_to_string(path)
            .with_context(|| format!("reading metrics {}", path.display()))?,
    )
}

/// Reads a reference summary (`metric,mean,std` rows, `c` for the
/// completable fraction).
pub fn parse_reference(text: &str) -> Result<BatchSummary> {
    let mut completable = None;
    let mut entries: Vec<(MetricId, f64, Option<f64>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == "metric,mean,std" {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 2 || fields.len() > 3 {
            bail!("reference line {}: expected `metric,mean[,std]`", i + 1);
        }
        let mean: f64 = fields[1]
            .trim()
            .parse()
            .with_context(|| format!("reference line {}: bad mean", i + 1))?;
        let std = match fields.get(2).map(|s| s.trim()) {
            None | Some("") => None,
            Some(s) => {
                Some(s.parse().with_context(|| format!("reference line {}: bad std", i + 1))?)
            }
        };
        if fields[0].trim() == "c" {
            completable = Some(mean);
            continue;
        }
        let metric = MetricId::from_name(fields[0].trim())
            .with_context(|| format!("reference line {}: unknown metric `{}`", i + 1, fields[0]))?;
        entries.push((metric, mean, std));
    }
    let completable = completable.context("reference file is missing the `c` row")?;
    Ok(reference_summary(completable, &entries))
}

pub fn read_reference(path: &Path) -> Result<BatchSummary> {
    parse_reference(
        &fs::read_to_string(path)
            .with_context(|| format!("reading reference {}", path.display()))?,
    )
}

/// Renders a computed batch summary in the reference format, so a corpus
/// evaluation can serve as the reference for later comparisons.
pub fn render_reference(summary: &BatchSummary, comment: &str) -> String {
    let mut out = String::new();
    if !comment.is_empty() {
        out.push_str(&format!("# {comment}\n"));
    }
    out.push_str("metric,mean,std\n");
    out.push_str(&format!("c,{},\n", summary.completable_fraction));
    for stat in &summary.stats {
        match stat.std {
            Some(std) => out.push_str(&format!("{},{},{}\n", stat.metric.name(), stat.mean, std)),
            None => out.push_str(&format!("{},{},\n", stat.metric.name(), stat.mean)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use levelgen_core::level::{TileCategory, TileGrid};
    use levelgen_core::metrics::{evaluate_level, summarize_batch, within_one_std};
    use levelgen_core::path::MovementModel;

    fn sample_rows() -> Vec<(String, LevelMetrics)> {
        let mut grid = TileGrid::filled(10, TileCategory::Empty);
        for c in 0..10 {
            grid.set(c, 15, TileCategory::Solid);
        }
        let good = evaluate_level(&grid, &MovementModel::default());
        let bad =
            evaluate_level(&TileGrid::filled(4, TileCategory::Solid), &MovementModel::default());
        vec![("corridor".into(), good), ("sealed".into(), bad)]
    }

    #[test]
    fn metrics_csv_round_trips() {
        let rows = sample_rows();
        let parsed = parse_metrics(&render_metrics(&rows)).unwrap();
        assert_eq!(parsed, rows);
    }

    #[test]
    fn reference_round_trips_and_supports_comparison() {
        let rows = sample_rows();
        let metrics: Vec<LevelMetrics> = rows.iter().map(|(_, m)| *m).collect();
        let summary = summarize_batch(&metrics, 10).unwrap();
        let text = render_reference(&summary, "corpus reference");
        let parsed = parse_reference(&text).unwrap();
        assert_eq!(parsed.completable_fraction, summary.completable_fraction);
        let flags = within_one_std(&summary, &parsed).unwrap();
        assert!(flags.iter().all(|&(_, ok)| ok));
    }

    #[test]
    fn reference_without_std_parses_to_none() {
        let text = "# paper-reported, not recomputed\nmetric,mean,std\nc,1.0,\ne,0.82,\n";
        let summary = parse_reference(text).unwrap();
        let e = summary.stats.iter().find(|s| s.metric == MetricId::E).unwrap();
        assert_eq!(e.mean, 0.82);
        assert_eq!(e.std, None);
    }

    #[test]
    fn malformed_inputs_error() {
        assert!(parse_metrics("wrong,header\n").is_err());
        assert!(parse_reference("e,0.82,\n").is_err()); // missing c row
        assert!(parse_reference("metric,mean,std\nc,1.0,\nzz,1,\n").is_err());
    }
}
