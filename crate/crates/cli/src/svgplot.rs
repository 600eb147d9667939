//! Self-contained SVG corner plots: per-metric histograms along the
//! diagonal, pairwise 2-D density heatmaps in the lower triangle, plus a
//! companion CSV of the binned densities.
//!
//! Output is deterministic: fixed layouts, fixed decimal formatting, no
//! timestamps — a replayed plot is byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use levelgen_core::metrics::{BatchSummary, Density2d, MetricId};

const PANEL: f64 = 110.0;
const GAP: f64 = 12.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 46.0;
const MARGIN_RIGHT: f64 = 16.0;

fn panel_origin(row: usize, col: usize) -> (f64, f64) {
    (
        MARGIN_LEFT + col as f64 * (PANEL + GAP),
        MARGIN_TOP + row as f64 * (PANEL + GAP),
    )
}

fn heat_color(t: f64) -> String {
    // White → deep blue ramp.
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 + (31.0 - 255.0) * t).round() as u8;
    let g = (255.0 + (58.0 - 255.0) * t).round() as u8;
    let b = (255.0 + (147.0 - 255.0) * t).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

fn fmt_tick(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders the corner plot. `reference` means, when given, are drawn as
/// dashed vertical lines on the diagonal histograms.
pub fn render_svg(summary: &BatchSummary, reference: Option<&BatchSummary>) -> String {
    let n = MetricId::ALL.len();
    let width = MARGIN_LEFT + n as f64 * (PANEL + GAP) - GAP + MARGIN_RIGHT;
    let height = MARGIN_TOP + n as f64 * (PANEL + GAP) - GAP + MARGIN_BOTTOM;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"monospace\" font-size=\"11\">\n",
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        fmt(width),
        fmt(height)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"20\" font-size=\"13\">expressive range, {} levels, C = {}</text>\n",
        fmt(MARGIN_LEFT),
        summary.count,
        fmt_tick(summary.completable_fraction)
    ));

    for (i, stat) in summary.stats.iter().enumerate() {
        // Diagonal histogram.
        let (x0, y0) = panel_origin(i, i);
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
            fmt(x0),
            fmt(y0),
            fmt(PANEL),
            fmt(PANEL)
        ));
        let hist = &stat.histogram;
        let bins = hist.counts.len().max(1);
        let max = hist.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let bw = PANEL / bins as f64;
        for (b, &count) in hist.counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let h = (count as f64 / max) * (PANEL - 8.0);
            svg.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#5276c8\"/>\n",
                fmt(x0 + b as f64 * bw),
                fmt(y0 + PANEL - h),
                fmt(bw),
                fmt(h)
            ));
        }
        if let Some(reference) = reference {
            let r = &reference.stats[i];
            if hist.max > hist.min && r.mean.is_finite() {
                let t = ((r.mean - hist.min) / (hist.max - hist.min)).clamp(0.0, 1.0);
                let x = x0 + t * PANEL;
                svg.push_str(&format!(
                    "<line x1=\"{x}\" y1=\"{y1}\" x2=\"{x}\" y2=\"{y2}\" stroke=\"#c0392b\" \
                     stroke-dasharray=\"4 3\"/>\n",
                    x = fmt(x),
                    y1 = fmt(y0),
                    y2 = fmt(y0 + PANEL)
                ));
            }
        }
        // Range ticks under the diagonal.
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"9\">{}</text>\n",
            fmt(x0),
            fmt(y0 + PANEL + 11.0),
            fmt_tick(hist.min)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"end\">{}</text>\n",
            fmt(x0 + PANEL),
            fmt(y0 + PANEL + 11.0),
            fmt_tick(hist.max)
        ));
    }

    for density in &summary.densities {
        let row = MetricId::ALL.iter().position(|&m| m == density.y).unwrap();
        let col = MetricId::ALL.iter().position(|&m| m == density.x).unwrap();
        let (x0, y0) = panel_origin(row, col);
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
            fmt(x0),
            fmt(y0),
            fmt(PANEL),
            fmt(PANEL)
        ));
        let bins = summary.bins.max(1);
        let max = density.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let cell = PANEL / bins as f64;
        for by in 0..bins {
            for bx in 0..bins {
                let count = density.counts[by * bins + bx];
                if count == 0 {
                    continue;
                }
                // Low y-bin at the bottom of the panel.
                svg.push_str(&format!(
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                    fmt(x0 + bx as f64 * cell),
                    fmt(y0 + PANEL - (by + 1) as f64 * cell),
                    fmt(cell),
                    fmt(cell),
                    heat_color(count as f64 / max)
                ));
            }
        }
    }

    // Axis labels: metric names along the bottom and the left.
    for (j, metric) in MetricId::ALL.iter().enumerate() {
        let (x0, _) = panel_origin(n - 1, j);
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            fmt(x0 + PANEL / 2.0),
            fmt(MARGIN_TOP + n as f64 * (PANEL + GAP) - GAP + 28.0),
            metric.name()
        ));
        let (_, y0) = panel_origin(j, 0);
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            fmt(MARGIN_LEFT - 10.0),
            fmt(y0 + PANEL / 2.0 + 4.0),
            metric.name()
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Companion CSV: every diagonal histogram bin and every density cell.
pub fn render_densities_csv(summary: &BatchSummary) -> String {
    let mut out = String::from("kind,x_metric,y_metric,x_bin,y_bin,count\n");
    for stat in &summary.stats {
        for (b, &count) in stat.histogram.counts.iter().enumerate() {
            out.push_str(&format!("hist,{},,{},,{}\n", stat.metric.name(), b, count));
        }
    }
    for Density2d { x, y, counts } in &summary.densities {
        let bins = summary.bins.max(1);
        for by in 0..bins {
            for bx in 0..bins {
                out.push_str(&format!(
                    "density,{},{},{},{},{}\n",
                    x.name(),
                    y.name(),
                    bx,
                    by,
                    counts[by * bins + bx]
                ));
            }
        }
    }
    out
}

/// The densities CSV path for a given SVG output path.
pub fn densities_path(svg_path: &Path) -> PathBuf {
    svg_path.with_extension("densities.csv")
}

pub fn write_plot(
    svg_path: &Path,
    summary: &BatchSummary,
    reference: Option<&BatchSummary>,
) -> Result<PathBuf> {
    fs::write(svg_path, render_svg(summary, reference))
        .with_context(|| format!("writing {}", svg_path.display()))?;
    let csv = densities_path(svg_path);
    fs::write(&csv, render_densities_csv(summary))
        .with_context(|| format!("writing {}", csv.display()))?;
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use levelgen_core::level::{TileCategory, TileGrid};
    use levelgen_core::metrics::{evaluate_level, summarize_batch};
    use levelgen_core::path::MovementModel;

    fn summary() -> BatchSummary {
        let model = MovementModel::default();
        let mut metrics = Vec::new();
        for w in [6usize, 10, 14, 20] {
            let mut grid = TileGrid::filled(w, TileCategory::Empty);
            for c in 0..w {
                grid.set(c, 15, TileCategory::Solid);
            }
            if w > 8 {
                grid.set(w / 2, 14, TileCategory::Enemy);
            }
            metrics.push(evaluate_level(&grid, &model));
        }
        summarize_batch(&metrics, 8).unwrap()
    }

    #[test]
    fn svg_is_deterministic_and_self_contained() {
        let s = summary();
        let a = render_svg(&s, None);
        let b = render_svg(&s, None);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert!(!a.contains("href"));
        // One diagonal panel per metric, labeled.
        for m in MetricId::ALL {
            assert!(a.contains(&format!(">{}</text>", m.name())));
        }
    }

    #[test]
    fn densities_csv_shape() {
        let s = summary();
        let csv = render_densities_csv(&s);
        let lines: Vec<&str> = csv.lines().collect();
        // Header + 8 metrics × 8 bins + 28 pairs × 64 cells.
        assert_eq!(lines.len(), 1 + 8 * 8 + 28 * 64);
        assert_eq!(lines[0], "kind,x_metric,y_metric,x_bin,y_bin,count");
        assert!(lines[1].starts_with("hist,e,,0,,"));
    }

    #[test]
    fn reference_line_appears_when_given() {
        let s = summary();
        let with = render_svg(&s, Some(&s));
        let without = render_svg(&s, None);
        assert!(with.contains("stroke-dasharray"));
        assert!(!without.contains("stroke-dasharray"));
    }
}
