//! The nine per-level statistics and their batch aggregation.
//!
//! Per level: completability, empty fraction `e`, negative space `n`
//! (reachable share of empty cells), decoration `d`, optimal-path share
//! `p`, leniency `l` (enemies + gaps − power-ups), linearity `r2`, jump
//! count `j`, and meaningful jumps `j_i` (forced by a gap or an enemy).
//! Path markers count as empty space everywhere: they are annotations, not
//! geometry.
//!
//! Batches aggregate to means, population standard deviations, per-metric
//! histograms, and pairwise 2-D densities — the raw material of an
//! expressive-range corner plot.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::strip_path;
use crate::level::{TileCategory, TileGrid, GRID_HEIGHT};
use crate::path::{
    build_move_graph, find_optimal_path_on, reachable_empty_on, Cell, MoveKind, MovementModel,
};

/// The per-level statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMetrics {
    pub completable: bool,
    /// Fraction of cells that are empty.
    pub e: f64,
    /// Fraction of empty cells the agent can reach (0 when none are empty).
    pub n: f64,
    /// Fraction of cells that are neither solid nor empty.
    pub d: f64,
    /// Fraction of cells on the optimal path (0 when uncompletable).
    pub p: f64,
    /// Enemies plus gaps minus power-up blocks.
    pub l: i64,
    /// Fit of the per-column skyline to a straight line, clamped to [0, 1].
    pub r2: f64,
    /// Jumps on the optimal path.
    pub j: usize,
    /// Jumps forced by a gap or an enemy.
    pub j_i: usize,
}

/// Maximal runs of columns whose bottom row has no solid cell, as
/// `(first, last)` inclusive column ranges.
pub fn gap_runs(grid: &TileGrid) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start: Option<usize> = None;
    for col in 0..grid.width() {
        let gap = grid.get(col, GRID_HEIGHT - 1) != TileCategory::Solid;
        match (gap, start) {
            (true, None) => start = Some(col),
            (false, Some(s)) => {
                runs.push((s, col - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, grid.width() - 1));
    }
    runs
}

/// R² of the least-squares line through `(column, highest occupied row)`,
/// skipping fully-empty columns. Fewer than two points, or a perfectly
/// level skyline, fit a line exactly: 1.0. Clamped to [0, 1].
fn linearity(grid: &TileGrid) -> f64 {
    let mut points: Vec<(f64, f64)> = Vec::new();
    for col in 0..grid.width() {
        if let Some(row) = (0..GRID_HEIGHT).find(|&r| grid.get(col, r) != TileCategory::Empty) {
            points.push((col as f64, row as f64));
        }
    }
    if points.len() < 2 {
        return 1.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    if sxx == 0.0 {
        return 0.0; // vertical stack of distinct heights in one column — cannot happen with one point per column
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let e = p.1 - (intercept + slope * p.0);
            e * e
        })
        .sum();
    (1.0 - ss_res / syy).clamp(0.0, 1.0)
}

/// Computes all nine statistics for one level. Pure and deterministic;
/// batches may evaluate levels concurrently.
pub fn evaluate_level(grid: &TileGrid, movement: &MovementModel) -> LevelMetrics {
    let grid = strip_path(grid);
    let total = (grid.width() * GRID_HEIGHT) as f64;
    let empty = grid.count(TileCategory::Empty);
    let e = empty as f64 / total;
    let solid = grid.count(TileCategory::Solid);
    let d = (grid.width() * GRID_HEIGHT - solid - empty) as f64 / total;

    let graph = build_move_graph(&grid, movement);
    let reachable = reachable_empty_on(&grid, movement, &graph).len();
    let n = if empty == 0 { 0.0 } else { reachable as f64 / empty as f64 };

    let gaps = gap_runs(&grid);
    let enemies = grid.count(TileCategory::Enemy);
    let rewards = grid.count(TileCategory::QuestionPowerup);
    let l = enemies as i64 + gaps.len() as i64 - rewards as i64;
    let r2 = linearity(&grid);

    let (completable, p, j, j_i) = match find_optimal_path_on(&grid, movement, &graph) {
        Some(result) => {
            let cells: BTreeSet<Cell> = result.optimal_path.iter().copied().collect();
            let p = cells.len() as f64 / total;
            let enemy_cells: Vec<Cell> = (0..grid.width())
                .flat_map(|c| (0..GRID_HEIGHT).map(move |r| (c, r)))
                .filter(|&(c, r)| grid.get(c, r) == TileCategory::Enemy)
                .collect();
            let mut j = 0;
            let mut j_i = 0;
            for (i, &kind) in result.optimal_moves.iter().enumerate() {
                if kind != MoveKind::Jump {
                    continue;
                }
                j += 1;
                let from = result.optimal_path[i];
                let to = result.optimal_path[i + 1];
                let lo = from.0.min(to.0);
                let hi = from.0.max(to.0);
                let over_gap = gaps.iter().any(|&(s, e)| lo <= e && s <= hi);
                let near_enemy = if enemy_cells.is_empty() {
                    false
                } else {
                    let mut cells = result.optimal_traversed[i].clone();
                    cells.push(from);
                    cells.push(to);
                    cells.iter().any(|&(cc, cr)| {
                        enemy_cells.iter().any(|&(ec, er)| {
                            cc.abs_diff(ec).max(cr.abs_diff(er)) <= 1
                        })
                    })
                };
                if over_gap || near_enemy {
                    j_i += 1;
                }
            }
            (true, p, j, j_i)
        }
        None => (false, 0.0, 0, 0),
    };

    LevelMetrics { completable, e, n, d, p, l, r2, j, j_i }
}

/// Identifier for the eight numeric metrics (completability aggregates
/// separately, as the fraction `C`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    E,
    N,
    D,
    P,
    L,
    R2,
    J,
    Ji,
}

impl MetricId {
    pub const ALL: [MetricId; 8] = [
        MetricId::E,
        MetricId::N,
        MetricId::D,
        MetricId::P,
        MetricId::L,
        MetricId::R2,
        MetricId::J,
        MetricId::Ji,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricId::E => "e",
            MetricId::N => "n",
            MetricId::D => "d",
            MetricId::P => "p",
            MetricId::L => "l",
            MetricId::R2 => "r2",
            MetricId::J => "j",
            MetricId::Ji => "j_i",
        }
    }

    pub fn from_name(name: &str) -> Option<MetricId> {
        MetricId::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn value(self, m: &LevelMetrics) -> f64 {
        match self {
            MetricId::E => m.e,
            MetricId::N => m.n,
            MetricId::D => m.d,
            MetricId::P => m.p,
            MetricId::L => m.l as f64,
            MetricId::R2 => m.r2,
            MetricId::J => m.j as f64,
            MetricId::Ji => m.j_i as f64,
        }
    }
}

/// Histogram over `[min, max]`; a zero-width range puts all mass in bin 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<u32>,
}

impl Histogram {
    fn bin_of(&self, value: f64) -> usize {
        if self.max <= self.min || self.counts.is_empty() {
            return 0;
        }
        let bins = self.counts.len();
        let t = (value - self.min) / (self.max - self.min);
        ((t * bins as f64) as usize).min(bins - 1)
    }
}

/// Mean, population standard deviation, and histogram of one metric.
/// References loaded from files may omit the deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub metric: MetricId,
    pub mean: f64,
    pub std: Option<f64>,
    pub histogram: Histogram,
}

/// Pairwise 2-D density over the two metrics' histogram ranges; counts are
/// row-major by `y` bin then `x` bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density2d {
    pub x: MetricId,
    pub y: MetricId,
    pub counts: Vec<u32>,
}

/// Expressive-range aggregate of one batch of levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub count: usize,
    /// `C`: fraction of completable levels.
    pub completable_fraction: f64,
    pub bins: usize,
    pub stats: Vec<MetricStat>,
    pub densities: Vec<Density2d>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SummaryError {
    #[error("cannot summarize an empty batch")]
    EmptyBatch,
    #[error("reference has no standard deviation for metric `{0}`")]
    MissingStd(&'static str),
}

/// Default histogram bin count.
pub const DEFAULT_BINS: usize = 20;

/// Aggregates a batch: means, population standard deviations, per-metric
/// histograms, and every lower-triangle metric pair's 2-D histogram.
pub fn summarize_batch(metrics: &[LevelMetrics], bins: usize) -> Result<BatchSummary, SummaryError> {
    if metrics.is_empty() {
        return Err(SummaryError::EmptyBatch);
    }
    assert!(bins >= 1, "need at least one bin");
    let count = metrics.len();
    let nf = count as f64;
    let completable_fraction =
        metrics.iter().filter(|m| m.completable).count() as f64 / nf;

    let mut stats = Vec::with_capacity(MetricId::ALL.len());
    for metric in MetricId::ALL {
        let values: Vec<f64> = metrics.iter().map(|m| metric.value(m)).collect();
        let mean = values.iter().sum::<f64>() / nf;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut histogram = Histogram { min, max, counts: vec![0; bins] };
        for &v in &values {
            let b = histogram.bin_of(v);
            histogram.counts[b] += 1;
        }
        stats.push(MetricStat { metric, mean, std: Some(libm::sqrt(var)), histogram });
    }

    let mut densities = Vec::new();
    for yi in 1..MetricId::ALL.len() {
        for xi in 0..yi {
            let (mx, my) = (MetricId::ALL[xi], MetricId::ALL[yi]);
            let hx = &stats[xi].histogram;
            let hy = &stats[yi].histogram;
            let mut counts = vec![0u32; bins * bins];
            for m in metrics {
                let bx = hx.bin_of(mx.value(m));
                let by = hy.bin_of(my.value(m));
                counts[by * bins + bx] += 1;
            }
            densities.push(Density2d { x: mx, y: my, counts });
        }
    }

    Ok(BatchSummary { count, completable_fraction, bins, stats, densities })
}

/// Builds a reference summary from bare statistics (e.g. loaded from a
/// reference file); histograms are empty and deviations optional.
pub fn reference_summary(
    completable_fraction: f64,
    entries: &[(MetricId, f64, Option<f64>)],
) -> BatchSummary {
    let stats = MetricId::ALL
        .iter()
        .map(|&metric| {
            let entry = entries.iter().find(|(m, _, _)| *m == metric);
            let (mean, std) = match entry {
                Some(&(_, mean, std)) => (mean, std),
                None => (f64::NAN, None),
            };
            MetricStat {
                metric,
                mean,
                std,
                histogram: Histogram { min: 0.0, max: 0.0, counts: Vec::new() },
            }
        })
        .collect();
    BatchSummary {
        count: 0,
        completable_fraction,
        bins: 0,
        stats,
        densities: Vec::new(),
    }
}

/// Per-metric flags: is the batch mean within one reference standard
/// deviation of the reference mean?
pub fn within_one_std(
    batch: &BatchSummary,
    reference: &BatchSummary,
) -> Result<Vec<(MetricId, bool)>, SummaryError> {
    let mut out = Vec::with_capacity(MetricId::ALL.len());
    for (bs, rs) in batch.stats.iter().zip(&reference.stats) {
        debug_assert_eq!(bs.metric, rs.metric);
        let std = rs.std.ok_or(SummaryError::MissingStd(rs.metric.name()))?;
        out.push((bs.metric, (bs.mean - rs.mean).abs() <= std));
    }
    Ok(out)
}
