//! The end-to-end comparison: train all eight encodings on one corpus,
//! sample from each trained model, score the samples, and render the
//! results as an NLL table and a metrics table against the corpus (bold =
//! within one standard deviation of the corpus reference), with the
//! human-authored constants shown alongside.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use levelgen_core::codec::EncodingSpec;
use levelgen_core::generate::{generate_level, level_rng, token_budget, GenOutcome, SeedSpec};
use levelgen_core::metrics::{
    summarize_batch, within_one_std, BatchSummary, LevelMetrics, MetricId, DEFAULT_BINS,
};
use levelgen_core::train::TrainReport;

use super::{ensure_dir, install_pool, Flag, Profile, TrainArgs};
use crate::manifest::Manifest;
use crate::{arcsfile, checkpoint, corpus, metricsio, svgplot};
use rayon::prelude::*;

/// The human-authored reference shipped with the repository
/// (paper-reported values, not recomputed here).
pub const HUMAN_REFERENCE: &str = include_str!("../../../../reference/human_metrics.csv");

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Profile::Desk)]
    pub profile: Profile,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    /// Levels sampled per encoding (half aboveground, half underground).
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 1.0)]
    pub temp: f64,
    /// Generation budget in columns.
    #[arg(long, default_value_t = 120)]
    pub max_cols: usize,
    /// Override the shipped human reference file.
    #[arg(long)]
    pub human_reference: Option<PathBuf>,
    #[arg(long)]
    pub arcs: Option<PathBuf>,
    #[arg(long)]
    pub charmap: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SpecOutcome {
    pub label: String,
    pub spec: EncodingSpec,
    pub train_report: TrainReport,
    pub sampled: usize,
    pub overflows: usize,
    /// Completed samples whose decode had zero column-integrity warnings.
    pub clean_column_fraction: f64,
    pub summary: BatchSummary,
    /// Per-metric within-one-std flags against the corpus reference.
    pub within_corpus_std: Vec<(MetricId, bool)>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportOutput {
    pub corpus_summary: BatchSummary,
    pub specs: Vec<SpecOutcome>,
}

fn flag(b: bool) -> Flag {
    if b {
        Flag::Y
    } else {
        Flag::N
    }
}

pub fn report_cmd(args: &ReportArgs) -> Result<ReportOutput> {
    let map = corpus::load_charmap(args.charmap.as_deref())?;
    let movement = arcsfile::load_movement(args.arcs.as_deref())?;
    let (levels, warnings) = corpus::load_corpus(&args.corpus, &map)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    ensure_dir(&args.out)?;

    // Corpus reference: score the training levels themselves.
    let corpus_rows = super::evaluate_grids(&levels, &movement);
    let corpus_metrics: Vec<LevelMetrics> = corpus_rows.iter().map(|(_, m)| *m).collect();
    let corpus_summary = summarize_batch(&corpus_metrics, DEFAULT_BINS)?;
    fs::write(
        args.out.join("corpus_reference.csv"),
        metricsio::render_reference(&corpus_summary, "corpus reference (computed)"),
    )?;

    let human = match &args.human_reference {
        Some(path) => Some(metricsio::read_reference(path)?),
        None => Some(metricsio::parse_reference(HUMAN_REFERENCE)?),
    };

    let mut specs_out = Vec::new();
    for spec in EncodingSpec::all() {
        let label = spec.label();
        let dir = args.out.join(&label);
        ensure_dir(&dir)?;

        // Train via the train command machinery so each spec directory is
        // a complete, replayable train artifact.
        let train_args = TrainArgs {
            corpus: args.corpus.clone(),
            out: dir.clone(),
            snaking: flag(spec.snaking),
            paths: flag(spec.paths),
            depth: flag(spec.depth),
            profile: args.profile,
            hidden: None,
            layers: None,
            dropout: None,
            bptt: None,
            split: None,
            eval_every: None,
            plateau: None,
            max_epochs: None,
            optimizer: None,
            lr: None,
            lr_decay: None,
            lr_decay_after: None,
            clip: None,
            slack: None,
            seed: args.master_seed,
            arcs: args.arcs.clone(),
            charmap: args.charmap.clone(),
        };
        let train_report = super::train_cmd(&train_args)?;
        let (model, meta) = checkpoint::load(&dir.join("best.ckpt"))?;
        debug_assert_eq!(meta.spec, spec);

        // Sample: half aboveground, half underground, per-index streams.
        let samples = sample_for_report(args, &model, spec, &movement)?;
        let sample_dir = dir.join("samples");
        ensure_dir(&sample_dir)?;
        let mut metrics = Vec::new();
        let mut overflows = 0usize;
        let mut clean_columns = 0usize;
        let mut completed = 0usize;
        for (index, outcome) in samples.into_iter().enumerate() {
            match outcome {
                GenOutcome::Overflow { .. } => overflows += 1,
                GenOutcome::Complete(seq) => {
                    let (grid, column_warnings) = super::decode_sample(&seq)?;
                    completed += 1;
                    if column_warnings == 0 {
                        clean_columns += 1;
                    }
                    let display = levelgen_core::codec::strip_path(&grid);
                    corpus::write_level(
                        &sample_dir.join(format!("level_{index:04}.txt")),
                        &display,
                        &map,
                    )?;
                    metrics.push((format!("level_{index:04}"), {
                        levelgen_core::metrics::evaluate_level(&display, &movement)
                    }));
                }
            }
        }
        metricsio::write_metrics(&dir.join("metrics.csv"), &metrics)?;
        let only: Vec<LevelMetrics> = metrics.iter().map(|(_, m)| *m).collect();
        let summary = summarize_batch(&only, DEFAULT_BINS)
            .with_context(|| format!("summarizing samples for {label}"))?;
        let flags = within_one_std(&summary, &corpus_summary)?;
        svgplot::write_plot(&dir.join("corner.svg"), &summary, Some(&corpus_summary))?;

        println!(
            "report: spec {} | eval NLL {:.6} | C {:.2} | {} overflows",
            label, train_report.best_nll, summary.completable_fraction, overflows
        );
        specs_out.push(SpecOutcome {
            label,
            spec,
            train_report,
            sampled: completed,
            overflows,
            clean_column_fraction: if completed == 0 {
                0.0
            } else {
                clean_columns as f64 / completed as f64
            },
            summary,
            within_corpus_std: flags,
        });
    }

    // Tables.
    let nll_rows: Vec<(EncodingSpec, f64)> =
        specs_out.iter().map(|s| (s.spec, s.train_report.best_nll)).collect();
    let nll_table = render_nll_table(&nll_rows);
    fs::write(args.out.join("nll_table.txt"), &nll_table)?;
    let metric_rows: Vec<MetricsTableRow> = specs_out
        .iter()
        .map(|s| MetricsTableRow {
            label: format!(
                "{} {} {}",
                if s.spec.snaking { "Y" } else { "N" },
                if s.spec.paths { "Y" } else { "N" },
                if s.spec.depth { "Y" } else { "N" }
            ),
            summary: s.summary.clone(),
            flags: Some(s.within_corpus_std.clone()),
        })
        .collect();
    let metrics_table = render_metrics_table(&corpus_summary, human.as_ref(), &metric_rows);
    fs::write(args.out.join("metrics_table.txt"), &metrics_table)?;

    let output = ReportOutput { corpus_summary, specs: specs_out };
    fs::write(args.out.join("report.json"), serde_json::to_string_pretty(&output)? + "\n")?;

    let mut manifest = Manifest::new("report", args)?;
    for name in ["corpus_reference.csv", "nll_table.txt", "metrics_table.txt", "report.json"] {
        manifest.push_output(name.to_string());
    }
    manifest.write_in(&args.out)?;

    print!("{nll_table}");
    Ok(output)
}

fn sample_for_report(
    args: &ReportArgs,
    model: &levelgen_core::lstm::LstmModel,
    spec: EncodingSpec,
    movement: &levelgen_core::path::MovementModel,
) -> Result<Vec<GenOutcome>> {
    let above = SeedSpec::aboveground()
        .prepared(spec, movement, levelgen_core::path::DEFAULT_SLACK)
        .map_err(|e| anyhow::anyhow!("preparing aboveground seed: {e}"))?;
    let under = SeedSpec::underground()
        .prepared(spec, movement, levelgen_core::path::DEFAULT_SLACK)
        .map_err(|e| anyhow::anyhow!("preparing underground seed: {e}"))?;
    let above_tokens = above.tokens(spec).map_err(|e| anyhow::anyhow!("{e}"))?;
    let under_tokens = under.tokens(spec).map_err(|e| anyhow::anyhow!("{e}"))?;
    let budget = token_budget(spec, args.max_cols);
    let half = args.count / 2;
    install_pool(args.jobs, || {
        (0..args.count)
            .into_par_iter()
            .map(|index| {
                let tokens = if index < half { &above_tokens } else { &under_tokens };
                let mut rng = level_rng(args.master_seed, index);
                generate_level(model, tokens, spec, args.temp, &mut rng, budget)
                    .expect("seed tokens fit the model")
            })
            .collect()
    })
}

pub struct MetricsTableRow {
    pub label: String,
    pub summary: BatchSummary,
    pub flags: Option<Vec<(MetricId, bool)>>,
}

/// Eight rows shaped like the encoding-comparison table: snaking, paths,
/// depth flags and the best held-out NLL, best row starred.
pub fn render_nll_table(rows: &[(EncodingSpec, f64)]) -> String {
    let mut out = String::from("S? P? D?  eval NLL\n");
    let best = rows
        .iter()
        .map(|&(_, nll)| nll)
        .fold(f64::INFINITY, f64::min);
    for &(spec, nll) in rows {
        let yn = |b| if b { 'Y' } else { 'N' };
        let mark = if nll == best { "  *best*" } else { "" };
        out.push_str(&format!(
            "{}  {}  {}   {:.6}{}\n",
            yn(spec.snaking),
            yn(spec.paths),
            yn(spec.depth),
            nll,
            mark
        ));
    }
    out
}

fn fmt_cell(metric: MetricId, value: f64, bold: bool) -> String {
    let text = match metric {
        MetricId::L | MetricId::J | MetricId::Ji => format!("{value:.2}"),
        _ => format!("{value:.2}"),
    };
    if bold {
        format!("**{text}**")
    } else {
        text
    }
}

/// Metrics comparison table: one row per generator plus the corpus
/// reference and (optionally) the human-authored constants. Values within
/// one standard deviation of the corpus reference are bold.
pub fn render_metrics_table(
    corpus: &BatchSummary,
    human: Option<&BatchSummary>,
    rows: &[MetricsTableRow],
) -> String {
    let mut out = String::new();
    out.push_str("| generator | C | e | n | d | p | l | r2 | j | j_i |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    if let Some(human) = human {
        out.push_str(&render_row(
            "human (paper-reported, not recomputed)",
            human,
            None,
        ));
    }
    out.push_str(&render_row("corpus (reference)", corpus, None));
    for row in rows {
        out.push_str(&render_row(&row.label, &row.summary, row.flags.as_deref()));
    }
    out
}

fn render_row(label: &str, summary: &BatchSummary, flags: Option<&[(MetricId, bool)]>) -> String {
    let mut cells = vec![
        label.to_string(),
        format!("{:.0}%", summary.completable_fraction * 100.0),
    ];
    for stat in &summary.stats {
        let bold = flags
            .map(|f| f.iter().any(|&(m, ok)| m == stat.metric && ok))
            .unwrap_or(false);
        cells.push(fmt_cell(stat.metric, stat.mean, bold));
    }
    format!("| {} |\n", cells.join(" | "))
}
