//! Subcommand implementations. Each argument struct derives both `clap`
//! parsing and serde, so the exact resolved configuration lands in the
//! manifest and `replay` can re-run it unchanged.

pub mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use levelgen_core::codec::{decode, strip_path, DecodeMode, EncodingSpec, TokenSequence};
use levelgen_core::generate::{
    generate_level, level_rng, token_budget, GenOutcome, SeedSpec,
};
use levelgen_core::level::{CharMap, TileGrid};
use levelgen_core::lstm::LstmModel;
use levelgen_core::metrics::{evaluate_level, summarize_batch, LevelMetrics, DEFAULT_BINS};
use levelgen_core::path::{annotate_paths, MovementModel, DEFAULT_SLACK};
use levelgen_core::train::{make_dataset, train, OptimizerKind, TrainConfig, TrainReport};

use crate::arcsfile;
use crate::checkpoint::{self, CheckpointMeta};
use crate::corpus;
use crate::manifest::{sibling_path, Manifest};
use crate::metricsio;
use crate::seqfile;
use crate::svgplot;

/// Y/N flag matching the paper-style CLI convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "UPPER")]
pub enum Flag {
    #[value(alias = "y")]
    Y,
    #[value(alias = "n")]
    N,
}

impl Flag {
    pub fn as_bool(self) -> bool {
        matches!(self, Flag::Y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Small model and sparse evaluation; finishes in minutes on a laptop.
    Desk,
    /// The full-size 3×512 configuration.
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerArg {
    Rmsprop,
    Sgd,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(value: OptimizerArg) -> OptimizerKind {
        match value {
            OptimizerArg::Rmsprop => OptimizerKind::RmsProp,
            OptimizerArg::Sgd => OptimizerKind::Sgd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedKindArg {
    Above,
    Under,
    Custom,
}

fn install_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .context("building thread pool")?;
            Ok(pool.install(f))
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

// ---------------------------------------------------------------------------
// ingest

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IngestArgs {
    /// Directory of level .txt files.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Optional charmap override file (category=char lines).
    #[arg(long)]
    pub charmap: Option<PathBuf>,
}

pub fn ingest(args: &IngestArgs) -> Result<()> {
    let map = corpus::load_charmap(args.charmap.as_deref())?;
    let (levels, warnings) = corpus::load_corpus(&args.corpus, &map)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    println!("levels: {}", levels.len());
    let mut widths: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, grid) in &levels {
        *widths.entry(grid.width()).or_default() += 1;
    }
    println!("width histogram:");
    for (width, count) in widths {
        println!("  {width:>4} columns: {count} ({})", "#".repeat(count));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// annotate

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AnnotateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory for annotated levels.
    #[arg(long)]
    pub out: PathBuf,
    /// Keep paths within this many moves of optimal.
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    pub slack: usize,
    /// Optional arc-table file.
    #[arg(long)]
    pub arcs: Option<PathBuf>,
    #[arg(long)]
    pub charmap: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct AnnotateDetails {
    annotated: usize,
    skipped: Vec<String>,
}

pub fn annotate(args: &AnnotateArgs) -> Result<()> {
    let map = corpus::load_charmap(args.charmap.as_deref())?;
    let movement = arcsfile::load_movement(args.arcs.as_deref())?;
    let (levels, warnings) = corpus::load_corpus(&args.corpus, &map)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    ensure_dir(&args.out)?;
    let mut manifest = Manifest::new("annotate", args)?;
    let mut skipped = Vec::new();
    let mut annotated = 0;
    for (name, grid) in &levels {
        match annotate_paths(grid, &movement, args.slack) {
            Ok(marked) => {
                let file = format!("{name}.txt");
                corpus::write_level(&args.out.join(&file), &marked, &map)?;
                manifest.push_output(file);
                annotated += 1;
            }
            Err(_) => {
                eprintln!("warning: level `{name}` is not completable; skipped");
                skipped.push(name.clone());
            }
        }
    }
    manifest.set_details(&AnnotateDetails { annotated, skipped })?;
    manifest.write_in(&args.out)?;
    println!("annotated {annotated} levels into {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// encode

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EncodeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub snaking: Flag,
    #[arg(long)]
    pub paths: Flag,
    #[arg(long)]
    pub depth: Flag,
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    pub slack: usize,
    #[arg(long)]
    pub arcs: Option<PathBuf>,
    #[arg(long)]
    pub charmap: Option<PathBuf>,
}

pub fn encode_cmd(args: &EncodeArgs) -> Result<()> {
    let spec = EncodingSpec::new(
        args.snaking.as_bool(),
        args.paths.as_bool(),
        args.depth.as_bool(),
    );
    let map = corpus::load_charmap(args.charmap.as_deref())?;
    let movement = arcsfile::load_movement(args.arcs.as_deref())?;
    let (levels, warnings) = corpus::load_corpus(&args.corpus, &map)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    ensure_dir(&args.out)?;
    let mut manifest = Manifest::new("encode", args)?;
    let mut written = 0;
    let mut skipped = Vec::new();
    for (name, grid) in &levels {
        let prepared = if spec.paths {
            match annotate_paths(grid, &movement, args.slack) {
                Ok(marked) => marked,
                Err(_) => {
                    eprintln!("warning: level `{name}` is not completable; skipped");
                    skipped.push(name.clone());
                    continue;
                }
            }
        } else {
            strip_path(grid)
        };
        let seqs = levelgen_core::codec::encode(&prepared, spec)
            .with_context(|| format!("encoding level `{name}`"))?;
        for seq in &seqs {
            let file = if spec.snaking {
                format!("{name}.{}.seq", seq.start_dir.name())
            } else {
                format!("{name}.seq")
            };
            seqfile::write(&args.out.join(&file), seq)?;
            manifest.push_output(file);
            written += 1;
        }
    }
    manifest.set_details(&AnnotateDetails { annotated: written, skipped })?;
    manifest.write_in(&args.out)?;
    println!("wrote {written} sequences into {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// train

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub snaking: Flag,
    #[arg(long)]
    pub paths: Flag,
    #[arg(long)]
    pub depth: Flag,
    /// Base defaults: `desk` (2×128, sparse eval) or `paper` (3×512).
    #[arg(long, value_enum, default_value_t = Profile::Desk)]
    pub profile: Profile,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Truncated-BPTT window length in tokens.
    #[arg(long)]
    pub bptt: Option<usize>,
    /// Train fraction of the level split.
    #[arg(long)]
    pub split: Option<f64>,
    /// Training tokens between mid-epoch evaluations.
    #[arg(long)]
    pub eval_every: Option<usize>,
    /// Stop after this many consecutive epochs without a new best.
    #[arg(long)]
    pub plateau: Option<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerArg>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lr_decay: Option<f64>,
    #[arg(long)]
    pub lr_decay_after: Option<usize>,
    #[arg(long)]
    pub clip: Option<f64>,
    #[arg(long)]
    pub slack: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub arcs: Option<PathBuf>,
    #[arg(long)]
    pub charmap: Option<PathBuf>,
}

impl TrainArgs {
    pub fn resolve(&self) -> TrainConfig {
        let spec = EncodingSpec::new(
            self.snaking.as_bool(),
            self.paths.as_bool(),
            self.depth.as_bool(),
        );
        let mut config = TrainConfig { spec, seed: self.seed, ..TrainConfig::default() };
        match self.profile {
            Profile::Desk => {
                config.hidden = 128;
                config.layers = 2;
                // Evaluating the held-out set after every 200-token window
                // dominates desk-scale runtime; evaluate sparsely mid-epoch
                // (epoch-end evaluations always run).
                config.eval_every = 20_000;
            }
            Profile::Paper => {
                config.hidden = 512;
                config.layers = 3;
                config.eval_every = 200;
            }
        }
        if let Some(v) = self.hidden {
            config.hidden = v;
        }
        if let Some(v) = self.layers {
            config.layers = v;
        }
        if let Some(v) = self.dropout {
            config.dropout = v;
        }
        if let Some(v) = self.bptt {
            config.bptt_len = v;
        }
        if let Some(v) = self.split {
            config.split = v;
        }
        if let Some(v) = self.eval_every {
            config.eval_every = v;
        }
        if let Some(v) = self.plateau {
            config.plateau_epochs = v;
        }
        if let Some(v) = self.max_epochs {
            config.max_epochs = v;
        }
        if let Some(v) = self.optimizer {
            config.optimizer = v.into();
        }
        if let Some(v) = self.lr {
            config.lr = v;
        }
        if let Some(v) = self.lr_decay {
            config.lr_decay = v;
        }
        if let Some(v) = self.lr_decay_after {
            config.lr_decay_after = v;
        }
        if let Some(v) = self.clip {
            config.clip = v;
        }
        if let Some(v) = self.slack {
            config.slack = v;
        }
        config
    }
}

#[derive(Serialize, Deserialize)]
struct TrainDetails {
    train_levels: usize,
    eval_levels: usize,
    skipped: Vec<String>,
}

pub fn train_cmd(args: &TrainArgs) -> Result<TrainReport> {
    let config = args.resolve();
    let map = corpus::load_charmap(args.charmap.as_deref())?;
    let movement = arcsfile::load_movement(args.arcs.as_deref())?;
    let (levels, warnings) = corpus::load_corpus(&args.corpus, &map)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let dataset = make_dataset(
        &levels,
        config.spec,
        &movement,
        config.split,
        config.slack,
        config.seed,
    )?;
    for name in &dataset.skipped {
        eprintln!("warning: level `{name}` is not completable; skipped");
    }
    let (mut report, best) = train(&config, &dataset)?;

    ensure_dir(&args.out)?;
    let ckpt = args.out.join("best.ckpt");
    let meta = CheckpointMeta {
        spec: config.spec,
        vocab: best.vocab,
        layers: best.layers.len(),
        hidden: best.layers[0].hidden_size,
        dropout: best.dropout,
        seed: config.seed,
        epoch: report.best_epoch,
        eval_nll: report.best_nll,
        tool_version: crate::tool_version().to_string(),
    };
    checkpoint::save(&ckpt, &best, &meta)?;
    report.best_checkpoint = Some("best.ckpt".to_string());
    fs::write(
        args.out.join("report.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;

    let mut manifest = Manifest::new("train", args)?;
    manifest.push_output("best.ckpt");
    manifest.push_output("best.ckpt.json");
    manifest.push_output("report.json");
    manifest.set_details(&TrainDetails {
        train_levels: dataset.train_levels,
        eval_levels: dataset.eval_levels,
        skipped: dataset.skipped.clone(),
    })?;
    manifest.write_in(&args.out)?;

    println!(
        "spec {} | best eval NLL {:.6} at epoch {} | {} epochs ({:?})",
        config.spec.label(),
        report.best_nll,
        report.best_epoch,
        report.epochs_run,
        report.stop_reason
    );
    Ok(report)
}

// ---------------------------------------------------------------------------
// sample

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    /// Trained checkpoint file.
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = SeedKindArg::Above)]
    pub seed_kind: SeedKindArg,
    /// 3-column level file for `--seed-kind custom`.
    #[arg(long)]
    pub seed_file: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 1.0)]
    pub temp: f64,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    /// Generation budget in columns before an attempt counts as overflow.
    #[arg(long, default_value_t = 600)]
    pub max_cols: usize,
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    pub slack: usize,
    #[arg(long)]
    pub arcs: Option<PathBuf>,
    #[arg(long)]
    pub charmap: Option<PathBuf>,
    /// Parallel generation jobs (deterministic regardless).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SampleLevelDetail {
    pub index: usize,
    pub rng_stream: u64,
    pub overflow: bool,
    pub file: Option<String>,
    pub path_file: Option<String>,
    pub column_warnings: usize,
    pub depth_warnings: usize,
    pub stray_warnings: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SampleDetails {
    pub master_seed: u64,
    pub overflows: usize,
    /// Share of completed levels that decoded without a single warning.
    pub clean_decode_fraction: f64,
    pub levels: Vec<SampleLevelDetail>,
}

fn resolve_seed(args: &SampleArgs, map: &CharMap) -> Result<SeedSpec> {
    match args.seed_kind {
        SeedKindArg::Above => Ok(SeedSpec::aboveground()),
        SeedKindArg::Under => Ok(SeedSpec::underground()),
        SeedKindArg::Custom => {
            let path = args
                .seed_file
                .as_deref()
                .context("--seed-kind custom requires --seed-file")?;
            let grid = corpus::load_level(path, map)?;
            SeedSpec::custom(grid).map_err(|e| anyhow::anyhow!("{e}"))
        }
    }
}

pub fn sample_cmd(args: &SampleArgs) -> Result<SampleDetails> {
    let (model, meta) = checkpoint::load(&args.ckpt)?;
    let spec = meta.spec;
    let map = corpus::load_charmap(args.charmap.as_deref())?;
    let movement = arcsfile::load_movement(args.arcs.as_deref())?;
    let seed = resolve_seed(args, &map)?
        .prepared(spec, &movement, args.slack)
        .map_err(|e| anyhow::anyhow!("preparing seed: {e}"))?;
    let seed_tokens = seed.tokens(spec).map_err(|e| anyhow::anyhow!("encoding seed: {e}"))?;
    let budget = token_budget(spec, args.max_cols).max(seed_tokens.len() + 2);

    ensure_dir(&args.out)?;
    let outcomes: Vec<GenOutcome> = install_pool(args.jobs, || {
        (0..args.count)
            .into_par_iter()
            .map(|index| {
                let mut rng = level_rng(args.master_seed, index);
                generate_level(&model, &seed_tokens, spec, args.temp, &mut rng, budget)
                    .expect("seed tokens fit the model")
            })
            .collect()
    })?;

    let mut manifest = Manifest::new("sample", args)?;
    let mut details = SampleDetails {
        master_seed: args.master_seed,
        overflows: 0,
        clean_decode_fraction: 0.0,
        levels: Vec::with_capacity(args.count),
    };
    let mut clean = 0usize;
    let mut completed = 0usize;
    for (index, outcome) in outcomes.into_iter().enumerate() {
        let rng_stream = levelgen_core::generate::level_stream_id(index);
        match outcome {
            GenOutcome::Overflow { .. } => {
                details.overflows += 1;
                details.levels.push(SampleLevelDetail {
                    index,
                    rng_stream,
                    overflow: true,
                    file: None,
                    path_file: None,
                    column_warnings: 0,
                    depth_warnings: 0,
                    stray_warnings: 0,
                });
            }
            GenOutcome::Complete(seq) => {
                let (grid, warnings) =
                    decode(&seq, DecodeMode::Lenient).context("lenient decode of a sample")?;
                completed += 1;
                let column_warnings =
                    warnings.iter().filter(|w| w.is_column_integrity()).count();
                let depth_warnings = warnings
                    .iter()
                    .filter(|w| {
                        matches!(w, levelgen_core::codec::DecodeWarning::DepthCount { .. })
                    })
                    .count();
                let stray_warnings = warnings.len() - column_warnings - depth_warnings;
                if warnings.is_empty() {
                    clean += 1;
                }
                let file = format!("level_{index:04}.txt");
                corpus::write_level(&args.out.join(&file), &strip_path(&grid), &map)?;
                manifest.push_output(file.clone());
                let path_file = if spec.paths {
                    let pf = format!("level_{index:04}.path.txt");
                    corpus::write_level(&args.out.join(&pf), &grid, &map)?;
                    manifest.push_output(pf.clone());
                    Some(pf)
                } else {
                    None
                };
                details.levels.push(SampleLevelDetail {
                    index,
                    rng_stream,
                    overflow: false,
                    file: Some(file),
                    path_file,
                    column_warnings,
                    depth_warnings,
                    stray_warnings,
                });
            }
        }
    }
    details.clean_decode_fraction =
        if completed == 0 { 0.0 } else { clean as f64 / completed as f64 };
    manifest.set_details(&details)?;
    manifest.write_in(&args.out)?;
    println!(
        "generated {} levels ({} overflows) into {}; {:.1}% decoded clean",
        args.count,
        details.overflows,
        args.out.display(),
        details.clean_decode_fraction * 100.0
    );
    Ok(details)
}

// ---------------------------------------------------------------------------
// evaluate

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    /// Directory of level files to score.
    #[arg(long)]
    pub levels: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub arcs: Option<PathBuf>,
    #[arg(long)]
    pub charmap: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

pub fn evaluate_cmd(args: &EvaluateArgs) -> Result<Vec<(String, LevelMetrics)>> {
    let map = corpus::load_charmap(args.charmap.as_deref())?;
    let movement = arcsfile::load_movement(args.arcs.as_deref())?;
    let (levels, warnings) = corpus::load_corpus(&args.levels, &map)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let rows: Vec<(String, LevelMetrics)> = install_pool(args.jobs, || {
        levels
            .par_iter()
            .map(|(name, grid)| (name.clone(), evaluate_level(grid, &movement)))
            .collect()
    })?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    metricsio::write_metrics(&args.out, &rows)?;
    let mut manifest = Manifest::new("evaluate", args)?;
    manifest.push_output(
        args.out
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("metrics.csv")
            .to_string(),
    );
    manifest.write_to(&sibling_path(&args.out))?;
    println!("evaluated {} levels into {}", rows.len(), args.out.display());
    Ok(rows)
}

// ---------------------------------------------------------------------------
// plot

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PlotArgs {
    /// Per-level metrics CSV (from `evaluate`).
    #[arg(long)]
    pub metrics: PathBuf,
    /// Optional reference CSV (`metric,mean,std` rows).
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Output SVG path; the densities CSV lands next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
}

pub fn plot_cmd(args: &PlotArgs) -> Result<()> {
    let rows = metricsio::read_metrics(&args.metrics)?;
    if rows.is_empty() {
        bail!("metrics file {} has no rows", args.metrics.display());
    }
    let metrics: Vec<LevelMetrics> = rows.iter().map(|(_, m)| *m).collect();
    let summary = summarize_batch(&metrics, args.bins)?;
    let reference = match &args.reference {
        Some(path) => Some(metricsio::read_reference(path)?),
        None => None,
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    let csv = svgplot::write_plot(&args.out, &summary, reference.as_ref())?;
    let mut manifest = Manifest::new("plot", args)?;
    manifest.push_output(
        args.out.file_name().and_then(|s| s.to_str()).unwrap_or("corner.svg").to_string(),
    );
    manifest.push_output(csv.file_name().and_then(|s| s.to_str()).unwrap_or("").to_string());
    manifest.write_to(&sibling_path(&args.out))?;
    println!("plotted {} levels into {}", metrics.len(), args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// dump-arcs

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DumpArcsArgs {
    /// Dump a custom table instead of the built-in default.
    #[arg(long)]
    pub arcs: Option<PathBuf>,
}

pub fn dump_arcs_cmd(args: &DumpArcsArgs) -> Result<()> {
    let movement = arcsfile::load_movement(args.arcs.as_deref())?;
    print!("{}", arcsfile::dump_arcs(&movement));
    Ok(())
}

// ---------------------------------------------------------------------------
// replay

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by a previous run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Optional replacement output location (directory commands get the
    /// directory, file commands get `<dir>/<original file name>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn replay(args: &ReplayArgs) -> Result<()> {
    let manifest = Manifest::read(&args.manifest)?;
    match manifest.command.as_str() {
        "ingest" => ingest(&manifest.config_as::<IngestArgs>()?),
        "annotate" => {
            let mut config = manifest.config_as::<AnnotateArgs>()?;
            if let Some(out) = &args.out {
                config.out = out.clone();
            }
            annotate(&config)
        }
        "encode" => {
            let mut config = manifest.config_as::<EncodeArgs>()?;
            if let Some(out) = &args.out {
                config.out = out.clone();
            }
            encode_cmd(&config)
        }
        "train" => {
            let mut config = manifest.config_as::<TrainArgs>()?;
            if let Some(out) = &args.out {
                config.out = out.clone();
            }
            train_cmd(&config).map(|_| ())
        }
        "sample" => {
            let mut config = manifest.config_as::<SampleArgs>()?;
            if let Some(out) = &args.out {
                config.out = out.clone();
            }
            sample_cmd(&config).map(|_| ())
        }
        "evaluate" => {
            let mut config = manifest.config_as::<EvaluateArgs>()?;
            if let Some(out) = &args.out {
                let name = config.out.file_name().map(|s| s.to_owned());
                config.out = match name {
                    Some(name) => out.join(name),
                    None => out.clone(),
                };
            }
            evaluate_cmd(&config).map(|_| ())
        }
        "plot" => {
            let mut config = manifest.config_as::<PlotArgs>()?;
            if let Some(out) = &args.out {
                let name = config.out.file_name().map(|s| s.to_owned());
                config.out = match name {
                    Some(name) => out.join(name),
                    None => out.clone(),
                };
            }
            plot_cmd(&config)
        }
        "report" => {
            let mut config = manifest.config_as::<report::ReportArgs>()?;
            if let Some(out) = &args.out {
                config.out = out.clone();
            }
            report::report_cmd(&config).map(|_| ())
        }
        other => bail!("manifest command `{other}` is not replayable"),
    }
}

// ---------------------------------------------------------------------------
// shared helpers for report and tests

/// Decodes a generated sequence leniently and returns the displayable
/// (path-stripped) grid plus warning counts.
pub fn decode_sample(seq: &TokenSequence) -> Result<(TileGrid, usize)> {
    let (grid, warnings) = decode(seq, DecodeMode::Lenient).context("lenient decode")?;
    let column = warnings.iter().filter(|w| w.is_column_integrity()).count();
    Ok((grid, column))
}

/// Evaluates a set of named grids into metric rows (used by report).
pub fn evaluate_grids(
    levels: &[(String, TileGrid)],
    movement: &MovementModel,
) -> Vec<(String, LevelMetrics)> {
    levels
        .par_iter()
        .map(|(name, grid)| (name.clone(), evaluate_level(grid, movement)))
        .collect()
}

/// Loads a checkpoint for report-internal reuse.
pub fn load_model(path: &Path) -> Result<(LstmModel, CheckpointMeta)> {
    checkpoint::load(path)
}
