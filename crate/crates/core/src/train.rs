//! Corpus → sequences → truncated-BPTT training with held-out evaluation,
//! best-checkpoint selection, and plateau early stopping.
//!
//! The corpus is split 70/30 at *level* granularity (a snaking level's two
//! sequences always land on the same side, so train and eval never see two
//! views of one level). Recurrent state is carried across windows within a
//! sequence and zeroed between sequences. The evaluation NLL is measured
//! on a token schedule and at every epoch end; the best-scoring model is
//! kept, and training stops once it has not improved for a configured
//! number of consecutive epochs.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{encode, strip_path, EncodingSpec, TokenSequence, Vocabulary};
use crate::level::TileGrid;
use crate::lstm::{
    loss_and_grads, sequence_nll, LstmGrads, LstmModel, LstmState, ModelConfig,
};
use crate::path::{annotate_paths, MovementModel};
use crate::rngutil::{stream, stream_rng};

/// Which update rule drives learning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizerKind {
    RmsProp,
    Sgd,
}

/// Optimizer state over the model's flat parameter vector.
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    decay: f64,
    eps: f64,
    cache: Vec<f64>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, decay: f64, model: &LstmModel) -> Optimizer {
        Optimizer { kind, lr, decay, eps: 1e-8, cache: vec![0.0; model.param_count()] }
    }

    /// Applies one update; `lr_scale` carries the per-epoch decay.
    pub fn step(&mut self, model: &mut LstmModel, grads: &LstmGrads, lr_scale: f64) {
        let lr = self.lr * lr_scale;
        let mut offset = 0;
        let gts = grads.tensors();
        for (pt, gt) in model.tensors_mut().into_iter().zip(gts) {
            let cache = &mut self.cache[offset..offset + pt.len()];
            match self.kind {
                OptimizerKind::RmsProp => {
                    for ((p, &g), c) in pt.iter_mut().zip(gt).zip(cache.iter_mut()) {
                        *c = self.decay * *c + (1.0 - self.decay) * g * g;
                        *p -= lr * g / (libm::sqrt(*c) + self.eps);
                    }
                }
                OptimizerKind::Sgd => {
                    for (p, &g) in pt.iter_mut().zip(gt) {
                        *p -= lr * g;
                    }
                }
            }
            offset += pt.len();
        }
    }
}

/// Everything a training run needs beyond the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub spec: EncodingSpec,
    pub hidden: usize,
    pub layers: usize,
    pub dropout: f64,
    pub bptt_len: usize,
    pub split: f64,
    /// Training tokens between mid-epoch evaluations; an evaluation also
    /// always runs at each epoch end.
    pub eval_every: usize,
    /// Stop after this many consecutive epochs without a new best.
    pub plateau_epochs: usize,
    pub max_epochs: usize,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub rms_decay: f64,
    /// Per-epoch learning-rate decay factor, applied after
    /// `lr_decay_after` epochs.
    pub lr_decay: f64,
    pub lr_decay_after: usize,
    pub clip: f64,
    /// Path-annotation slack used when building datasets.
    pub slack: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            spec: EncodingSpec::default(),
            hidden: 128,
            layers: 2,
            dropout: 0.5,
            bptt_len: 200,
            split: 0.70,
            eval_every: 200,
            plateau_epochs: 2,
            max_epochs: 500,
            optimizer: OptimizerKind::RmsProp,
            lr: 2e-3,
            rms_decay: 0.95,
            lr_decay: 0.97,
            lr_decay_after: 10,
            clip: 5.0,
            slack: 10,
            seed: 0,
        }
    }
}

/// Encoded training material: sequences split by level.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub spec: EncodingSpec,
    pub vocab: Vocabulary,
    pub train: Vec<TokenSequence>,
    pub eval: Vec<TokenSequence>,
    pub train_levels: usize,
    pub eval_levels: usize,
    /// Names of levels dropped because they are not completable (a
    /// path-annotated dataset cannot include them).
    pub skipped: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DatasetError {
    #[error("corpus has {0} usable levels; need at least 2")]
    EmptyCorpus(usize),
    #[error("level `{name}` failed to encode: {reason}")]
    Encode { name: String, reason: String },
}

/// Annotates (for path specs), encodes, and splits a corpus at level
/// granularity by a seeded shuffle. Uncompletable levels are skipped with
/// a note when path annotation is on.
pub fn make_dataset(
    levels: &[(String, TileGrid)],
    spec: EncodingSpec,
    movement: &MovementModel,
    split: f64,
    slack: usize,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    assert!(split > 0.0 && split < 1.0, "split must be inside (0, 1)");
    let mut skipped = Vec::new();
    let mut prepared: Vec<(usize, Vec<TokenSequence>)> = Vec::new();
    for (idx, (name, grid)) in levels.iter().enumerate() {
        let grid = if spec.paths {
            match annotate_paths(grid, movement, slack) {
                Ok(annotated) => annotated,
                Err(_) => {
                    skipped.push(name.clone());
                    continue;
                }
            }
        } else {
            strip_path(grid)
        };
        let seqs = encode(&grid, spec).map_err(|e| DatasetError::Encode {
            name: name.clone(),
            reason: format!("{e}"),
        })?;
        prepared.push((idx, seqs));
    }
    let n = prepared.len();
    if n < 2 {
        return Err(DatasetError::EmptyCorpus(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, stream::SPLIT_SHUFFLE));
    let n_train = (libm::round(n as f64 * split) as usize).clamp(1, n - 1);
    let mut train = Vec::new();
    let mut eval = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let side = if pos < n_train { &mut train } else { &mut eval };
        side.extend(prepared[i].1.iter().cloned());
    }
    Ok(Dataset {
        spec,
        vocab: Vocabulary::for_spec(spec),
        train,
        eval,
        train_levels: n_train,
        eval_levels: n - n_train,
        skipped,
    })
}

/// One point on the evaluation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    /// Training tokens consumed when the evaluation ran.
    pub tokens: u64,
    pub epoch: usize,
    pub nll: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Plateau,
    MaxEpochs,
}

/// Outcome of a training run. `best_checkpoint` is filled in by the IO
/// layer once the best model has been written somewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub spec: EncodingSpec,
    pub eval_curve: Vec<EvalPoint>,
    pub best_nll: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub stop_reason: StopReason,
    pub train_tokens: u64,
    pub best_checkpoint: Option<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrainError {
    #[error("training or evaluation loss diverged (NaN/Inf) at epoch {epoch}")]
    DivergedLoss { epoch: usize },
    #[error("dataset has an empty {0} side")]
    EmptySide(&'static str),
    #[error("lstm error: {0}")]
    Lstm(#[from] crate::lstm::LstmError),
}

/// Mean per-token NLL of `model` over a sequence set, state zeroed at each
/// sequence start. Deterministic: plain ordered reduction.
pub fn eval_nll(model: &LstmModel, seqs: &[TokenSequence]) -> Result<f64, crate::lstm::LstmError> {
    let mut total = 0.0;
    let mut count = 0usize;
    let init = LstmState::zero(model);
    for seq in seqs {
        let (sum, n, _) = sequence_nll(model, &seq.tokens, &init)?;
        total += sum;
        count += n;
    }
    Ok(total / count as f64)
}

/// Runs truncated-BPTT training per the config, returning the report and
/// the best-scoring model.
pub fn train(config: &TrainConfig, dataset: &Dataset) -> Result<(TrainReport, LstmModel), TrainError> {
    if dataset.train.is_empty() {
        return Err(TrainError::EmptySide("train"));
    }
    if dataset.eval.is_empty() {
        return Err(TrainError::EmptySide("eval"));
    }
    let vocab = dataset.vocab.len();
    let mut model = ModelConfig {
        vocab,
        hidden: config.hidden,
        layers: config.layers,
        dropout: config.dropout,
    }
    .build(config.seed);
    let mut optimizer = Optimizer::new(config.optimizer, config.lr, config.rms_decay, &model);
    let mut dropout_rng = stream_rng(config.seed, stream::DROPOUT);
    let mut order_rng = stream_rng(config.seed, stream::EPOCH_ORDER);

    let mut curve: Vec<EvalPoint> = Vec::new();
    let mut best_nll = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut best_model = model.clone();
    let mut tokens_total: u64 = 0;
    let mut tokens_since_eval = 0usize;
    let mut stop_reason = StopReason::MaxEpochs;
    let mut epochs_run = 0usize;

    'epochs: for epoch in 1..=config.max_epochs {
        epochs_run = epoch;
        let lr_scale = if epoch > config.lr_decay_after {
            libm::pow(config.lr_decay, (epoch - config.lr_decay_after) as f64)
        } else {
            1.0
        };
        let mut order: Vec<usize> = (0..dataset.train.len()).collect();
        order.shuffle(&mut order_rng);
        for &si in &order {
            let tokens = &dataset.train[si].tokens;
            let mut state = LstmState::zero(&model);
            let mut pos = 0usize;
            while pos + 1 < tokens.len() {
                let end = (pos + config.bptt_len).min(tokens.len() - 1);
                let window = &tokens[pos..=end];
                let (loss, grads, next_state) =
                    loss_and_grads(&model, window, &state, &mut dropout_rng, config.clip)?;
                if !loss.is_finite() {
                    return Err(TrainError::DivergedLoss { epoch });
                }
                optimizer.step(&mut model, &grads, lr_scale);
                state = next_state;
                tokens_total += (end - pos) as u64;
                tokens_since_eval += end - pos;
                pos = end;
                if tokens_since_eval >= config.eval_every {
                    tokens_since_eval = 0;
                    let nll = eval_nll(&model, &dataset.eval)?;
                    if !nll.is_finite() {
                        return Err(TrainError::DivergedLoss { epoch });
                    }
                    curve.push(EvalPoint { tokens: tokens_total, epoch, nll });
                    if nll < best_nll {
                        best_nll = nll;
                        best_epoch = epoch;
                        best_model = model.clone();
                    }
                }
            }
        }
        // Epoch-end evaluation (skipped when one just ran on this token).
        if tokens_since_eval > 0 || curve.is_empty() {
            tokens_since_eval = 0;
            let nll = eval_nll(&model, &dataset.eval)?;
            if !nll.is_finite() {
                return Err(TrainError::DivergedLoss { epoch });
            }
            curve.push(EvalPoint { tokens: tokens_total, epoch, nll });
            if nll < best_nll {
                best_nll = nll;
                best_epoch = epoch;
                best_model = model.clone();
            }
        }
        if epoch - best_epoch >= config.plateau_epochs {
            stop_reason = StopReason::Plateau;
            break 'epochs;
        }
    }

    let report = TrainReport {
        spec: config.spec,
        eval_curve: curve,
        best_nll,
        best_epoch,
        epochs_run,
        stop_reason,
        train_tokens: tokens_total,
        best_checkpoint: None,
    };
    Ok((report, best_model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::DecodeMode;
    use crate::generate;
    use crate::level::TileCategory;

    fn corpus(n: usize, width: usize) -> Vec<(String, TileGrid)> {
        (0..n)
            .map(|i| {
                let mut grid = TileGrid::filled(width, TileCategory::Empty);
                for c in 0..width {
                    grid.set(c, 15, TileCategory::Solid);
                }
                // Vary levels a little so the split is meaningful.
                if i % 2 == 0 {
                    grid.set(width / 2, 14, TileCategory::Coin);
                }
                (format!("level_{i:02}"), grid)
            })
            .collect()
    }

    #[test]
    fn split_is_by_level() {
        let levels = corpus(10, 8);
        let spec = EncodingSpec::default();
        let ds =
            make_dataset(&levels, spec, &MovementModel::default(), 0.7, 10, 1).unwrap();
        assert_eq!(ds.train_levels, 7);
        assert_eq!(ds.eval_levels, 3);
        assert_eq!(ds.train.len(), 7);
        assert_eq!(ds.eval.len(), 3);
    }

    #[test]
    fn snaking_doubles_sequences() {
        let levels = corpus(10, 8);
        let spec = EncodingSpec::new(true, false, false);
        let ds =
            make_dataset(&levels, spec, &MovementModel::default(), 0.7, 10, 1).unwrap();
        assert_eq!(ds.train.len(), 14);
        assert_eq!(ds.eval.len(), 6);
    }

    #[test]
    fn uncompletable_levels_are_skipped_for_path_specs() {
        let mut levels = corpus(4, 8);
        levels.push((String::from("sealed"), TileGrid::filled(8, TileCategory::Solid)));
        let spec = EncodingSpec::new(false, true, false);
        let ds =
            make_dataset(&levels, spec, &MovementModel::default(), 0.7, 10, 1).unwrap();
        assert_eq!(ds.skipped, vec![String::from("sealed")]);
        assert_eq!(ds.train_levels + ds.eval_levels, 4);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let levels = corpus(1, 8);
        assert_eq!(
            make_dataset(&levels, EncodingSpec::default(), &MovementModel::default(), 0.7, 10, 1)
                .unwrap_err(),
            DatasetError::EmptyCorpus(1)
        );
    }

    #[test]
    fn fresh_model_scores_near_uniform() {
        let levels = corpus(6, 10);
        let ds = make_dataset(&levels, EncodingSpec::default(), &MovementModel::default(), 0.7, 10, 2)
            .unwrap();
        let model = ModelConfig { vocab: 16, hidden: 32, layers: 2, dropout: 0.0 }.build(3);
        let nll = eval_nll(&model, &ds.eval).unwrap();
        let uniform = libm::log(16.0);
        assert!((nll - uniform).abs() / uniform < 0.05, "nll {nll} vs ln16 {uniform}");
    }

    #[test]
    fn plateau_stops_after_exactly_plateau_plus_one_epochs() {
        let levels = corpus(4, 6);
        let ds = make_dataset(&levels, EncodingSpec::default(), &MovementModel::default(), 0.7, 10, 4)
            .unwrap();
        let config = TrainConfig {
            lr: 0.0, // nothing ever improves after the first evaluation
            hidden: 8,
            layers: 1,
            dropout: 0.0,
            eval_every: usize::MAX,
            plateau_epochs: 2,
            seed: 9,
            ..TrainConfig::default()
        };
        let (report, _) = train(&config, &ds).unwrap();
        assert_eq!(report.epochs_run, 3);
        assert_eq!(report.stop_reason, StopReason::Plateau);
        assert_eq!(report.best_epoch, 1);
    }

    #[test]
    fn training_is_deterministic() {
        let levels = corpus(6, 8);
        let ds = make_dataset(&levels, EncodingSpec::default(), &MovementModel::default(), 0.7, 10, 5)
            .unwrap();
        let config = TrainConfig {
            hidden: 12,
            layers: 2,
            max_epochs: 3,
            plateau_epochs: 10,
            eval_every: 64,
            bptt_len: 32,
            seed: 1234,
            ..TrainConfig::default()
        };
        let (r1, m1) = train(&config, &ds).unwrap();
        let (r2, m2) = train(&config, &ds).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(m1, m2);
    }

    #[test]
    fn best_nll_is_curve_minimum_and_not_above_final() {
        let levels = corpus(6, 8);
        let ds = make_dataset(&levels, EncodingSpec::default(), &MovementModel::default(), 0.7, 10, 6)
            .unwrap();
        let config = TrainConfig {
            hidden: 12,
            layers: 1,
            max_epochs: 4,
            plateau_epochs: 10,
            eval_every: usize::MAX,
            bptt_len: 32,
            seed: 7,
            ..TrainConfig::default()
        };
        let (report, best) = train(&config, &ds).unwrap();
        let min = report.eval_curve.iter().map(|p| p.nll).fold(f64::INFINITY, f64::min);
        assert_eq!(report.best_nll, min);
        assert!(report.best_nll <= report.eval_curve.last().unwrap().nll);
        // Re-evaluating the returned best model reproduces the recorded NLL.
        assert!((eval_nll(&best, &ds.eval).unwrap() - report.best_nll).abs() < 1e-12);
    }

    /// Memorization oracle: a small model trained on a single level drives
    /// eval NLL toward zero and greedy sampling reproduces the level.
    #[test]
    fn memorizes_a_single_level() {
        let level = memorization_level();
        let spec = EncodingSpec::default();
        let seqs = encode(&level, spec).unwrap();
        let ds = Dataset {
            spec,
            vocab: Vocabulary::for_spec(spec),
            train: seqs.clone(),
            eval: seqs.clone(),
            train_levels: 1,
            eval_levels: 1,
            skipped: Vec::new(),
        };
        let config = TrainConfig {
            hidden: 32,
            layers: 2,
            dropout: 0.0,
            bptt_len: 32,
            eval_every: usize::MAX,
            plateau_epochs: 100,
            max_epochs: 600,
            lr: 8e-3,
            lr_decay_after: 300,
            seed: 42,
            ..TrainConfig::default()
        };
        let (report, best) = train(&config, &ds).unwrap();
        assert!(report.best_nll < 0.05, "best nll {}", report.best_nll);

        // Greedy regeneration from the level's own first three columns.
        let seed_grid = generate::leading_columns(&level, 3);
        let seed = generate::SeedSpec::custom(seed_grid).unwrap();
        let seed_tokens = seed.tokens(spec).unwrap();
        let outcome = generate::generate_level(
            &best,
            &seed_tokens,
            spec,
            0.0,
            &mut stream_rng(0, stream::GENERATE),
            4096,
        )
        .unwrap();
        let seq = match outcome {
            generate::GenOutcome::Complete(seq) => seq,
            generate::GenOutcome::Overflow { .. } => panic!("overflowed"),
        };
        assert_eq!(seq.tokens, seqs[0].tokens, "greedy sample must replay the level");
        let (decoded, warnings) = crate::codec::decode(&seq, DecodeMode::Lenient).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(decoded, level);
    }

    /// A 20-column level whose every column is unique: two coins per
    /// column encode the column index (row 1+c/5 and row 6+c%5), so the
    /// column-to-column transition is an injective chain a small model can
    /// replay without counting.
    pub(crate) fn memorization_level() -> TileGrid {
        let mut grid = TileGrid::filled(20, TileCategory::Empty);
        for c in 0..20 {
            grid.set(c, 14, TileCategory::Solid);
            grid.set(c, 15, TileCategory::Solid);
            grid.set(c, 1 + c / 5, TileCategory::Coin);
            grid.set(c, 6 + c % 5, TileCategory::Coin);
        }
        grid
    }
}
