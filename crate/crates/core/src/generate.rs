//! Seeded sampling of complete levels from a trained model.
//!
//! Generation primes the model with a three-column seed (plus the start
//! token) and samples until the model emits the end-of-level token or the
//! token budget runs out. Each level in a batch draws from its own RNG
//! stream derived from `(master seed, index)`, so any single level can be
//! replayed without regenerating the rest.

use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{encode, strip_path, EncodeError, EncodingSpec, Token, TokenSequence, Vocabulary};
use crate::level::{TileCategory, TileGrid, GRID_HEIGHT};
use crate::lstm::{forward_step, sample_next, LstmModel, LstmState};
use crate::path::{annotate_paths, MovementModel, NotCompletable};
use crate::rngutil::{stream, stream_rng};

/// Column budget behind the default token cap.
pub const MAX_GENERATED_COLUMNS: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedKind {
    Aboveground,
    Underground,
    Custom,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeedError {
    #[error("seed must be exactly 3 columns wide, got {0}")]
    BadWidth(usize),
    #[error("seed cannot be annotated: {0}")]
    NotCompletable(#[from] NotCompletable),
    #[error("seed does not encode: {0}")]
    Encode(#[from] EncodeError),
}

/// A three-column starter grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSpec {
    pub kind: SeedKind,
    pub grid: TileGrid,
}

impl SeedSpec {
    /// Open air over two rows of ground.
    pub fn aboveground() -> SeedSpec {
        let mut grid = TileGrid::filled(3, TileCategory::Empty);
        for c in 0..3 {
            grid.set(c, 14, TileCategory::Solid);
            grid.set(c, 15, TileCategory::Solid);
        }
        SeedSpec { kind: SeedKind::Aboveground, grid }
    }

    /// Ground plus a solid ceiling along the top row.
    pub fn underground() -> SeedSpec {
        let mut seed = SeedSpec::aboveground();
        for c in 0..3 {
            seed.grid.set(c, 0, TileCategory::Solid);
        }
        seed.kind = SeedKind::Underground;
        seed
    }

    pub fn custom(grid: TileGrid) -> Result<SeedSpec, SeedError> {
        if grid.width() != 3 {
            return Err(SeedError::BadWidth(grid.width()));
        }
        Ok(SeedSpec { kind: SeedKind::Custom, grid })
    }

    /// Adapts the seed grid to an encoding: annotates it when the spec
    /// carries paths and the grid has no markers yet, strips markers when
    /// it does not.
    pub fn prepared(
        &self,
        spec: EncodingSpec,
        movement: &MovementModel,
        slack: usize,
    ) -> Result<SeedSpec, SeedError> {
        let grid = if spec.paths {
            if self.grid.contains(TileCategory::PathMarker) {
                self.grid.clone()
            } else {
                annotate_paths(&self.grid, movement, slack)?
            }
        } else {
            strip_path(&self.grid)
        };
        Ok(SeedSpec { kind: self.kind, grid })
    }

    /// The priming tokens: level start plus the three seed columns,
    /// without the end token. Snaking seeds start upward.
    pub fn tokens(&self, spec: EncodingSpec) -> Result<Vec<u32>, SeedError> {
        let seqs = encode(&self.grid, spec)?;
        let vocab = Vocabulary::for_spec(spec);
        let end = vocab.index_of(Token::LevelEnd).expect("end token");
        let mut tokens = seqs[0].tokens.clone();
        assert_eq!(tokens.pop(), Some(end));
        Ok(tokens)
    }
}

/// The first `count` columns of a grid, as a new grid.
pub fn leading_columns(grid: &TileGrid, count: usize) -> TileGrid {
    let mut out = TileGrid::filled(count, TileCategory::Empty);
    for col in 0..count {
        for row in 0..GRID_HEIGHT {
            out.set(col, row, grid.get(col, row));
        }
    }
    out
}

/// Result of one generation attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenOutcome {
    Complete(TokenSequence),
    /// The token budget ran out before an end token appeared. Counted and
    /// excluded from metrics.
    Overflow { tokens: usize },
}

/// Token budget for a level of `cols` columns under a spec (start and end
/// tokens, tiles, delimiters, and depth markers).
pub fn token_budget(spec: EncodingSpec, cols: usize) -> usize {
    let mut total = 2 + cols * (GRID_HEIGHT + 1);
    if spec.depth {
        total += (0..cols).map(|c| c / 5).sum::<usize>();
    }
    total
}

/// The default generation cap: a 600-column level.
pub fn default_max_tokens(spec: EncodingSpec) -> usize {
    token_budget(spec, MAX_GENERATED_COLUMNS)
}

/// Samples one level. The sequence is the seed tokens plus sampled tokens,
/// ending with the level-end token unless the budget overflows first.
pub fn generate_level(
    model: &LstmModel,
    seed_tokens: &[u32],
    spec: EncodingSpec,
    temperature: f64,
    rng: &mut ChaCha8Rng,
    max_tokens: usize,
) -> Result<GenOutcome, crate::lstm::LstmError> {
    assert!(!seed_tokens.is_empty(), "seed tokens must be non-empty");
    assert!(max_tokens >= seed_tokens.len(), "budget smaller than the seed");
    let vocab = Vocabulary::for_spec(spec);
    let end = vocab.index_of(Token::LevelEnd).expect("end token");
    let mut state = LstmState::zero(model);
    for &t in &seed_tokens[..seed_tokens.len() - 1] {
        let (_, next) = forward_step(model, &state, t, None)?;
        state = next;
    }
    let mut tokens = seed_tokens.to_vec();
    let mut last = *seed_tokens.last().expect("non-empty seed");
    loop {
        let (tok, next) = sample_next(model, &state, last, temperature, rng)?;
        state = next;
        tokens.push(tok);
        if tok == end {
            return Ok(GenOutcome::Complete(TokenSequence {
                spec,
                start_dir: crate::codec::ScanDirection::Up,
                tokens,
            }));
        }
        if tokens.len() >= max_tokens {
            return Ok(GenOutcome::Overflow { tokens: tokens.len() });
        }
        last = tok;
    }
}

/// Batch generation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationJob {
    pub count: usize,
    pub temperature: f64,
    pub master_seed: u64,
    pub max_tokens: usize,
}

/// One attempt of a batch, tagged with the RNG stream that replays it.
#[derive(Debug, Clone)]
pub struct GeneratedLevel {
    pub index: usize,
    /// ChaCha stream id: `stream::GENERATE + index` under the master seed.
    pub rng_stream: u64,
    pub outcome: GenOutcome,
}

/// RNG for level `index` of a batch. Exposed so single levels can be
/// replayed from a manifest.
pub fn level_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    stream_rng(master_seed, level_stream_id(index))
}

/// The ChaCha stream id level `index` draws from (recorded in manifests).
pub fn level_stream_id(index: usize) -> u64 {
    stream::GENERATE + index as u64
}

/// Generates `job.count` levels, each from its own derived RNG stream.
pub fn generate_batch(
    model: &LstmModel,
    spec: EncodingSpec,
    seed: &SeedSpec,
    job: &GenerationJob,
) -> Result<Vec<GeneratedLevel>, crate::lstm::LstmError> {
    let seed_tokens = seed.tokens(spec).expect("seed encodes under the model spec");
    let mut out = Vec::with_capacity(job.count);
    for index in 0..job.count {
        let mut rng = level_rng(job.master_seed, index);
        let outcome =
            generate_level(model, &seed_tokens, spec, job.temperature, &mut rng, job.max_tokens)?;
        out.push(GeneratedLevel {
            index,
            rng_stream: stream::GENERATE + index as u64,
            outcome,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode, DecodeMode};
    use crate::lstm::ModelConfig;

    #[test]
    fn builtin_seeds_have_three_columns() {
        for seed in [SeedSpec::aboveground(), SeedSpec::underground()] {
            assert_eq!(seed.grid.width(), 3);
            let tokens = seed.tokens(EncodingSpec::default()).unwrap();
            // Start + 3 columns of 16 tiles + 3 delimiters.
            assert_eq!(tokens.len(), 1 + 3 * 17);
        }
        assert_eq!(
            SeedSpec::underground().grid.get(1, 0),
            TileCategory::Solid
        );
        assert_eq!(SeedSpec::aboveground().grid.get(1, 0), TileCategory::Empty);
    }

    #[test]
    fn custom_seed_width_is_checked() {
        let grid = TileGrid::filled(4, TileCategory::Empty);
        assert_eq!(SeedSpec::custom(grid).unwrap_err(), SeedError::BadWidth(4));
    }

    #[test]
    fn prepared_seed_carries_markers_for_path_specs() {
        let spec = EncodingSpec::new(false, true, false);
        let seed = SeedSpec::aboveground()
            .prepared(spec, &MovementModel::default(), 10)
            .unwrap();
        assert!(seed.grid.contains(TileCategory::PathMarker));
        let tokens = seed.tokens(spec).unwrap();
        let vocab = Vocabulary::for_spec(spec);
        let marker = vocab.index_of(Token::Tile(TileCategory::PathMarker)).unwrap();
        assert!(tokens.contains(&marker));
        // And stripping for a pathless spec removes them again.
        let plain = seed.prepared(EncodingSpec::default(), &MovementModel::default(), 10).unwrap();
        assert!(!plain.grid.contains(TileCategory::PathMarker));
    }

    #[test]
    fn token_budget_counts_structure() {
        let base = EncodingSpec::default();
        assert_eq!(token_budget(base, 1), 2 + 17);
        let depth = EncodingSpec::new(false, false, true);
        // Columns 0–6: depth markers 0,0,0,0,0,1,1.
        assert_eq!(token_budget(depth, 7), 2 + 7 * 17 + 2);
        assert!(default_max_tokens(depth) > default_max_tokens(base));
    }

    #[test]
    fn untrained_model_generation_is_reproducible() {
        let spec = EncodingSpec::default();
        let model = ModelConfig { vocab: 16, hidden: 8, layers: 1, dropout: 0.0 }.build(1);
        let seed = SeedSpec::aboveground();
        let tokens = seed.tokens(spec).unwrap();
        let run = |stream: usize| {
            let mut rng = level_rng(7, stream);
            generate_level(&model, &tokens, spec, 1.0, &mut rng, 2048).unwrap()
        };
        assert_eq!(run(0), run(0));
        // Different streams diverge (overwhelmingly likely).
        assert_ne!(run(0), run(1));
    }

    #[test]
    fn every_complete_generation_decodes_leniently() {
        let spec = EncodingSpec::new(false, false, true);
        let model = ModelConfig { vocab: 17, hidden: 8, layers: 1, dropout: 0.0 }.build(2);
        let seed = SeedSpec::aboveground();
        let tokens = seed.tokens(spec).unwrap();
        let job = GenerationJob { count: 5, temperature: 1.0, master_seed: 3, max_tokens: 1200 };
        let batch = generate_batch(&model, spec, &seed, &job).unwrap();
        assert_eq!(batch.len(), 5);
        for level in batch {
            if let GenOutcome::Complete(seq) = level.outcome {
                let (grid, _warnings) = decode(&seq, DecodeMode::Lenient).unwrap();
                assert!(grid.width() >= 3);
            }
        }
    }

    #[test]
    fn batch_replays_level_by_level() {
        let spec = EncodingSpec::default();
        let model = ModelConfig { vocab: 16, hidden: 8, layers: 1, dropout: 0.0 }.build(4);
        let seed = SeedSpec::aboveground();
        let job = GenerationJob { count: 4, temperature: 1.0, master_seed: 11, max_tokens: 1024 };
        let batch = generate_batch(&model, spec, &seed, &job).unwrap();
        let tokens = seed.tokens(spec).unwrap();
        // Replay level 2 alone from (master seed, index).
        let mut rng = level_rng(11, 2);
        let replay = generate_level(&model, &tokens, spec, 1.0, &mut rng, 1024).unwrap();
        assert_eq!(replay, batch[2].outcome);
    }
}
