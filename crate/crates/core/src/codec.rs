//! Level ⇄ token-sequence conversion under the eight encodings.
//!
//! An encoding is three independent switches: *snaking* (alternate the
//! per-column scan direction instead of always reading bottom-to-top),
//! *paths* (the grid carries path-marker tiles), and *depth* (each column
//! is prefixed with `⌊column/5⌋` depth-marker tokens as a coarse progress
//! signal). Snaking encodes every level twice — once starting upward, once
//! starting downward — doubling the training data.
//!
//! Sequence layout, in every encoding:
//!
//! ```text
//! Start  [depth markers]  tile×16  ColSep  [depth markers]  tile×16  ColSep  …  End
//! ```

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::{TileCategory, TileGrid, GRID_HEIGHT};

/// The three boolean encoding axes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub snaking: bool,
    pub paths: bool,
    pub depth: bool,
}

impl EncodingSpec {
    pub fn new(snaking: bool, paths: bool, depth: bool) -> EncodingSpec {
        EncodingSpec { snaking, paths, depth }
    }

    /// All eight encodings, in a stable order (naive base case first).
    pub fn all() -> [EncodingSpec; 8] {
        let mut out = [EncodingSpec::default(); 8];
        let mut i = 0;
        for depth in [false, true] {
            for paths in [false, true] {
                for snaking in [false, true] {
                    out[i] = EncodingSpec { snaking, paths, depth };
                    i += 1;
                }
            }
        }
        out
    }

    /// Compact `SPD`-style label, e.g. `snaking-path-depth` → `"YYY"`.
    pub fn label(&self) -> String {
        let yn = |b| if b { 'Y' } else { 'N' };
        [yn(self.snaking), yn(self.paths), yn(self.depth)].iter().collect()
    }
}

/// One entry of the token vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Token {
    Tile(TileCategory),
    ColumnDelimiter,
    LevelStart,
    LevelEnd,
    DepthMarker,
}

impl Token {
    /// Stable name used by the sequence file format.
    pub fn name(self) -> &'static str {
        match self {
            Token::Tile(t) => t.name(),
            Token::ColumnDelimiter => "col",
            Token::LevelStart => "start",
            Token::LevelEnd => "end",
            Token::DepthMarker => "depth",
        }
    }
}

/// The ordered token list for one encoding. Indices are stable for a given
/// spec: 13 tile tokens, then the structural tokens, then the optional
/// path/depth tokens — 16 tokens for the base encoding, up to 18 with both
/// extras on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    spec: EncodingSpec,
    tokens: Vec<Token>,
}

impl Vocabulary {
    pub fn for_spec(spec: EncodingSpec) -> Vocabulary {
        let mut tokens: Vec<Token> =
            TileCategory::GROUND_TRUTH.iter().map(|&t| Token::Tile(t)).collect();
        tokens.push(Token::ColumnDelimiter);
        tokens.push(Token::LevelStart);
        tokens.push(Token::LevelEnd);
        if spec.paths {
            tokens.push(Token::Tile(TileCategory::PathMarker));
        }
        if spec.depth {
            tokens.push(Token::DepthMarker);
        }
        Vocabulary { spec, tokens }
    }

    pub fn spec(&self) -> EncodingSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn token(&self, index: u32) -> Option<Token> {
        self.tokens.get(index as usize).copied()
    }

    pub fn index_of(&self, token: Token) -> Option<u32> {
        self.tokens.iter().position(|&t| t == token).map(|i| i as u32)
    }

    pub fn index_of_name(&self, name: &str) -> Option<u32> {
        self.tokens.iter().position(|t| t.name() == name).map(|i| i as u32)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    fn idx(&self, token: Token) -> u32 {
        self.index_of(token).expect("token in vocabulary")
    }
}

/// Scan direction of the first column. Non-snaking sequences always start
/// (and stay) upward; snaking sequences alternate from here, and parity
/// alone cannot recover the direction, so it travels with the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanDirection {
    /// Bottom-to-top (row 15 first).
    Up,
    /// Top-to-bottom (row 0 first).
    Down,
}

impl ScanDirection {
    pub fn name(self) -> &'static str {
        match self {
            ScanDirection::Up => "up",
            ScanDirection::Down => "down",
        }
    }

    pub fn from_name(name: &str) -> Option<ScanDirection> {
        match name {
            "up" => Some(ScanDirection::Up),
            "down" => Some(ScanDirection::Down),
            _ => None,
        }
    }

    fn flipped(self) -> ScanDirection {
        match self {
            ScanDirection::Up => ScanDirection::Down,
            ScanDirection::Down => ScanDirection::Up,
        }
    }
}

/// A level flattened to vocabulary indices under one encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub spec: EncodingSpec,
    pub start_dir: ScanDirection,
    pub tokens: Vec<u32>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("encoding requests paths but the grid has no path markers")]
    PathsRequestedButAbsent,
    #[error("grid contains path markers but the encoding has no path token")]
    UnexpectedPathMarker,
}

/// Expected depth-marker count for a column.
fn depth_count(col: usize) -> usize {
    col / 5
}

/// Scan direction of column `col` for a sequence starting with `start_dir`.
fn column_dir(spec: EncodingSpec, start_dir: ScanDirection, col: usize) -> ScanDirection {
    if !spec.snaking || col % 2 == 0 {
        start_dir
    } else {
        start_dir.flipped()
    }
}

/// Encodes a grid. Non-snaking specs produce one sequence; snaking specs
/// produce two (one per starting direction). When `spec.paths` is set the
/// grid must already be annotated — encoding never runs the pathfinder.
pub fn encode(grid: &TileGrid, spec: EncodingSpec) -> Result<Vec<TokenSequence>, EncodeError> {
    let has_marker = grid.contains(TileCategory::PathMarker);
    if spec.paths && !has_marker && grid.contains(TileCategory::Empty) {
        return Err(EncodeError::PathsRequestedButAbsent);
    }
    if !spec.paths && has_marker {
        return Err(EncodeError::UnexpectedPathMarker);
    }
    let vocab = Vocabulary::for_spec(spec);
    let dirs: &[ScanDirection] = if spec.snaking {
        &[ScanDirection::Up, ScanDirection::Down]
    } else {
        &[ScanDirection::Up]
    };
    Ok(dirs.iter().map(|&d| encode_one(grid, &vocab, d)).collect())
}

fn encode_one(grid: &TileGrid, vocab: &Vocabulary, start_dir: ScanDirection) -> TokenSequence {
    let spec = vocab.spec();
    let mut tokens = Vec::with_capacity(2 + grid.width() * (GRID_HEIGHT + 2));
    tokens.push(vocab.idx(Token::LevelStart));
    for col in 0..grid.width() {
        if spec.depth {
            for _ in 0..depth_count(col) {
                tokens.push(vocab.idx(Token::DepthMarker));
            }
        }
        let rows: Vec<usize> = match column_dir(spec, start_dir, col) {
            ScanDirection::Up => (0..GRID_HEIGHT).rev().collect(),
            ScanDirection::Down => (0..GRID_HEIGHT).collect(),
        };
        for row in rows {
            tokens.push(vocab.idx(Token::Tile(grid.get(col, row))));
        }
        tokens.push(vocab.idx(Token::ColumnDelimiter));
    }
    tokens.push(vocab.idx(Token::LevelEnd));
    TokenSequence { spec, start_dir, tokens }
}

/// Strict mode rejects malformed sequences; lenient mode repairs them and
/// reports warnings instead, which is how sampled levels are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    Strict,
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeWarning {
    /// A column carried a non-16 number of tile tokens (`found`), or the
    /// sequence ended mid-column.
    ColumnIntegrity { col: usize, found: usize },
    /// Depth-marker count disagreed with `⌊col/5⌋`.
    DepthCount { col: usize, expected: usize, found: usize },
    /// A token that cannot occur at this position (stray start marker,
    /// depth marker in a depthless spec slot, tokens after the end).
    Stray { position: usize },
}

impl DecodeWarning {
    /// True for the warnings that criterion-style structure checks count:
    /// violations of the 16-tiles-per-column invariant.
    pub fn is_column_integrity(&self) -> bool {
        matches!(self, DecodeWarning::ColumnIntegrity { .. })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("column {col} has {found} tile tokens, expected {GRID_HEIGHT}")]
    MalformedColumn { col: usize, found: usize },
    #[error("column {col} has {found} depth markers, expected {expected}")]
    BadDepthCount { col: usize, expected: usize, found: usize },
    #[error("sequence ended before a level end token")]
    TruncatedSequence,
    #[error("token index {index} is outside the vocabulary (size {vocab})")]
    UnknownToken { index: u32, vocab: usize },
    #[error("stray {what} token at position {position}")]
    StrayToken { position: usize, what: &'static str },
    #[error("sequence contains no complete columns")]
    EmptyLevel,
}

/// Reconstructs the grid a sequence describes.
///
/// Lenient decoding is total over anything the sampler can emit (short of
/// a zero-column sequence): bad columns are padded or truncated, depth
/// miscounts and stray tokens are tolerated, and every repair is returned
/// as a warning.
pub fn decode(
    seq: &TokenSequence,
    mode: DecodeMode,
) -> Result<(TileGrid, Vec<DecodeWarning>), DecodeError> {
    let vocab = Vocabulary::for_spec(seq.spec);
    let strict = mode == DecodeMode::Strict;
    let mut warnings = Vec::new();
    let mut columns: Vec<Vec<TileCategory>> = Vec::new();
    let mut cur_tiles: Vec<TileCategory> = Vec::new();
    let mut cur_depth = 0usize;
    let mut started = false;
    let mut ended = false;

    for (pos, &index) in seq.tokens.iter().enumerate() {
        let token = vocab
            .token(index)
            .ok_or(DecodeError::UnknownToken { index, vocab: vocab.len() })?;
        if ended {
            if strict {
                return Err(DecodeError::StrayToken { position: pos, what: "post-end" });
            }
            warnings.push(DecodeWarning::Stray { position: pos });
            continue;
        }
        if !started {
            if token == Token::LevelStart {
                started = true;
                continue;
            }
            if strict {
                return Err(DecodeError::StrayToken { position: pos, what: "pre-start" });
            }
            warnings.push(DecodeWarning::Stray { position: pos });
            // Lenient: treat the sequence as started and fall through.
            started = true;
        }
        match token {
            Token::LevelStart => {
                if strict {
                    return Err(DecodeError::StrayToken { position: pos, what: "start" });
                }
                warnings.push(DecodeWarning::Stray { position: pos });
            }
            Token::LevelEnd => {
                if !cur_tiles.is_empty() || cur_depth > 0 {
                    // Ended mid-column.
                    if strict {
                        return Err(DecodeError::TruncatedSequence);
                    }
                    close_column(
                        seq.spec,
                        &mut columns,
                        &mut cur_tiles,
                        &mut cur_depth,
                        &mut warnings,
                        false,
                    )?;
                }
                ended = true;
            }
            Token::ColumnDelimiter => {
                close_column(
                    seq.spec,
                    &mut columns,
                    &mut cur_tiles,
                    &mut cur_depth,
                    &mut warnings,
                    strict,
                )?;
            }
            Token::DepthMarker => {
                cur_depth += 1;
            }
            Token::Tile(tile) => {
                cur_tiles.push(tile);
            }
        }
    }
    if !ended {
        if strict {
            return Err(DecodeError::TruncatedSequence);
        }
        if !cur_tiles.is_empty() || cur_depth > 0 {
            close_column(seq.spec, &mut columns, &mut cur_tiles, &mut cur_depth, &mut warnings, false)?;
        }
    }
    if columns.is_empty() {
        return Err(DecodeError::EmptyLevel);
    }

    let width = columns.len();
    let mut grid = TileGrid::filled(width, TileCategory::Empty);
    for (col, tiles) in columns.iter().enumerate() {
        let rows: Vec<usize> = match column_dir(seq.spec, seq.start_dir, col) {
            ScanDirection::Up => (0..GRID_HEIGHT).rev().collect(),
            ScanDirection::Down => (0..GRID_HEIGHT).collect(),
        };
        for (row, &tile) in rows.into_iter().zip(tiles.iter()) {
            grid.set(col, row, tile);
        }
    }
    Ok((grid, warnings))
}

/// Finishes the current column: validates tile and depth counts, pads or
/// truncates to 16 tiles, and appends it. `cur_tiles`/`cur_depth` are left
/// reset for the next column.
fn close_column(
    spec: EncodingSpec,
    columns: &mut Vec<Vec<TileCategory>>,
    cur_tiles: &mut Vec<TileCategory>,
    cur_depth: &mut usize,
    warnings: &mut Vec<DecodeWarning>,
    strict: bool,
) -> Result<(), DecodeError> {
    let col = columns.len();
    let found = cur_tiles.len();
    if found != GRID_HEIGHT {
        if strict {
            return Err(DecodeError::MalformedColumn { col, found });
        }
        warnings.push(DecodeWarning::ColumnIntegrity { col, found });
        cur_tiles.resize(GRID_HEIGHT, TileCategory::Empty);
    }
    let expected = if spec.depth { depth_count(col) } else { 0 };
    if *cur_depth != expected {
        if strict {
            return Err(DecodeError::BadDepthCount { col, expected, found: *cur_depth });
        }
        warnings.push(DecodeWarning::DepthCount { col, expected, found: *cur_depth });
    }
    columns.push(core::mem::take(cur_tiles));
    *cur_depth = 0;
    Ok(())
}

/// Replaces every path marker with empty space — the display form of an
/// annotated or sampled level.
pub fn strip_path(grid: &TileGrid) -> TileGrid {
    let cells = grid
        .cells()
        .iter()
        .map(|&c| if c == TileCategory::PathMarker { TileCategory::Empty } else { c })
        .collect();
    TileGrid::from_cells(grid.width(), cells)
}
