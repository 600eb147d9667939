//! Tile vocabulary, the 16-row level grid, and the textual level format.
//!
//! A level file is 16 lines of single-character tiles, one character per
//! cell, row 0 at the top. The character map is a strict bijection and is
//! overridable, so existing corpora can be adapted with a one-line remap.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Every level is exactly this many rows tall.
pub const GRID_HEIGHT: usize = 16;

/// Widths beyond this are legal but unusual; IO layers warn about them.
pub const TYPICAL_MAX_WIDTH: usize = 500;

/// The 13 ground-truth tile categories plus the derived path marker.
///
/// `PathMarker` never occurs in a raw corpus level; it is introduced by
/// path annotation and only ever replaces `Empty` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TileCategory {
    Solid,
    Enemy,
    DestructibleBlock,
    QuestionCoin,
    QuestionPowerup,
    Coin,
    BulletTop,
    BulletColumn,
    PipeLeft,
    PipeRight,
    PipeTopLeft,
    PipeTopRight,
    Empty,
    PathMarker,
}

impl TileCategory {
    /// All categories, path marker last. Index order is stable and shared
    /// by [`CharMap`] and the token vocabulary.
    pub const ALL: [TileCategory; 14] = [
        TileCategory::Solid,
        TileCategory::Enemy,
        TileCategory::DestructibleBlock,
        TileCategory::QuestionCoin,
        TileCategory::QuestionPowerup,
        TileCategory::Coin,
        TileCategory::BulletTop,
        TileCategory::BulletColumn,
        TileCategory::PipeLeft,
        TileCategory::PipeRight,
        TileCategory::PipeTopLeft,
        TileCategory::PipeTopRight,
        TileCategory::Empty,
        TileCategory::PathMarker,
    ];

    /// The closed set of categories a raw corpus file may contain.
    pub const GROUND_TRUTH: [TileCategory; 13] = [
        TileCategory::Solid,
        TileCategory::Enemy,
        TileCategory::DestructibleBlock,
        TileCategory::QuestionCoin,
        TileCategory::QuestionPowerup,
        TileCategory::Coin,
        TileCategory::BulletTop,
        TileCategory::BulletColumn,
        TileCategory::PipeLeft,
        TileCategory::PipeRight,
        TileCategory::PipeTopLeft,
        TileCategory::PipeTopRight,
        TileCategory::Empty,
    ];

    /// Stable lowercase name, used in charmap files and token listings.
    pub fn name(self) -> &'static str {
        match self {
            TileCategory::Solid => "solid",
            TileCategory::Enemy => "enemy",
            TileCategory::DestructibleBlock => "destructible_block",
            TileCategory::QuestionCoin => "question_coin",
            TileCategory::QuestionPowerup => "question_powerup",
            TileCategory::Coin => "coin",
            TileCategory::BulletTop => "bullet_top",
            TileCategory::BulletColumn => "bullet_column",
            TileCategory::PipeLeft => "pipe_left",
            TileCategory::PipeRight => "pipe_right",
            TileCategory::PipeTopLeft => "pipe_top_left",
            TileCategory::PipeTopRight => "pipe_top_right",
            TileCategory::Empty => "empty",
            TileCategory::PathMarker => "path_marker",
        }
    }

    pub fn from_name(name: &str) -> Option<TileCategory> {
        TileCategory::ALL.into_iter().find(|c| c.name() == name)
    }

    fn index(self) -> usize {
        TileCategory::ALL.iter().position(|&c| c == self).unwrap()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CharMapError {
    #[error("duplicate character {ch:?} for {first} and {second}")]
    DuplicateChar { ch: char, first: &'static str, second: &'static str },
    #[error("unknown category name `{0}`")]
    UnknownCategory(String),
    #[error("line {line}: expected `category=char`, got `{text}`")]
    BadLine { line: usize, text: String },
}

/// Bijection between tile categories and single ASCII characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharMap {
    chars: [char; 14],
}

impl Default for CharMap {
    fn default() -> Self {
        CharMap {
            chars: ['X', 'E', 'S', '?', 'Q', 'o', 'B', 'b', '[', ']', '<', '>', '-', 'x'],
        }
    }
}

impl CharMap {
    /// Builds a map from the default with the given `(category, char)`
    /// overrides applied, rejecting any non-bijective result.
    pub fn with_overrides(
        overrides: &[(TileCategory, char)],
    ) -> Result<CharMap, CharMapError> {
        let mut map = CharMap::default();
        for &(cat, ch) in overrides {
            map.chars[cat.index()] = ch;
        }
        map.check_bijective()?;
        Ok(map)
    }

    /// Parses the plain `category=char` override format (one per line;
    /// blank lines and `#` comments ignored) on top of the defaults.
    pub fn parse_overrides(text: &str) -> Result<CharMap, CharMapError> {
        let mut overrides = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || CharMapError::BadLine { line: i + 1, text: String::from(raw) };
            let (name, value) = line.split_once('=').ok_or_else(bad)?;
            let cat = TileCategory::from_name(name.trim())
                .ok_or_else(|| CharMapError::UnknownCategory(String::from(name.trim())))?;
            let mut chars = value.trim().chars();
            let ch = chars.next().ok_or_else(bad)?;
            if chars.next().is_some() {
                return Err(bad());
            }
            overrides.push((cat, ch));
        }
        CharMap::with_overrides(&overrides)
    }

    fn check_bijective(&self) -> Result<(), CharMapError> {
        for i in 0..self.chars.len() {
            for j in i + 1..self.chars.len() {
                if self.chars[i] == self.chars[j] {
                    return Err(CharMapError::DuplicateChar {
                        ch: self.chars[i],
                        first: TileCategory::ALL[i].name(),
                        second: TileCategory::ALL[j].name(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn char_for(&self, cat: TileCategory) -> char {
        self.chars[cat.index()]
    }

    pub fn category_for(&self, ch: char) -> Option<TileCategory> {
        self.chars.iter().position(|&c| c == ch).map(|i| TileCategory::ALL[i])
    }
}

/// A `width × 16` grid of tiles. Coordinates are `(col, row)` with row 0 at
/// the top of the level; storage is row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileGrid {
    width: usize,
    cells: Vec<TileCategory>,
}

impl TileGrid {
    /// A grid with every cell set to `fill`. Panics if `width` is zero.
    pub fn filled(width: usize, fill: TileCategory) -> TileGrid {
        assert!(width >= 1, "grid width must be at least 1");
        TileGrid { width, cells: vec![fill; width * GRID_HEIGHT] }
    }

    /// Builds a grid from row-major cells; `cells.len()` must equal
    /// `width * 16`.
    pub fn from_cells(width: usize, cells: Vec<TileCategory>) -> TileGrid {
        assert!(width >= 1, "grid width must be at least 1");
        assert_eq!(cells.len(), width * GRID_HEIGHT, "cell count must be width * 16");
        TileGrid { width, cells }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        GRID_HEIGHT
    }

    pub fn get(&self, col: usize, row: usize) -> TileCategory {
        self.cells[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, cat: TileCategory) {
        self.cells[row * self.width + col] = cat;
    }

    pub fn cells(&self) -> &[TileCategory] {
        &self.cells
    }

    pub fn count(&self, cat: TileCategory) -> usize {
        self.cells.iter().filter(|&&c| c == cat).count()
    }

    pub fn contains(&self, cat: TileCategory) -> bool {
        self.cells.iter().any(|&c| c == cat)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseLevelError {
    #[error("expected {GRID_HEIGHT} lines, found {found}")]
    BadHeight { found: usize },
    #[error("line {line} has {found} characters, expected {expected}")]
    RaggedLines { line: usize, expected: usize, found: usize },
    #[error("unknown character {ch:?} at line {line}, column {col}")]
    UnknownChar { line: usize, col: usize, ch: char },
    #[error("level has no columns")]
    EmptyGrid,
}

/// Parses a 16-line level text into a grid. Line `r`, column `c` becomes
/// cell `(c, r)`.
pub fn parse_level(text: &str, map: &CharMap) -> Result<TileGrid, ParseLevelError> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() != GRID_HEIGHT {
        return Err(ParseLevelError::BadHeight { found: lines.len() });
    }
    let width = lines[0].chars().count();
    if width == 0 {
        return Err(ParseLevelError::EmptyGrid);
    }
    let mut cells = Vec::with_capacity(width * GRID_HEIGHT);
    for (r, line) in lines.iter().enumerate() {
        let mut n = 0;
        for (c, ch) in line.chars().enumerate() {
            if c >= width {
                break;
            }
            let cat = map
                .category_for(ch)
                .ok_or(ParseLevelError::UnknownChar { line: r + 1, col: c + 1, ch })?;
            cells.push(cat);
            n += 1;
        }
        let total = line.chars().count();
        if total != width {
            return Err(ParseLevelError::RaggedLines { line: r + 1, expected: width, found: total });
        }
        debug_assert_eq!(n, width);
    }
    Ok(TileGrid::from_cells(width, cells))
}

/// Renders a grid back to its canonical text form: 16 LF-terminated lines.
/// Exact inverse of [`parse_level`].
pub fn serialize_level(grid: &TileGrid, map: &CharMap) -> String {
    let mut out = String::with_capacity((grid.width() + 1) * GRID_HEIGHT);
    for row in 0..GRID_HEIGHT {
        for col in 0..grid.width() {
            out.push(map.char_for(grid.get(col, row)));
        }
        out.push('\n');
    }
    out
}
