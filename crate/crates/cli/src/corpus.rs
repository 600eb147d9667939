//! Level files and corpus directories.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use levelgen_core::level::{
    parse_level, serialize_level, CharMap, TileGrid, TYPICAL_MAX_WIDTH,
};

/// Loads a character map: the default, optionally overridden by a
/// `category=char` file.
pub fn load_charmap(path: Option<&Path>) -> Result<CharMap> {
    match path {
        None => Ok(CharMap::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading charmap {}", p.display()))?;
            CharMap::parse_overrides(&text)
                .with_context(|| format!("parsing charmap {}", p.display()))
        }
    }
}

pub fn load_level(path: &Path, map: &CharMap) -> Result<TileGrid> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading level {}", path.display()))?;
    parse_level(&text, map).with_context(|| format!("parsing level {}", path.display()))
}

pub fn write_level(path: &Path, grid: &TileGrid, map: &CharMap) -> Result<()> {
    fs::write(path, serialize_level(grid, map))
        .with_context(|| format!("writing level {}", path.display()))
}

/// A corpus directory: every `*.txt` file, sorted by name for
/// reproducibility. Returns the levels and any width warnings.
pub fn load_corpus(dir: &Path, map: &CharMap) -> Result<(Vec<(String, TileGrid)>, Vec<String>)> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading corpus dir {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .txt levels in {}", dir.display());
    }
    let mut levels = Vec::with_capacity(files.len());
    let mut warnings = Vec::new();
    for path in files {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("level")
            .to_string();
        let grid = load_level(&path, map)?;
        if grid.width() > TYPICAL_MAX_WIDTH {
            warnings.push(format!(
                "level `{name}` is {} columns wide (over the typical {TYPICAL_MAX_WIDTH}); accepted",
                grid.width()
            ));
        }
        levels.push((name, grid));
    }
    Ok((levels, warnings))
}
