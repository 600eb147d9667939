//! Token-sequence files: a header line declaring the encoding and start
//! direction, then whitespace-separated token names (one column per line
//! for readability).
//!
//! ```text
//! #spec snaking=Y paths=N depth=N start_dir=up
//! start
//! empty empty ... solid col
//! ...
//! end
//! ```

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use levelgen_core::codec::{
    EncodingSpec, ScanDirection, Token, TokenSequence, Vocabulary,
};

pub fn render(seq: &TokenSequence) -> String {
    let vocab = Vocabulary::for_spec(seq.spec);
    let yn = |b| if b { "Y" } else { "N" };
    let mut out = format!(
        "#spec snaking={} paths={} depth={} start_dir={}\n",
        yn(seq.spec.snaking),
        yn(seq.spec.paths),
        yn(seq.spec.depth),
        seq.start_dir.name()
    );
    let mut line: Vec<&str> = Vec::new();
    for &t in &seq.tokens {
        let token = vocab.token(t).expect("token in vocabulary");
        line.push(token.name());
        // Break after structural tokens so each column reads as one line.
        if matches!(token, Token::ColumnDelimiter | Token::LevelStart | Token::LevelEnd) {
            out.push_str(&line.join(" "));
            out.push('\n');
            line.clear();
        }
    }
    if !line.is_empty() {
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse(text: &str) -> Result<TokenSequence> {
    let mut lines = text.lines();
    let header = lines.next().context("sequence file is empty")?;
    let rest = text[header.len()..].trim_start_matches(['\r', '\n']);
    let Some(fields) = header.strip_prefix("#spec ") else {
        bail!("sequence file must start with a `#spec` header, got `{header}`");
    };
    let mut snaking = None;
    let mut paths = None;
    let mut depth = None;
    let mut start_dir = None;
    for field in fields.split_whitespace() {
        let Some((key, value)) = field.split_once('=') else {
            bail!("bad header field `{field}`");
        };
        let flag = || match value {
            "Y" => Ok(true),
            "N" => Ok(false),
            _ => bail!("expected Y or N for `{key}`, got `{value}`"),
        };
        match key {
            "snaking" => snaking = Some(flag()?),
            "paths" => paths = Some(flag()?),
            "depth" => depth = Some(flag()?),
            "start_dir" => {
                start_dir = Some(
                    ScanDirection::from_name(value)
                        .with_context(|| format!("bad start_dir `{value}`"))?,
                )
            }
            _ => bail!("unknown header field `{key}`"),
        }
    }
    let (Some(snaking), Some(paths), Some(depth), Some(start_dir)) =
        (snaking, paths, depth, start_dir)
    else {
        bail!("header must declare snaking, paths, depth, and start_dir");
    };
    let spec = EncodingSpec { snaking, paths, depth };
    let vocab = Vocabulary::for_spec(spec);
    let mut tokens = Vec::new();
    for name in rest.split_whitespace() {
        let idx = vocab
            .index_of_name(name)
            .with_context(|| format!("unknown token `{name}` for spec {}", spec.label()))?;
        tokens.push(idx);
    }
    Ok(TokenSequence { spec, start_dir, tokens })
}

pub fn write(path: &Path, seq: &TokenSequence) -> Result<()> {
    fs::write(path, render(seq)).with_context(|| format!("writing {}", path.display()))
}

pub fn read(path: &Path) -> Result<TokenSequence> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use levelgen_core::codec::encode;
    use levelgen_core::level::{TileCategory, TileGrid};

    #[test]
    fn render_parse_round_trips_every_spec() {
        let mut grid = TileGrid::filled(6, TileCategory::Empty);
        for c in 0..6 {
            grid.set(c, 15, TileCategory::Solid);
        }
        grid.set(2, 14, TileCategory::Coin);
        let marked = {
            let mut g = grid.clone();
            g.set(3, 14, TileCategory::PathMarker);
            g
        };
        for spec in EncodingSpec::all() {
            let source = if spec.paths { &marked } else { &grid };
            for seq in encode(source, spec).unwrap() {
                let parsed = parse(&render(&seq)).unwrap();
                assert_eq!(parsed, seq, "spec {}", spec.label());
            }
        }
    }

    #[test]
    fn header_is_validated() {
        assert!(parse("").is_err());
        assert!(parse("tokens without header\n").is_err());
        assert!(parse("#spec snaking=Y paths=N\nstart end\n").is_err());
        assert!(parse("#spec snaking=Q paths=N depth=N start_dir=up\n").is_err());
        // A depth token is invalid under a depthless spec.
        assert!(parse("#spec snaking=N paths=N depth=N start_dir=up\nstart depth end\n")
            .is_err());
    }
}
