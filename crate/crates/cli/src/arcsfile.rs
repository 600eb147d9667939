//! The plain-text arc table format: one `dx dy` pair per line, `#`
//! comments and blank lines ignored.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use levelgen_core::path::MovementModel;

pub fn parse_arcs(text: &str) -> Result<MovementModel> {
    let mut arcs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(dx), Some(dy), None) = (parts.next(), parts.next(), parts.next()) else {
            bail!("arcs line {}: expected `dx dy`, got `{raw}`", i + 1);
        };
        let dx: i32 = dx.parse().with_context(|| format!("arcs line {}: bad dx", i + 1))?;
        let dy: i32 = dy.parse().with_context(|| format!("arcs line {}: bad dy", i + 1))?;
        arcs.push((dx, dy));
    }
    MovementModel::from_arcs(arcs).context("building movement model from arc table")
}

/// Renders a model's arc table in the same format `parse_arcs` reads.
pub fn dump_arcs(model: &MovementModel) -> String {
    let mut out = String::from(
        "# Jump arc table: one `dx dy` landing offset per line (dy < 0 is up).\n",
    );
    for &(dx, dy) in &model.jump_arcs {
        out.push_str(&format!("{dx} {dy}\n"));
    }
    out
}

/// The movement model to use: the default, or one loaded from a file.
pub fn load_movement(path: Option<&Path>) -> Result<MovementModel> {
    match path {
        None => Ok(MovementModel::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading arc table {}", p.display()))?;
            parse_arcs(&text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_then_parse_round_trips() {
        let model = MovementModel::default();
        let parsed = parse_arcs(&dump_arcs(&model)).unwrap();
        assert_eq!(parsed.jump_arcs, model.jump_arcs);
        assert_eq!(parsed.max_jump_height, model.max_jump_height);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_arcs("1 2 3").is_err());
        assert!(parse_arcs("one two").is_err());
        assert!(parse_arcs("").is_err()); // empty table
        assert!(parse_arcs("# only comments\n").is_err());
    }

    #[test]
    fn custom_table_infers_rise() {
        let model = parse_arcs("# tiny\n1 0\n-1 0\n1 -2\n").unwrap();
        assert_eq!(model.max_jump_height, 2);
        assert_eq!(model.jump_arcs.len(), 3);
    }
}
