//! IO, file formats, and the command pipeline around `levelgen-core`.
//!
//! Everything stateful lives here: level and corpus files, arc tables,
//! sequence files, model checkpoints, metrics CSVs, SVG corner plots, and
//! the replayable manifests every command writes next to its outputs.

pub mod arcsfile;
pub mod checkpoint;
pub mod commands;
pub mod corpus;
pub mod manifest;
pub mod metricsio;
pub mod seqfile;
pub mod svgplot;

/// Tool version stamped into manifests and checkpoints.
pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}
