//! Core algorithms for learning and generating 2-D platformer levels as
//! token sequences.
//!
//! The pipeline: parse a level grid ([`level`]), annotate it with simulated
//! player paths ([`path`]), flatten it into a token sequence under one of
//! eight encodings ([`codec`]), train a stacked LSTM on those sequences
//! ([`lstm`], [`train`]), sample new levels from the trained model
//! ([`generate`]), and score the results ([`metrics`]).
//!
//! This crate is `no_std` (with `alloc`). All IO, file formats, and the
//! command-line pipeline live in the companion `levelgen-cli` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod codec;
pub mod generate;
pub mod level;
pub mod lstm;
pub mod metrics;
pub mod path;
pub mod train;

pub(crate) mod rngutil;

#[cfg(feature = "fixtures")]
pub mod fixtures;
