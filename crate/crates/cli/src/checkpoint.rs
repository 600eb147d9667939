//! Versioned binary checkpoints plus a JSON sidecar with training
//! metadata.
//!
//! Layout (all little-endian): an 8-byte magic, format version, vocabulary
//! size, layer count, each layer's hidden size, the dropout rate, the init
//! seed, then every parameter tensor as raw `f64`s in the model's
//! canonical tensor order. The sidecar lives at `<path>.json` and carries
//! the encoding spec, the best epoch and evaluation NLL, and provenance.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use levelgen_core::codec::EncodingSpec;
use levelgen_core::lstm::{LstmModel, ModelConfig};
use serde::{Deserialize, Serialize};

const MAGIC: &[u8; 8] = b"LVLGNCK1";
const VERSION: u32 = 1;

/// Training metadata saved next to the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub spec: EncodingSpec,
    pub vocab: usize,
    pub layers: usize,
    pub hidden: usize,
    pub dropout: f64,
    pub seed: u64,
    pub epoch: usize,
    pub eval_nll: f64,
    pub tool_version: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

fn take<'a>(buf: &'a [u8], cursor: &mut usize, n: usize) -> Result<&'a [u8]> {
    if *cursor + n > buf.len() {
        bail!("checkpoint truncated at byte {cursor}");
    }
    let s = &buf[*cursor..*cursor + n];
    *cursor += n;
    Ok(s)
}

fn read_u32(buf: &[u8], cursor: &mut usize) -> Result<u32> {
    Ok(u32::from_le_bytes(take(buf, cursor, 4)?.try_into().unwrap()))
}

fn read_f64(buf: &[u8], cursor: &mut usize) -> Result<f64> {
    Ok(f64::from_le_bytes(take(buf, cursor, 8)?.try_into().unwrap()))
}

pub fn save(path: &Path, model: &LstmModel, meta: &CheckpointMeta) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(model.vocab as u32).to_le_bytes());
    buf.extend_from_slice(&(model.layers.len() as u32).to_le_bytes());
    for l in &model.layers {
        buf.extend_from_slice(&(l.hidden_size as u32).to_le_bytes());
    }
    buf.extend_from_slice(&model.dropout.to_le_bytes());
    buf.extend_from_slice(&model.init_seed.to_le_bytes());
    for tensor in model.tensors() {
        for &v in tensor {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = fs::File::create(path)
        .with_context(|| format!("creating checkpoint {}", path.display()))?;
    file.write_all(&buf)?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(meta)? + "\n")
        .with_context(|| format!("writing sidecar for {}", path.display()))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(LstmModel, CheckpointMeta)> {
    let meta: CheckpointMeta = serde_json::from_str(
        &fs::read_to_string(sidecar_path(path))
            .with_context(|| format!("reading sidecar for {}", path.display()))?,
    )
    .context("parsing checkpoint sidecar")?;

    let mut file =
        fs::File::open(path).with_context(|| format!("opening checkpoint {}", path.display()))?;
    let mut buf = Vec::new();
    file.read_to_end(&mut buf)?;
    let mut cursor = 0usize;
    if take(&buf, &mut cursor, 8)? != MAGIC {
        bail!("not a levelgen checkpoint: bad magic");
    }
    let version = read_u32(&buf, &mut cursor)?;
    if version != VERSION {
        bail!("unsupported checkpoint version {version}");
    }
    let vocab = read_u32(&buf, &mut cursor)? as usize;
    let n_layers = read_u32(&buf, &mut cursor)? as usize;
    let mut hidden_sizes = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        hidden_sizes.push(read_u32(&buf, &mut cursor)? as usize);
    }
    let dropout = read_f64(&buf, &mut cursor)?;
    let init_seed = u64::from_le_bytes(take(&buf, &mut cursor, 8)?.try_into().unwrap());

    if hidden_sizes.is_empty() || hidden_sizes.iter().any(|&h| h != hidden_sizes[0]) {
        bail!("unsupported layer layout {hidden_sizes:?}");
    }
    let mut model = ModelConfig {
        vocab,
        hidden: hidden_sizes[0],
        layers: n_layers,
        dropout,
    }
    .build(init_seed);
    model.init_seed = init_seed;
    for tensor in model.tensors_mut() {
        for v in tensor.iter_mut() {
            *v = read_f64(&buf, &mut cursor)?;
        }
    }
    if cursor != buf.len() {
        bail!("checkpoint has {} trailing bytes", buf.len() - cursor);
    }
    if meta.vocab != vocab || meta.layers != n_layers || meta.hidden != hidden_sizes[0] {
        bail!("sidecar metadata disagrees with checkpoint header");
    }
    Ok((model, meta))
}
