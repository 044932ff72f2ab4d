//! On-disk format: `manifest.json` plus a flat little-endian `f64` payload.
//!
//! The manifest lists every block (name, shape, byte offset) and a SHA-256
//! over the structural header and the payload, so any edit to either is
//! detected on import. Floats never pass through JSON, which keeps the round
//! trip bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::la::DenseMatrix;
use crate::rkbm::{BasisMeta, ReducedModel, Variant};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PAYLOAD_FILE: &str = "model.bin";
const FORMAT: &str = "krb-reduced-model";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BlockEntry {
    name: String,
    rows: usize,
    cols: usize,
    offset: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    variant: Variant,
    arity: usize,
    full_dim: usize,
    reduced_dim: usize,
    meta: BasisMeta,
    payload: String,
    payload_bytes: u64,
    blocks: Vec<BlockEntry>,
    sha256: String,
}

fn header_string(variant: Variant, arity: usize, full_dim: usize, reduced_dim: usize, blocks: &[BlockEntry]) -> String {
    let mut s = format!("{FORMAT}/{VERSION}/{variant:?}/{arity}/{full_dim}/{reduced_dim}");
    for b in blocks {
        s.push_str(&format!("/{}:{}x{}@{}", b.name, b.rows, b.cols, b.offset));
    }
    s
}

fn digest(header: &str, payload: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(header.as_bytes());
    h.update(payload);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Named blocks in payload order.
fn blocks_of(model: &ReducedModel) -> Vec<(String, usize, usize, Vec<f64>)> {
    let mut out = Vec::new();
    let mut dense = |name: String, m: &DenseMatrix| out.push((name, m.nrows(), m.ncols(), m.values().to_vec()));
    dense("P".into(), &model.p);
    if let Some(q) = &model.q {
        dense("Q".into(), q);
    }
    for (j, a) in model.reduced_a.iter().enumerate() {
        dense(format!("A{j}"), a);
    }
    let jn = model.arity;
    for (idx, g) in model.ls_gram.iter().enumerate() {
        dense(format!("G{}_{}", idx / jn, idx % jn), g);
    }
    if !model.reduced_f.is_empty() {
        out.push(("f".into(), model.reduced_f.len(), 1, model.reduced_f.clone()));
    }
    for (j, h) in model.ls_rhs.iter().enumerate() {
        out.push((format!("h{j}"), h.len(), 1, h.clone()));
    }
    out.push(("bf_norm_sq".into(), 1, 1, vec![model.bf_norm_sq]));
    out
}

/// Writes `dir/manifest.json` and `dir/model.bin`, creating `dir` if needed.
pub fn export_model(model: &ReducedModel, dir: impl AsRef<Path>) -> Result<()> {
    model.validate()?;
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut payload = Vec::new();
    let mut entries = Vec::new();
    for (name, rows, cols, vals) in blocks_of(model) {
        entries.push(BlockEntry {
            name,
            rows,
            cols,
            offset: payload.len() as u64,
        });
        for v in vals {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    let header = header_string(model.variant, model.arity, model.full_dim(), model.dim(), &entries);
    let manifest = Manifest {
        format: FORMAT.into(),
        version: VERSION,
        variant: model.variant,
        arity: model.arity,
        full_dim: model.full_dim(),
        reduced_dim: model.dim(),
        meta: model.meta.clone(),
        payload: PAYLOAD_FILE.into(),
        payload_bytes: payload.len() as u64,
        sha256: digest(&header, &payload),
        blocks: entries,
    };
    fs::write(dir.join(PAYLOAD_FILE), &payload)?;
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

/// Reads a model written by [`export_model`], validating structure, size and hash.
pub fn import_model(dir: impl AsRef<Path>) -> Result<ReducedModel> {
    let dir = dir.as_ref();
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let man: Manifest = serde_json::from_str(&text).map_err(|e| Error::CorruptManifest(e.to_string()))?;
    if man.format != FORMAT || man.version != VERSION {
        return Err(Error::CorruptManifest(format!("unsupported format {} v{}", man.format, man.version)));
    }
    if man.arity == 0 {
        return Err(Error::CorruptManifest("arity must be positive".into()));
    }
    let find = |name: &str| man.blocks.iter().find(|b| b.name == name);
    let count = |prefix: char| {
        man.blocks
            .iter()
            .filter(|b| b.name.starts_with(prefix) && b.name[1..].chars().next().is_some_and(|c| c.is_ascii_digit()))
            .count()
    };
    let (expected_terms, got_terms) = match man.variant {
        Variant::LeastSquares => (man.arity * man.arity, count('G')),
        _ => (man.arity, count('A')),
    };
    if expected_terms != got_terms {
        return Err(Error::ArityMismatch {
            expected: man.arity,
            got: match man.variant {
                Variant::LeastSquares => (got_terms as f64).sqrt().round() as usize,
                _ => got_terms,
            },
        });
    }

    // layout: contiguous blocks in manifest order
    let mut expected_bytes = 0u64;
    for b in &man.blocks {
        if b.offset != expected_bytes {
            return Err(Error::CorruptManifest(format!("block {} has offset {}, expected {expected_bytes}", b.name, b.offset)));
        }
        expected_bytes += (b.rows * b.cols * 8) as u64;
    }
    if expected_bytes != man.payload_bytes {
        return Err(Error::CorruptManifest("payload_bytes disagrees with the block list".into()));
    }
    let payload = fs::read(dir.join(&man.payload))?;
    if payload.len() as u64 != expected_bytes {
        return Err(Error::PayloadSizeMismatch {
            expected: expected_bytes,
            got: payload.len() as u64,
        });
    }
    let header = header_string(man.variant, man.arity, man.full_dim, man.reduced_dim, &man.blocks);
    let got = digest(&header, &payload);
    if got != man.sha256 {
        return Err(Error::HashMismatch {
            expected: man.sha256.clone(),
            got,
        });
    }

    let read = |b: &BlockEntry| -> Vec<f64> {
        let start = b.offset as usize;
        payload[start..start + b.rows * b.cols * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect()
    };
    let dense = |name: &str| -> Result<Option<DenseMatrix>> {
        match find(name) {
            Some(b) => Ok(Some(DenseMatrix::from_col_major(b.rows, b.cols, read(b))?)),
            None => Ok(None),
        }
    };
    let vector = |name: &str| find(name).map(read);

    let p = dense("P")?.ok_or_else(|| Error::CorruptManifest("missing block P".into()))?;
    let q = dense("Q")?;
    let jn = man.arity;
    let mut reduced_a = Vec::new();
    let mut ls_gram = Vec::new();
    let mut ls_rhs = Vec::new();
    let missing = |name: String| Error::CorruptManifest(format!("missing block {name}"));
    match man.variant {
        Variant::LeastSquares => {
            for j in 0..jn {
                for k in 0..jn {
                    ls_gram.push(dense(&format!("G{j}_{k}"))?.ok_or_else(|| missing(format!("G{j}_{k}")))?);
                }
                ls_rhs.push(vector(&format!("h{j}")).ok_or_else(|| missing(format!("h{j}")))?);
            }
        }
        _ => {
            for j in 0..jn {
                reduced_a.push(dense(&format!("A{j}"))?.ok_or_else(|| missing(format!("A{j}")))?);
            }
        }
    }
    let reduced_f = vector("f").unwrap_or_default();
    let bf_norm_sq = vector("bf_norm_sq").and_then(|v| v.first().copied()).unwrap_or(0.0);
    let model = ReducedModel {
        variant: man.variant,
        arity: jn,
        p,
        q,
        reduced_a,
        reduced_f,
        ls_gram,
        ls_rhs,
        bf_norm_sq,
        meta: man.meta,
    };
    if model.full_dim() != man.full_dim || model.dim() != man.reduced_dim {
        return Err(Error::CorruptManifest("block shapes disagree with the declared dimensions".into()));
    }
    model.validate()?;
    Ok(model)
}
