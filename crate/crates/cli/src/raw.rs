//! Headerless little-endian f32 files.

use std::path::Path;

use anyhow::{bail, Context, Result};

pub fn read_raw(path: &Path) -> Result<Vec<f32>> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    decode_raw(&bytes).with_context(|| format!("in {}", path.display()))
}

pub fn decode_raw(bytes: &[u8]) -> Result<Vec<f32>> {
    if bytes.len() % 4 != 0 {
        bail!("malformed raw array: {} bytes is not a multiple of 4", bytes.len());
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

pub fn encode_raw(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn write_raw(path: &Path, values: &[f32]) -> Result<()> {
    std::fs::write(path, encode_raw(values)).with_context(|| format!("writing {}", path.display()))
}
