//! Flat little-endian vector dumps: 4-byte magic, u32 N, u32 k, then k·N f64.

use std::io::{Read, Write};
use std::path::Path;

use crate::SpectrumError;

pub const EIGENVECTOR_MAGIC: &[u8; 4] = b"WKEV";

pub fn write_vectors(path: &Path, magic: &[u8; 4], n: usize, vectors: &[Vec<f64>]) -> Result<(), SpectrumError> {
    let mut out = Vec::with_capacity(12 + 8 * n * vectors.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(vectors.len() as u32).to_le_bytes());
    for v in vectors {
        if v.len() != n {
            return Err(SpectrumError::Dump(format!("vector of length {} in a dump of length {n}", v.len())));
        }
        for x in v {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    std::fs::File::create(path)?.write_all(&out)?;
    Ok(())
}

pub fn read_vectors(path: &Path, magic: &[u8; 4]) -> Result<Vec<Vec<f64>>, SpectrumError> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 12 || &buf[..4] != magic {
        return Err(SpectrumError::Dump(format!("missing {} header", String::from_utf8_lossy(magic))));
    }
    let n = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
    let k = u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize;
    if buf.len() != 12 + 8 * n * k {
        return Err(SpectrumError::Dump(format!("expected {} bytes, found {}", 12 + 8 * n * k, buf.len())));
    }
    Ok((0..k)
        .map(|j| (0..n).map(|i| f64::from_le_bytes(buf[12 + 8 * (j * n + i)..20 + 8 * (j * n + i)].try_into().unwrap())).collect())
        .collect())
}

pub fn write_eigenvectors(path: &Path, n: usize, vectors: &[Vec<f64>]) -> Result<(), SpectrumError> {
    write_vectors(path, EIGENVECTOR_MAGIC, n, vectors)
}

pub fn read_eigenvectors(path: &Path) -> Result<Vec<Vec<f64>>, SpectrumError> {
    read_vectors(path, EIGENVECTOR_MAGIC)
}
