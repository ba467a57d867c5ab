//! `SQGF` field snapshots.
//!
//! Layout, all little-endian: magic `SQGF`, `u32` version (1), `u32` n,
//! `f64` box length L, `f64` time t, then `n·n` `f64` real-space samples in
//! row-major order (`values[i₂·n + i₁]`).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use sqg_core::{Field, Grid};

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"SQGF";
pub const VERSION: u32 = 1;
const HEADER: usize = 4 + 4 + 4 + 8 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: Field,
}

pub fn encode(field: &Field, time: f64) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER + 8 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Snapshot, String> {
    if bytes.len() < HEADER {
        return Err(format!("truncated header ({} bytes)", bytes.len()));
    }
    if &bytes[..4] != MAGIC {
        return Err("bad magic, expected SQGF".into());
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let n = u32_at(8) as usize;
    let length = f64_at(12);
    let time = f64_at(20);
    let expected = HEADER + 8 * n * n;
    if bytes.len() != expected {
        return Err(format!("expected {expected} bytes for n = {n}, found {}", bytes.len()));
    }
    let grid = Grid::new(n, length).map_err(|e| e.to_string())?;
    let values = (0..n * n).map(|i| f64_at(HEADER + 8 * i)).collect();
    let field = Field::from_values(&grid, values).map_err(|e| e.to_string())?;
    Ok(Snapshot { time, field })
}

pub fn write(path: &Path, field: &Field, time: f64) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(&encode(field, time)).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|message| CliError::Format { path: path.into(), message })
}
