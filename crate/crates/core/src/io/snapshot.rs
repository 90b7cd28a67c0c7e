//! Binary field snapshots.
//!
//! Layout (little-endian): magic `BSTR`, `u32` version, `u64 nx`, `u64 ny`,
//! `f64 time`, `f64 alpha`, `f64 nu`, then `nx·ny` `f64` values with the
//! `x₁` index outermost.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

pub const MAGIC: &[u8; 4] = b"BSTR";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8 + 8 + 8;

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotFile {
    pub time: f64,
    pub alpha: f64,
    pub nu: f64,
    pub values: Array2<f64>,
}

impl SnapshotFile {
    pub fn from_field(f: &Field, time: f64, alpha: f64, nu: f64) -> Self {
        Self {
            time,
            alpha,
            nu,
            values: f.values().clone(),
        }
    }

    pub fn nx(&self) -> usize {
        self.values.nrows()
    }

    pub fn ny(&self) -> usize {
        self.values.ncols()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.nx() as u64).to_le_bytes());
        out.extend_from_slice(&(self.ny() as u64).to_le_bytes());
        for v in [self.time, self.alpha, self.nu] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        // logical (row-major) order regardless of memory layout
        for v in self.values.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("snapshot too short: {} bytes", bytes.len())));
        }
        if &bytes[0..4] != MAGIC {
            return Err(Error::Format("bad snapshot magic (expected BSTR)".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let version = u32_at(4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {version}")));
        }
        let nx = usize::try_from(u64_at(8)).map_err(|_| Error::Format("nx overflows".into()))?;
        let ny = usize::try_from(u64_at(16)).map_err(|_| Error::Format("ny overflows".into()))?;
        let (time, alpha, nu) = (f64_at(24), f64_at(32), f64_at(40));
        let expected = nx
            .checked_mul(ny)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::Format("snapshot dimensions overflow".into()))?;
        let payload = &bytes[HEADER_LEN..];
        if payload.len() != expected {
            return Err(Error::Format(format!(
                "snapshot payload is {} bytes, expected {expected} for {nx}x{ny}",
                payload.len()
            )));
        }
        let data: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let values = Array2::from_shape_vec((nx, ny), data).map_err(|e| Error::Format(e.to_string()))?;
        Ok(Self { time, alpha, nu, values })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Field on `grid`; the dimensions must agree.
    pub fn into_field(self, grid: &Arc<Grid>) -> Result<Field> {
        if self.values.dim() != (grid.nx(), grid.ny()) {
            return Err(Error::Format(format!(
                "snapshot is {}x{}, grid is {}x{}",
                self.nx(),
                self.ny(),
                grid.nx(),
                grid.ny()
            )));
        }
        Field::from_values(grid, self.values)
    }
}
