//! Raw accumulator dump.
//!
//! Layout, all little-endian: magic `RVAG`, `u32` version, origin as three
//! `f64`, resolution as `f64`, dims as three `u64`, then one `u32` count per
//! voxel with x varying fastest.

use std::io::Write;

use super::IoError;
use crate::accumulator::{AccumulatorGrid, GridGeometry};
use crate::geometry::Point3;

pub const BLOB_MAGIC: [u8; 4] = *b"RVAG";
pub const BLOB_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 * 4 + 8 * 3;

pub fn write_grid_blob(w: &mut impl Write, grid: &AccumulatorGrid) -> Result<(), IoError> {
    let g = grid.geometry();
    w.write_all(&BLOB_MAGIC)?;
    w.write_all(&BLOB_VERSION.to_le_bytes())?;
    for v in [g.origin.x, g.origin.y, g.origin.z, g.resolution] {
        w.write_all(&v.to_le_bytes())?;
    }
    for d in g.dims {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(grid.counts().len() * 4);
    for c in grid.counts() {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_grid_blob(bytes: &[u8]) -> Result<AccumulatorGrid, IoError> {
    if bytes.len() < HEADER_LEN {
        return Err(IoError::Blob(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[..4] != BLOB_MAGIC {
        return Err(IoError::Blob("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap_or_default());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap_or_default());
    let f64_at = |o: usize| f64::from_bits(u64_at(o));
    let version = u32_at(4);
    if version != BLOB_VERSION {
        return Err(IoError::Blob(format!("unsupported version {version}")));
    }
    let origin = Point3::new(f64_at(8), f64_at(16), f64_at(24));
    let resolution = f64_at(32);
    let mut dims = [0usize; 3];
    for (k, d) in dims.iter_mut().enumerate() {
        *d = usize::try_from(u64_at(40 + 8 * k)).map_err(|_| IoError::Blob("dimension overflows".into()))?;
    }
    let voxels = dims
        .iter()
        .try_fold(1usize, |a, d| a.checked_mul(*d))
        .ok_or_else(|| IoError::Blob("dimension overflows".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if voxels.checked_mul(4) != Some(payload.len()) {
        return Err(IoError::Blob(format!(
            "payload of {} bytes does not hold {voxels} counts",
            payload.len()
        )));
    }
    let geometry = GridGeometry::new(origin, resolution, dims)?;
    let counts = payload
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(AccumulatorGrid::from_counts(geometry, counts)?)
}
