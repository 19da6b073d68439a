//! Binary snapshot format.
//!
//! ```text
//! "SQGF1" | u32 N | u64 N² | f64 t | N² × (f64 re, f64 im)
//! ```
//!
//! All numbers little-endian. Coefficients run over `n₁ = −N/2 … N/2−1`
//! (outer) and `n₂ = −N/2 … N/2−1` (inner).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

pub const MAGIC: &[u8; 5] = b"SQGF1";

fn ordered_indices(grid: Grid) -> impl Iterator<Item = usize> {
    let h = grid.n() as i64 / 2;
    (-h..h).flat_map(move |k1| (-h..h).map(move |k2| grid.index(k1, k2)))
}

pub fn write<W: Write>(mut w: W, field: &SpectralField, t: f64) -> Result<()> {
    let grid = field.grid();
    let mut buf = Vec::with_capacity(25 + 16 * grid.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    for idx in ordered_indices(grid) {
        let c = field.coeffs()[idx];
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn take<'a>(bytes: &mut &'a [u8], len: usize) -> Result<&'a [u8]> {
    if bytes.len() < len {
        return Err(Error::Checkpoint("truncated file".into()));
    }
    let (head, tail) = bytes.split_at(len);
    *bytes = tail;
    Ok(head)
}

fn f64_at(bytes: &mut &[u8]) -> Result<f64> {
    Ok(f64::from_le_bytes(take(bytes, 8)?.try_into().expect("8 bytes")))
}

/// Returns the field and its time stamp.
pub fn read<R: Read>(mut r: R) -> Result<(SpectralField, f64)> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut bytes = data.as_slice();
    if take(&mut bytes, 5)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let n = u32::from_le_bytes(take(&mut bytes, 4)?.try_into().expect("4 bytes")) as usize;
    let grid = Grid::new(n).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let count = u64::from_le_bytes(take(&mut bytes, 8)?.try_into().expect("8 bytes"));
    if count != grid.len() as u64 {
        return Err(Error::Checkpoint(format!("mode count {count} does not match N = {n}")));
    }
    let t = f64_at(&mut bytes)?;
    let mut coeffs = vec![Complex64::default(); grid.len()];
    for idx in ordered_indices(grid) {
        let re = f64_at(&mut bytes)?;
        let im = f64_at(&mut bytes)?;
        coeffs[idx] = Complex64::new(re, im);
    }
    if !bytes.is_empty() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len())));
    }
    let field = SpectralField::from_coeffs(grid, coeffs).map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok((field, t))
}

pub fn save(path: &Path, field: &SpectralField, t: f64) -> Result<()> {
    let mut buf = Vec::new();
    write(&mut buf, field, t)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(SpectralField, f64)> {
    read(fs::File::open(path)?)
}
