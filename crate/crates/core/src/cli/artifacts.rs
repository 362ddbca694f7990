//! Binary field dumps and small file helpers.
//!
//! Dump layout, all little-endian: `N` as u64, the grid shape as `N` u64,
//! `L` and `eps` as f64, then `u` and `v` row-major as f64.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};

pub fn write_field_dump(path: &Path, u: &GridField, v: &GridField, eps: f64) -> Result<()> {
    let grid = u.grid();
    let mut buf = Vec::with_capacity(8 * (3 + grid.dim() + 2 * grid.len()));
    buf.extend_from_slice(&(grid.dim() as u64).to_le_bytes());
    for &n in grid.shape() {
        buf.extend_from_slice(&(n as u64).to_le_bytes());
    }
    buf.extend_from_slice(&grid.period().to_le_bytes());
    buf.extend_from_slice(&eps.to_le_bytes());
    for x in u.values().iter().chain(v.values()) {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub struct FieldDump {
    pub u: GridField,
    pub v: GridField,
    pub eps: f64,
}

pub fn read_field_dump(path: &Path) -> Result<FieldDump> {
    let bytes = fs::read(path)?;
    let bad = || Error::InvalidInput(format!("{}: malformed field dump", path.display()));
    let mut pos = 0;
    let mut word = || -> Result<[u8; 8]> {
        let w: [u8; 8] = bytes.get(pos..pos + 8).ok_or_else(bad)?.try_into().map_err(|_| bad())?;
        pos += 8;
        Ok(w)
    };
    let dim = u64::from_le_bytes(word()?) as usize;
    if dim == 0 || dim > 16 {
        return Err(bad());
    }
    let shape = (0..dim).map(|_| word().map(|w| u64::from_le_bytes(w) as usize)).collect::<Result<Vec<_>>>()?;
    let period = f64::from_le_bytes(word()?);
    let eps = f64::from_le_bytes(word()?);
    let grid = Grid::new(shape, period)?;
    let n = grid.len();
    let mut read = |count: usize| (0..count).map(|_| word().map(f64::from_le_bytes)).collect::<Result<Vec<_>>>();
    let u = read(n)?;
    let v = read(n)?;
    if pos != bytes.len() {
        return Err(bad());
    }
    Ok(FieldDump { u: GridField::from_values(grid.clone(), u), v: GridField::from_values(grid, v), eps })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(vec![8, 10], 2.5).unwrap();
        let u = grid.sample(|x| x[0] - 0.3 * x[1]);
        let v = grid.sample(|x| (x[0] * x[1]).sin());
        let path = dir.path().join("f.bin");
        write_field_dump(&path, &u, &v, 0.125).unwrap();
        let d = read_field_dump(&path).unwrap();
        assert_eq!(d.eps, 0.125);
        assert_eq!(d.u, u);
        assert_eq!(d.v, v);
        assert_eq!(fs::metadata(&path).unwrap().len(), 8 * (1 + 2 + 2 + 2 * 80));
    }
}
