//! Binary grid dumps: header `L` (f64) and `m` (u64), then the field
//! row-major as `(re, im)` pairs of f64, all little-endian.

use std::io::{self, Read, Write};

use num_complex::Complex64;

use crate::numerics::{CartesianGrid, Field2D};

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

/// Writes `f`; the header has no room for a center, so the grid must be
/// centered at the origin.
pub fn write_dump<W: Write>(f: &Field2D, mut w: W) -> io::Result<()> {
    let c = f.grid.center();
    if c != [0.0, 0.0] {
        return Err(invalid(format!("dump needs a grid centered at the origin, got {c:?}")));
    }
    w.write_all(&f.grid.half_width().to_le_bytes())?;
    w.write_all(&(f.m() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * f.values.len());
    for v in &f.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_dump<R: Read>(mut r: R) -> io::Result<Field2D> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let half_width = f64::from_le_bytes(word);
    r.read_exact(&mut word)?;
    let m = u64::from_le_bytes(word);
    let m = usize::try_from(m).map_err(|_| invalid(format!("grid size {m} too large")))?;
    let grid = CartesianGrid::new(half_width, m).map_err(|e| invalid(e.to_string()))?;
    let mut buf = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut buf)?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(invalid("trailing bytes after payload".into()));
    }
    let values = buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Field2D::from_values(grid, values).map_err(|e| invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_bit_for_bit() {
        let grid = CartesianGrid::new(3.5, 8).unwrap();
        let f = Field2D::from_fn(grid, |y| Complex64::new(y[0].sin() / 3.0, -y[1] * 1e-300));
        let mut buf = Vec::new();
        write_dump(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 16 * 64);
        assert_eq!(&buf[..8], &3.5f64.to_le_bytes());
        assert_eq!(&buf[8..16], &8u64.to_le_bytes());
        // Row-major: the second record is node (0, 1).
        let v = f.get(0, 1);
        assert_eq!(&buf[32..40], &v.re.to_le_bytes());
        let g = read_dump(buf.as_slice()).unwrap();
        assert_eq!(g.values, f.values);
        assert_eq!(g.grid, f.grid);
    }

    #[test]
    fn rejects_shifted_grids_and_bad_payloads() {
        let grid = CartesianGrid::with_center(1.0, 4, [0.5, 0.0]).unwrap();
        assert!(write_dump(&Field2D::zeros(grid), Vec::new()).is_err());
        let mut buf = Vec::new();
        write_dump(&Field2D::zeros(CartesianGrid::new(1.0, 4).unwrap()), &mut buf).unwrap();
        assert!(read_dump(&buf[..buf.len() - 1]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(read_dump(long.as_slice()).is_err());
        let mut bad = buf.clone();
        bad[8..16].copy_from_slice(&6u64.to_le_bytes());
        assert!(read_dump(bad.as_slice()).is_err());
    }
}
