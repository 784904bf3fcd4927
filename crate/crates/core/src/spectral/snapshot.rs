//! Flat binary container for field snapshots.
//!
//! Layout (little-endian):
//!
//! | offset | size | content                       |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `NSCF`                  |
//! | 4      | 4    | version (u32, currently 1)    |
//! | 8      | 4    | d (u32)                       |
//! | 12     | 4    | n per axis (u32)              |
//! | 16     | 8    | box length L (f64)            |
//! | 24     | 4    | component count (u32)         |
//! | 28     | 4    | reserved, zero                |
//! | 32     | 8    | time (f64)                    |
//! | 40     | ...  | coefficients, component-major |
//!
//! Each coefficient is a complex64: two f32 values (re, im) in FFT order.

use super::{Grid, SpectralField};
use num_complex::Complex64;
use std::io::{self, Read, Write};

pub const MAGIC: &[u8; 4] = b"NSCF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 40;

/// Decoded snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub time: f64,
    pub components: Vec<SpectralField>,
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn write_snapshot<W: Write>(w: &mut W, time: f64, components: &[&SpectralField]) -> io::Result<()> {
    let Some(first) = components.first() else {
        return Err(bad("snapshot needs at least one component"));
    };
    let g = first.grid;
    if components.iter().any(|c| c.grid != g) {
        return Err(bad("components live on different grids"));
    }
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * g.len() * components.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.d as u32).to_le_bytes());
    buf.extend_from_slice(&(g.n as u32).to_le_bytes());
    buf.extend_from_slice(&g.l.to_le_bytes());
    buf.extend_from_slice(&(components.len() as u32).to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&time.to_le_bytes());
    for c in components {
        for z in &c.coeffs {
            buf.extend_from_slice(&(z.re as f32).to_le_bytes());
            buf.extend_from_slice(&(z.im as f32).to_le_bytes());
        }
    }
    w.write_all(&buf)
}

pub fn read_snapshot<R: Read>(r: &mut R) -> io::Result<Snapshot> {
    let mut head = [0u8; HEADER_LEN];
    r.read_exact(&mut head)?;
    if &head[0..4] != MAGIC {
        return Err(bad("not an NSCF snapshot"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(head[o..o + 8].try_into().expect("8 bytes"));
    if u32_at(4) != VERSION {
        return Err(bad(format!("unsupported snapshot version {}", u32_at(4))));
    }
    let grid = Grid::new(u32_at(8) as usize, u32_at(12) as usize, f64_at(16)).map_err(|e| bad(e.to_string()))?;
    let ncomp = u32_at(24) as usize;
    let time = f64_at(32);
    let mut body = vec![0u8; 8 * grid.len() * ncomp];
    r.read_exact(&mut body)?;
    let f32_at = |o: usize| f32::from_le_bytes(body[o..o + 4].try_into().expect("4 bytes")) as f64;
    let components = (0..ncomp)
        .map(|c| {
            let coeffs = (0..grid.len())
                .map(|i| {
                    let o = 8 * (c * grid.len() + i);
                    Complex64::new(f32_at(o), f32_at(o + 4))
                })
                .collect();
            SpectralField { grid, coeffs }
        })
        .collect();
    Ok(Snapshot { grid, time, components })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_f32_exact() {
        let g = Grid::new(2, 8, 3.5).unwrap();
        let a = SpectralField::real_mode(g, &[1, -2], Complex64::new(0.5, -0.25));
        let b = SpectralField::constant(g, 2.0);
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, 1.25, &[&a, &b]).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 2 * 8 * g.len());
        let s = read_snapshot(&mut bytes.as_slice()).unwrap();
        assert_eq!(s.grid, g);
        assert_eq!(s.time, 1.25);
        assert_eq!(s.components, vec![a, b]);
    }

    #[test]
    fn rejects_bad_magic() {
        let mut bytes = vec![0u8; HEADER_LEN];
        bytes[0..4].copy_from_slice(b"XXXX");
        assert!(read_snapshot(&mut bytes.as_slice()).is_err());
    }
}
