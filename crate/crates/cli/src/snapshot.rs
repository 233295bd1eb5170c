//! Binary state snapshots.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic  b"DHRT"
//! u32    version (1)
//! u64    n
//! f64    L, m, b
//! n*n    (re, im) f64 pairs of u, row-major
//! n*n    (re, im) f64 pairs of v, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context};
use dirac_hartree::{Complex64, SpectralGrid, SpinorField};

pub const MAGIC: &[u8; 4] = b"DHRT";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Header {
    pub n: usize,
    pub length: f64,
    pub m: f64,
    pub b: f64,
}

pub fn write<W: Write>(mut w: W, field: &SpinorField, m: f64, b: f64) -> std::io::Result<()> {
    let grid = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    for x in [grid.length(), m, b] {
        w.write_all(&x.to_le_bytes())?;
    }
    for z in field.u().iter().chain(field.v()) {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()
}

pub fn write_file(path: &Path, field: &SpinorField, m: f64, b: f64) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write(BufWriter::new(file), field, m, b).with_context(|| format!("writing {}", path.display()))
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> std::io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    read_array::<8, _>(r).map(f64::from_le_bytes)
}

pub fn read<R: Read>(mut r: R) -> anyhow::Result<(Header, SpinorField)> {
    if &read_array::<4, _>(&mut r)? != MAGIC {
        bail!("not a snapshot file (bad magic)");
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        bail!("unsupported snapshot version {version}");
    }
    let n = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let header = Header { n, length: read_f64(&mut r)?, m: read_f64(&mut r)?, b: read_f64(&mut r)? };
    let grid = SpectralGrid::new(n, header.length)?;
    let mut channel = || -> anyhow::Result<Vec<Complex64>> {
        (0..grid.len())
            .map(|_| Ok(Complex64::new(read_f64(&mut r)?, read_f64(&mut r)?)))
            .collect()
    };
    let u = channel().context("truncated snapshot")?;
    let v = channel().context("truncated snapshot")?;
    if r.read(&mut [0u8; 1])? != 0 {
        bail!("trailing bytes after snapshot payload");
    }
    Ok((header, SpinorField::new(grid, u, v)?))
}

pub fn read_file(path: &Path) -> anyhow::Result<(Header, SpinorField)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read(BufReader::new(file)).with_context(|| format!("reading snapshot {}", path.display()))
}
