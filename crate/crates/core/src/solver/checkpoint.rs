//! Binary state checkpoints.
//!
//! Layout (all little-endian):
//! ```text
//! magic    8 bytes  "NDG2CKPT"
//! version  u32      currently 1
//! n        u32      grid size
//! l        f64      box side length
//! time     f64      simulation clock
//! u1       n*n complex coefficients, row-major, (re: f64, im: f64) each
//! u2       same
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{C64, Grid, SpectralField, VelocityState};

const MAGIC: &[u8; 8] = b"NDG2CKPT";
const VERSION: u32 = 1;

pub fn write_checkpoint(path: &Path, state: &VelocityState, time: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(state.grid().n() as u32).to_le_bytes())?;
    w.write_all(&state.grid().l().to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    for field in [&state.u1, &state.u2] {
        for c in field.coeffs().iter() {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<(VelocityState, f64)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Checkpoint("file too short for header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic bytes".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let n = read_u32(&mut r)? as usize;
    let l = read_f64(&mut r)?;
    let grid = Grid::new(n, l).map_err(|e| Error::Checkpoint(format!("invalid grid: {e}")))?;
    let time = read_f64(&mut r)?;
    if !time.is_finite() {
        return Err(Error::Checkpoint(format!("non-finite time {time}")));
    }
    let mut load_field = || -> Result<SpectralField> {
        let mut f = SpectralField::zeros(grid);
        for c in f.coeffs_mut().iter_mut() {
            *c = C64::new(read_f64(&mut r)?, read_f64(&mut r)?);
        }
        Ok(f)
    };
    let u1 = load_field()?;
    let u2 = load_field()?;
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after payload".into()));
    }
    let state = VelocityState::new(u1, u2).map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok((state, time))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::Checkpoint("truncated file".into()))?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|_| Error::Checkpoint("truncated file".into()))?;
    Ok(f64::from_le_bytes(b))
}
