//! Binary checkpoint format, version 1. All integers and floats are little-endian.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "SNSK"
//!      4     4  format version (u32) = 1
//!      8     1  geometry kind (u8): 0 sphere, 1 torus
//!      9     4  truncation degree L (u32)
//!     13     8  R: sphere radius or torus major radius (f64)
//!     21     8  r: torus minor radius, 0 for the sphere (f64)
//!     29     8  time (f64)
//!     37     8  number of (l, m) pairs n = L(L+3)/2 (u64)
//!     45  16 n  coefficient pairs (cos, sin) as f64, ordered l = 1..=L, m = 0..=l;
//!               the sin member of m = 0 is stored as 0
//!      .     8  step count (u64)
//!      .     8  dt (f64)
//!      .     8  accumulated dissipation integral (f64)
//!      .     8  accumulated work integral (f64)
//!      .     8  initial energy (f64)
//!      .     1  history flag (u8)
//!      .  24 N  if the flag is 1: previous remainder, convective and forcing
//!               terms, N = L² + 2L values each, in storage order
//!      .     4  CRC32 (IEEE) of every preceding byte
//! ```

use std::fs;
use std::path::Path;

use surfns_core::harmonics::{coeff_index, n_coeffs, SpectralState};
use surfns_core::timestepper::{History, SimState};
use surfns_core::SurfaceKind;
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"SNSK";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {found}, expected {VERSION}")]
    Version { found: u32 },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub geometry: SurfaceKind,
    pub sim: SimState,
}

fn pair_count(degree: usize) -> usize {
    degree * (degree + 3) / 2
}

pub fn encode(ck: &Checkpoint) -> Vec<u8> {
    let s = &ck.sim.state;
    let degree = s.degree();
    let mut b = Vec::with_capacity(64 + 16 * pair_count(degree));
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&VERSION.to_le_bytes());
    let (kind, big, small) = match ck.geometry {
        SurfaceKind::Sphere { radius } => (0u8, radius, 0.0),
        SurfaceKind::Torus { major, minor } => (1u8, major, minor),
    };
    b.push(kind);
    b.extend_from_slice(&(degree as u32).to_le_bytes());
    for x in [big, small, s.time] {
        b.extend_from_slice(&x.to_le_bytes());
    }
    b.extend_from_slice(&(pair_count(degree) as u64).to_le_bytes());
    for l in 1..=degree {
        for m in 0..=l as i64 {
            let c = s.coeffs[coeff_index(l, m)];
            let sn = if m == 0 { 0.0 } else { s.coeffs[coeff_index(l, -m)] };
            b.extend_from_slice(&c.to_le_bytes());
            b.extend_from_slice(&sn.to_le_bytes());
        }
    }
    let sim = &ck.sim;
    b.extend_from_slice(&sim.step.to_le_bytes());
    for x in [sim.dt, sim.dissipation_integral, sim.work_integral, sim.initial_energy] {
        b.extend_from_slice(&x.to_le_bytes());
    }
    match &sim.history {
        Some(h) => {
            b.push(1);
            for v in [&h.remainder, &h.convective, &h.forcing] {
                for x in v {
                    b.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        None => b.push(0),
    }
    let crc = crc32fast::hash(&b);
    b.extend_from_slice(&crc.to_le_bytes());
    b
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn bytes(&mut self, n: usize) -> Result<&[u8], CheckpointError> {
        if self.pos + n > self.buf.len() {
            return Err(CheckpointError::Corrupt(format!(
                "truncated at byte {} (need {n} more)",
                self.pos
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.bytes(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>, CheckpointError> {
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn decode(buf: &[u8]) -> Result<Checkpoint, CheckpointError> {
    if buf.len() < 8 {
        return Err(CheckpointError::Corrupt(format!("truncated: only {} bytes", buf.len())));
    }
    if &buf[..4] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u32::from_le_bytes(buf[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(CheckpointError::Version { found: version });
    }
    if buf.len() < 12 {
        return Err(CheckpointError::Corrupt("truncated before the checksum".into()));
    }
    let (body, tail) = buf.split_at(buf.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    if crc32fast::hash(body) != stored {
        return Err(CheckpointError::Corrupt("CRC32 mismatch".into()));
    }

    let mut r = Reader { buf: body, pos: 8 };
    let kind = r.u8()?;
    let degree = r.u32()? as usize;
    let (big, small, time) = (r.f64()?, r.f64()?, r.f64()?);
    let geometry = match kind {
        0 => SurfaceKind::Sphere { radius: big },
        1 => SurfaceKind::Torus { major: big, minor: small },
        k => return Err(CheckpointError::Corrupt(format!("unknown geometry kind {k}"))),
    };
    if degree < 1 {
        return Err(CheckpointError::Corrupt("degree must be at least 1".into()));
    }
    let pairs = r.u64()? as usize;
    if pairs != pair_count(degree) {
        return Err(CheckpointError::Corrupt(format!(
            "pair count {pairs} does not match degree {degree}"
        )));
    }
    let mut state = SpectralState::zeros(degree);
    for l in 1..=degree {
        for m in 0..=l as i64 {
            let (c, s) = (r.f64()?, r.f64()?);
            state.coeffs[coeff_index(l, m)] = c;
            if m > 0 {
                state.coeffs[coeff_index(l, -m)] = s;
            }
        }
    }
    state.time = time;
    let step = r.u64()?;
    let (dt, dissipation_integral, work_integral, initial_energy) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
    let n = n_coeffs(degree);
    let history = match r.u8()? {
        0 => None,
        1 => Some(History {
            remainder: r.f64_vec(n)?,
            convective: r.f64_vec(n)?,
            forcing: r.f64_vec(n)?,
        }),
        f => return Err(CheckpointError::Corrupt(format!("bad history flag {f}"))),
    };
    if r.pos != body.len() {
        return Err(CheckpointError::Corrupt(format!(
            "{} trailing bytes before the checksum",
            body.len() - r.pos
        )));
    }
    Ok(Checkpoint {
        geometry,
        sim: SimState {
            state,
            step,
            dt,
            dissipation_integral,
            work_integral,
            initial_energy,
            history,
        },
    })
}

pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<(), CheckpointError> {
    fs::write(path, encode(ck))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    decode(&fs::read(path)?)
}
