//! Binary checkpoint: a 64-byte header followed by `ρ, m1, m2, m3` as
//! little-endian `f64`, `x1` slowest.

use super::grid::FlowState;
use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"CWSTAB01";
pub const VERSION: u64 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub dims: [u64; 3],
    pub state: FlowState,
    pub shift: f64,
}

impl Checkpoint {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let n = (self.dims[0] * self.dims[1] * self.dims[2]) as usize;
        if self.state.rho.len() != n || self.state.mom.iter().any(|m| m.len() != n) {
            return Err(Error::Usage("checkpoint fields do not match the grid dims".into()));
        }
        let mut header = Vec::with_capacity(HEADER_LEN);
        header.extend_from_slice(MAGIC);
        header.extend_from_slice(&VERSION.to_le_bytes());
        for d in self.dims {
            header.extend_from_slice(&d.to_le_bytes());
        }
        header.extend_from_slice(&self.state.time.to_le_bytes());
        header.extend_from_slice(&self.shift.to_le_bytes());
        header.resize(HEADER_LEN, 0);
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(8 * n);
        for f in std::iter::once(&self.state.rho).chain(self.state.mom.iter()) {
            buf.clear();
            for x in f {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)?;
        if &header[..8] != MAGIC {
            return Err(Error::Config("not a checkpoint file (bad magic)".into()));
        }
        let word = |k: usize| -> [u8; 8] { header[8 * k..8 * k + 8].try_into().expect("8 bytes") };
        let version = u64::from_le_bytes(word(1));
        if version != VERSION {
            return Err(Error::Config(format!("unsupported checkpoint version {version}")));
        }
        let dims = [2, 3, 4].map(|k| u64::from_le_bytes(word(k)));
        let time = f64::from_le_bytes(word(5));
        let shift = f64::from_le_bytes(word(6));
        let n = dims.iter().try_fold(1u64, |a, d| a.checked_mul(*d)).ok_or_else(|| Error::Config("checkpoint dims overflow".into()))? as usize;
        let mut bytes = vec![0u8; 8 * n];
        let mut read_field = |r: &mut R| -> Result<Vec<f64>> {
            r.read_exact(&mut bytes)?;
            Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
        };
        let rho = read_field(&mut r)?;
        let mom = [read_field(&mut r)?, read_field(&mut r)?, read_field(&mut r)?];
        Ok(Self { dims, state: FlowState { rho, mom, time }, shift })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        self.write_to(std::io::BufWriter::new(std::fs::File::create(&tmp)?))?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let n = 2 * 3 * 4;
        let f = |s: f64| (0..n).map(|i| s * (i as f64 + 0.1).sin() + 1.5).collect::<Vec<_>>();
        Checkpoint { dims: [2, 3, 4], state: FlowState { rho: f(0.3), mom: [f(1.0), f(-2.0), f(1e-300)], time: 17.25 }, shift: -0.125 }
    }

    #[test]
    fn bit_exact_round_trip() {
        let c = sample();
        let mut bytes = Vec::new();
        c.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 4 * 8 * 24);
        assert_eq!(&bytes[..8], MAGIC);
        let back = Checkpoint::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back, c);
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(again, bytes);
    }

    #[test]
    fn layout_is_x1_major_little_endian() {
        let c = sample();
        let mut bytes = Vec::new();
        c.write_to(&mut bytes).unwrap();
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(bytes[40..48].try_into().unwrap()), 17.25);
        let third_rho = f64::from_le_bytes(bytes[HEADER_LEN + 16..HEADER_LEN + 24].try_into().unwrap());
        assert_eq!(third_rho, c.state.rho[2]);
    }

    #[test]
    fn rejects_corruption() {
        let mut bytes = Vec::new();
        sample().write_to(&mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Checkpoint::read_from(bad.as_slice()).is_err());
        assert!(Checkpoint::read_from(&bytes[..bytes.len() - 1]).is_err());
    }
}
