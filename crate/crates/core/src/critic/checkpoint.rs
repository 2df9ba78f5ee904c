//! Binary checkpoint for a [`CriticEnsemble`].
//!
//! All integers are little-endian `u32`, all reals little-endian IEEE-754 `f64`.
//!
//! | bytes | field |
//! |---|---|
//! | 8 | magic `CMCTSCRT` |
//! | 4 | format version, currently 1 |
//! | 4 | K, number of members |
//! | 4 | L, number of layer dims |
//! | 4·L | layer dims, input first |
//! | 8 | sigma_max |
//! | 4 | byte length E of the encoder id |
//! | E | encoder id, UTF-8 |
//! | 8·P·K | member parameters, member by member |
//!
//! P = Σ over consecutive dims (in·out + out). Each member's parameters are
//! stored layer by layer: the `out × in` weight matrix row-major, then the
//! `out` biases. Nothing follows the last member.

use std::fs;
use std::path::Path;

use super::ensemble::CriticEnsemble;
use super::network::QNetwork;
use super::CriticError;

pub const MAGIC: &[u8; 8] = b"CMCTSCRT";
pub const VERSION: u32 = 1;

pub fn encode(ensemble: &CriticEnsemble) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(ensemble.k() as u32).to_le_bytes());
    let dims = ensemble.layer_dims();
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&ensemble.sigma_max().to_le_bytes());
    let id = ensemble.encoder_id().as_bytes();
    out.extend_from_slice(&(id.len() as u32).to_le_bytes());
    out.extend_from_slice(id);
    for m in ensemble.members() {
        for p in m.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CriticError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(CriticError::Truncated)?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, CriticError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64, CriticError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<CriticEnsemble, CriticError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len()).map_err(|_| CriticError::BadMagic)? != MAGIC {
        return Err(CriticError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CriticError::Version { found: version, expected: VERSION });
    }
    let k = r.u32()? as usize;
    let n_dims = r.u32()? as usize;
    if k == 0 || n_dims < 2 || n_dims > 64 {
        return Err(CriticError::Dimension(format!("K={k} with {n_dims} layer dims")));
    }
    let dims = (0..n_dims).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
    if dims.contains(&0) {
        return Err(CriticError::Dimension(format!("zero-width layer in {dims:?}")));
    }
    let sigma_max = r.f64()?;
    let id_len = r.u32()? as usize;
    let id = String::from_utf8(r.take(id_len)?.to_vec())
        .map_err(|_| CriticError::Dimension("encoder id is not UTF-8".into()))?;
    let per_member: usize = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    let mut members = Vec::with_capacity(k);
    for _ in 0..k {
        let params = (0..per_member).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
        members.push(QNetwork::from_params(&dims, params).expect("count matches dims"));
    }
    if r.pos != bytes.len() {
        return Err(CriticError::Dimension(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    CriticEnsemble::from_members(members, sigma_max, id)
}

pub fn save_checkpoint(ensemble: &CriticEnsemble, path: &Path) -> Result<(), CriticError> {
    fs::write(path, encode(ensemble)).map_err(|e| CriticError::Io(format!("{}: {e}", path.display())))
}

pub fn load_checkpoint(path: &Path) -> Result<CriticEnsemble, CriticError> {
    let bytes = fs::read(path).map_err(|e| CriticError::Io(format!("{}: {e}", path.display())))?;
    decode(&bytes)
}
