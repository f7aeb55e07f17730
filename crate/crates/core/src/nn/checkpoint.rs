//! Versioned little-endian binary container for parameter tensors.
//!
//! ```text
//! magic    8 bytes  "PGCKPT\0\0"
//! version  u32      1
//! meta     u64 length + UTF-8 bytes (config echo, JSON)
//! count    u32
//! tensor*  u32 rank, rank x u64 extents, product(extents) x f64 bits
//! ```
//!
//! Standalone tensor files (precomputed feature maps) use magic
//! `"PGTENS\0\0"`, the same version word, then a single tensor record.

use std::io::{Read, Write};

use super::{NnError, Tensor};

const CHECKPOINT_MAGIC: &[u8; 8] = b"PGCKPT\0\0";
const TENSOR_MAGIC: &[u8; 8] = b"PGTENS\0\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: String,
    pub tensors: Vec<Tensor>,
}

impl Checkpoint {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), NnError> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.meta.len() as u64).to_le_bytes())?;
        w.write_all(self.meta.as_bytes())?;
        w.write_all(&(self.tensors.len() as u32).to_le_bytes())?;
        for t in &self.tensors {
            write_tensor_record(&mut w, t)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, NnError> {
        read_header(&mut r, CHECKPOINT_MAGIC)?;
        let meta_len = read_u64(&mut r)? as usize;
        let mut meta = vec![0; meta_len];
        r.read_exact(&mut meta)?;
        let meta = String::from_utf8(meta)
            .map_err(|_| NnError::Checkpoint("metadata is not UTF-8".into()))?;
        let count = read_u32(&mut r)? as usize;
        let tensors = (0..count)
            .map(|_| read_tensor_record(&mut r))
            .collect::<Result<_, _>>()?;
        Ok(Self { meta, tensors })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), NnError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, NnError> {
        let bytes = std::fs::read(path)?;
        Self::read_from(&bytes[..])
    }
}

pub fn write_tensor_file(path: impl AsRef<std::path::Path>, t: &Tensor) -> Result<(), NnError> {
    let mut out = Vec::new();
    out.extend_from_slice(TENSOR_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    write_tensor_record(&mut out, t)?;
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_tensor_file(path: impl AsRef<std::path::Path>) -> Result<Tensor, NnError> {
    let bytes = std::fs::read(path)?;
    let mut r = &bytes[..];
    read_header(&mut r, TENSOR_MAGIC)?;
    read_tensor_record(&mut r)
}

/// True when the bytes start with the standalone tensor magic.
pub fn is_tensor_file(bytes: &[u8]) -> bool {
    bytes.starts_with(TENSOR_MAGIC)
}

fn write_tensor_record<W: Write>(w: &mut W, t: &Tensor) -> Result<(), NnError> {
    w.write_all(&(t.shape().len() as u32).to_le_bytes())?;
    for &d in t.shape() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for v in t.data() {
        w.write_all(&v.to_bits().to_le_bytes())?;
    }
    Ok(())
}

fn read_header<R: Read>(r: &mut R, magic: &[u8; 8]) -> Result<(), NnError> {
    let mut got = [0u8; 8];
    r.read_exact(&mut got)?;
    if &got != magic {
        return Err(NnError::Checkpoint("bad magic bytes".into()));
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(NnError::Checkpoint(format!(
            "unsupported format version {version}"
        )));
    }
    Ok(())
}

fn read_tensor_record<R: Read>(r: &mut R) -> Result<Tensor, NnError> {
    let rank = read_u32(r)? as usize;
    if rank > 8 {
        return Err(NnError::Checkpoint(format!("implausible tensor rank {rank}")));
    }
    let shape = (0..rank)
        .map(|_| read_u64(r).map(|d| d as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let len = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| NnError::Checkpoint("tensor extent overflow".into()))?;
    let mut raw = vec![0u8; len * 8];
    r.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(8)
        .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().expect("8 bytes"))))
        .collect();
    Tensor::new(shape, data)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NnError> {
    let mut b = [0; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, NnError> {
    let mut b = [0; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
