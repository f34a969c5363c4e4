//! Binary checkpoint format, all integers and reals little-endian:
//!
//! ```text
//! magic   8 bytes  "CALMLP\0\0"
//! version u32      1
//! count   u32      number of widths (layers + 1)
//! widths  u64 × count
//! per layer: weights (in × out, row-major f64), then bias (out × f64)
//! ```
//!
//! Hidden layers are ReLU and the last layer is linear.

use std::fs;
use std::path::Path;

use crate::error::{invalid, io_err, Result};
use crate::model::{Activation, Layer, MlpModel};
use crate::numeric::Matrix;

const MAGIC: &[u8; 8] = b"CALMLP\0\0";
const VERSION: u32 = 1;

pub fn to_bytes(m: &MlpModel) -> Vec<u8> {
    let widths = m.widths();
    let mut out = Vec::with_capacity(16 + 8 * widths.len() + 8 * m.num_parameters());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(widths.len() as u32).to_le_bytes());
    for w in &widths {
        out.extend_from_slice(&(*w as u64).to_le_bytes());
    }
    for v in m.parameters() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| invalid("checkpoint truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| invalid("checkpoint too large"))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<MlpModel> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(8)? != MAGIC {
        return Err(invalid("not a model checkpoint"));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(invalid(format!("unsupported checkpoint version {version}")));
    }
    let count = cur.u32()? as usize;
    if count < 3 {
        return Err(invalid("checkpoint needs at least three widths"));
    }
    let widths = (0..count)
        .map(|_| cur.u64().map(|w| w as usize))
        .collect::<Result<Vec<_>>>()?;
    let layers = widths
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let weights = Matrix::new(w[0], w[1], cur.f64s(w[0] * w[1])?)?;
            let bias = cur.f64s(w[1])?;
            if bias.iter().any(|v| !v.is_finite()) {
                return Err(invalid("non-finite bias in checkpoint"));
            }
            let activation = if k + 2 == count {
                Activation::Identity
            } else {
                Activation::Relu
            };
            Ok(Layer {
                weights,
                bias,
                activation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if cur.pos != bytes.len() {
        return Err(invalid("trailing bytes after checkpoint"));
    }
    MlpModel::from_layers(layers)
}

pub fn save_checkpoint(m: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_bytes(m)).map_err(io_err(path))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    from_bytes(&fs::read(path).map_err(io_err(path))?)
}
