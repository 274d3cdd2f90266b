//! Flat binary checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! u32            number of layers L
//! u32 × L        layer sizes
//! for each weight matrix l in 0..L-1:
//!     f32 × (sizes[l+1] * sizes[l])   weights, row-major
//!     f32 × sizes[l+1]                biases
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::mlp::Mlp;
use crate::binio::{put_f32s, put_u32, to_u32, ByteReader};
use crate::error::{Error, Result};

impl Mlp {
    pub fn write_checkpoint<W: Write>(&self, out: &mut W) -> Result<()> {
        let io = |e| Error::io("writing checkpoint", e);
        put_u32(out, to_u32(self.layer_sizes().len(), "layer count")?).map_err(io)?;
        for &n in self.layer_sizes() {
            put_u32(out, to_u32(n, "layer size")?).map_err(io)?;
        }
        for (w, b) in self.weights.iter().zip(&self.biases) {
            put_f32s(out, w).map_err(io)?;
            put_f32s(out, b).map_err(io)?;
        }
        Ok(())
    }

    pub fn to_checkpoint_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(8 + 4 * self.parameter_count());
        self.write_checkpoint(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn from_checkpoint_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes, "checkpoint");
        let layers = r.u32_le()? as usize;
        if !(2..=1024).contains(&layers) {
            return Err(Error::Format(format!("implausible layer count {layers}")));
        }
        let sizes = (0..layers)
            .map(|_| r.u32_le().map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        let mut weights = Vec::with_capacity(layers - 1);
        let mut biases = Vec::with_capacity(layers - 1);
        for l in 0..layers - 1 {
            weights.push(r.f32s_le(sizes[l] * sizes[l + 1])?);
            biases.push(r.f32s_le(sizes[l + 1])?);
        }
        r.finish()?;
        Mlp::from_parts(&sizes, weights, biases)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_checkpoint_bytes())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_checkpoint_bytes(&bytes)
    }
}
