//! Binary sequence container.
//!
//! Little-endian layout: magic `FSQ1`, `u32` version, `u32` sequence count;
//! per sequence `u32` height, `u32` width, `u32` frame count and the frames as
//! row-major `f32`; then a `u64` byte length followed by a JSON array with one
//! metadata object per sequence.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Sequence, SequenceMeta, SequenceSet};
use crate::error::{Error, Result};
use crate::field_math::RealField;

pub const CONTAINER_MAGIC: [u8; 4] = *b"FSQ1";
pub const CONTAINER_VERSION: u32 = 1;

/// Serialize a set to bytes. Frames are stored as `f32`.
pub fn encode(set: &SequenceSet) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(&CONTAINER_MAGIC);
    out.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
    out.extend_from_slice(&u32_of(set.sequences.len(), "sequence count")?.to_le_bytes());
    for seq in &set.sequences {
        let (h, w) = seq.frames.first().map(|f| f.dims()).unwrap_or((0, 0));
        out.extend_from_slice(&u32_of(h, "height")?.to_le_bytes());
        out.extend_from_slice(&u32_of(w, "width")?.to_le_bytes());
        out.extend_from_slice(&u32_of(seq.frames.len(), "frame count")?.to_le_bytes());
        for frame in &seq.frames {
            frame.ensure_same_dims((h, w))?;
            for &v in frame.data() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    let metas: Vec<&SequenceMeta> = set.sequences.iter().map(|s| &s.meta).collect();
    let json = serde_json::to_vec(&metas)?;
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    Ok(out)
}

fn u32_of(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{what} {v} does not fit in u32")))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Truncated(format!(
                "{what} needs {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            ))),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }
}

/// Parse a container from bytes.
pub fn decode(bytes: &[u8]) -> Result<SequenceSet> {
    let mut r = Reader { bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4, "magic")?.try_into().expect("4 bytes");
    if magic != CONTAINER_MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = r.u32("version")?;
    if version != CONTAINER_VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let count = r.u32("sequence count")? as usize;
    let mut frame_sets = Vec::with_capacity(count.min(1 << 16));
    for i in 0..count {
        let h = r.u32("height")? as usize;
        let w = r.u32("width")? as usize;
        let n = r.u32("frame count")? as usize;
        let pixels = h
            .checked_mul(w)
            .ok_or_else(|| Error::Format(format!("sequence {i}: {h}x{w} overflows")))?;
        let mut frames = Vec::with_capacity(n.min(1 << 12));
        for _ in 0..n {
            let raw = r.take(pixels.saturating_mul(4), "frame data")?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
                .collect();
            frames.push(RealField::new(h, w, data)?);
        }
        frame_sets.push(frames);
    }
    let json_len = usize::try_from(r.u64("metadata length")?)
        .map_err(|_| Error::Format("metadata length overflows".into()))?;
    let json = r.take(json_len, "metadata")?;
    if r.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let metas: Vec<SequenceMeta> = serde_json::from_slice(json)?;
    if metas.len() != count {
        return Err(Error::Format(format!(
            "{} metadata entries for {count} sequences",
            metas.len()
        )));
    }
    Ok(SequenceSet {
        sequences: frame_sets
            .into_iter()
            .zip(metas)
            .map(|(frames, meta)| Sequence { frames, meta })
            .collect(),
    })
}

pub fn write_container(set: &SequenceSet, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode(set)?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    file.sync_all()?;
    Ok(())
}

pub fn read_container(path: impl AsRef<Path>) -> Result<SequenceSet> {
    decode(&fs::read(path)?)
}
