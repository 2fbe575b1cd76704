//! Middlebury `.flo`: magic `202021.25f32`, `i32` width, `i32` height, then
//! row-major interleaved `(u, v)` as `f32`, all little-endian.

use std::path::{Path, PathBuf};

use super::{ensure_dir, list_files};
use crate::error::{Error, Result};
use crate::field::{Flow2, Image, VectorField3};

pub const FLO_MAGIC: f32 = 202021.25;

pub fn write_flo(path: &Path, flow: &Flow2) -> Result<()> {
    if !flow.u.as_slice().iter().chain(flow.v.as_slice()).all(|x| x.is_finite()) {
        return Err(Error::NonFinite("flow written to .flo"));
    }
    let (w, h) = flow.shape();
    let mut buf = Vec::with_capacity(12 + 8 * w * h);
    buf.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    buf.extend_from_slice(&(w as i32).to_le_bytes());
    buf.extend_from_slice(&(h as i32).to_le_bytes());
    for (u, v) in flow.u.as_slice().iter().zip(flow.v.as_slice()) {
        buf.extend_from_slice(&(*u as f32).to_le_bytes());
        buf.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_flo(path: &Path) -> Result<Flow2> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |msg: String| Error::Format { path: path.to_path_buf(), msg };
    if bytes.len() < 12 {
        return Err(bad(format!("truncated header ({} bytes)", bytes.len())));
    }
    let word = |k: usize| -> [u8; 4] { bytes[4 * k..4 * k + 4].try_into().unwrap() };
    let magic = f32::from_le_bytes(word(0));
    if magic != FLO_MAGIC {
        return Err(bad(format!("bad magic {magic}")));
    }
    let w = i32::from_le_bytes(word(1));
    let h = i32::from_le_bytes(word(2));
    if w <= 0 || h <= 0 {
        return Err(bad(format!("invalid size {w}x{h}")));
    }
    let (w, h) = (w as usize, h as usize);
    let expected = 12 + 8 * w * h;
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes for {w}x{h}, found {}", bytes.len())));
    }
    let mut u = Vec::with_capacity(w * h);
    let mut v = Vec::with_capacity(w * h);
    for k in 0..w * h {
        u.push(f32::from_le_bytes(word(3 + 2 * k)) as f64);
        v.push(f32::from_le_bytes(word(4 + 2 * k)) as f64);
    }
    Ok(Flow2 { u: Image::from_vec(w, h, u)?, v: Image::from_vec(w, h, v)? })
}

/// One `{prefix}_%05d.flo` per time slot.
pub fn write_flo_sequence(dir: &Path, prefix: &str, field: &VectorField3) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    (0..field.shape().2)
        .map(|n| {
            let path = dir.join(format!("{prefix}_{n:05}.flo"));
            write_flo(&path, &field.slot(n)).map(|_| path)
        })
        .collect()
}

pub fn read_flo_sequence(dir: &Path, prefix: &str) -> Result<VectorField3> {
    let files = list_files(dir, &format!("{prefix}_*.flo"))?;
    if files.is_empty() {
        return Err(Error::NoFrames(dir.to_path_buf()));
    }
    let slots: Vec<Flow2> = files.iter().map(|f| read_flo(f)).collect::<Result<_>>()?;
    VectorField3::from_slots(&slots)
}
