use crate::decomposition::TransformConfig;
use crate::error::{Error, Result};
use crate::field::Volume;

/// How a volume was padded; `crop` undoes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropRecord {
    pub original: (usize, usize, usize),
    pub padded: (usize, usize, usize),
}

impl CropRecord {
    /// No padding was added.
    pub fn is_empty(&self) -> bool {
        self.original == self.padded
    }
}

fn valid_side(n: usize, multiple: usize, min: usize) -> usize {
    n.max(min).div_ceil(multiple) * multiple
}

/// Half-sample symmetric reflection, repeated with period `2n`.
fn reflect(k: usize, n: usize) -> usize {
    let m = k % (2 * n);
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Extends `vol` at the high end of each axis by mirror reflection up to the
/// nearest size `t` accepts.
pub fn pad_for_transform<T: Clone>(vol: &Volume<T>, t: &TransformConfig) -> (Volume<T>, CropRecord) {
    let (multiple, min) = t.size_rule();
    let (nx, ny, nt) = vol.shape();
    let padded = (valid_side(nx, multiple, min), valid_side(ny, multiple, min), valid_side(nt, multiple, min));
    let rec = CropRecord { original: (nx, ny, nt), padded };
    if rec.is_empty() || vol.is_empty() {
        return (vol.clone(), CropRecord { original: (nx, ny, nt), padded: (nx, ny, nt) });
    }
    let out = Volume::from_fn(padded.0, padded.1, padded.2, |i, j, n| {
        vol[(reflect(i, nx), reflect(j, ny), reflect(n, nt))].clone()
    });
    (out, rec)
}

pub fn crop<T: Clone>(vol: &Volume<T>, rec: &CropRecord) -> Result<Volume<T>> {
    if vol.shape() != rec.padded {
        return Err(Error::Dimension(format!("crop expects {:?}, got {:?}", rec.padded, vol.shape())));
    }
    let (nx, ny, nt) = rec.original;
    Ok(Volume::from_fn(nx, ny, nt, |i, j, n| vol[(i, j, n)].clone()))
}
