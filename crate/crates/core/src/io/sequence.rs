use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, ImageBuffer, Luma};
use rayon::prelude::*;

use super::{ensure_dir, list_files};
use crate::detection::MaskVolume;
use crate::error::{Error, Result};
use crate::field::{Image, ScalarVolume};

/// A directory of frames read in lexicographic filename order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSource {
    pub dir: PathBuf,
    /// Filename glob, e.g. `*.png`.
    pub pattern: String,
    /// Reject frames whose bit depth differs (8 or 16).
    pub bit_depth: Option<u8>,
}

impl SequenceSource {
    /// All PNG/PGM files in `dir`, any bit depth.
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SequenceSource { dir: dir.into(), pattern: "*.[pP][nNgG][gGmM]".into(), bit_depth: None }
    }
}

fn decode(path: &Path, bit_depth: Option<u8>) -> Result<Image> {
    let bad = |msg: String| Error::Decode { path: path.to_path_buf(), msg };
    let img = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| bad(e.to_string()))?;
    let depth = match &img {
        DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_)
        | DynamicImage::ImageRgb16(_)
        | DynamicImage::ImageRgba16(_) => 16,
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageRgb8(_)
        | DynamicImage::ImageRgba8(_) => 8,
        _ => return Err(bad("unsupported pixel format".into())),
    };
    if let Some(d) = bit_depth {
        if d != depth {
            return Err(bad(format!("expected {d}-bit frame, found {depth}-bit")));
        }
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(g) => g.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        other => other.to_luma32f().into_raw().into_iter().map(|v| (v as f64).clamp(0.0, 1.0)).collect(),
    };
    Image::from_vec(w, h, data)
}

/// Reads every matching frame, normalized to `[0, 1]`.
pub fn read_sequence(src: &SequenceSource) -> Result<ScalarVolume> {
    if !src.dir.is_dir() {
        return Err(Error::io(&src.dir, std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory")));
    }
    let files = list_files(&src.dir, &src.pattern)?;
    if files.is_empty() {
        return Err(Error::NoFrames(src.dir.clone()));
    }
    let frames: Vec<Image> = files.par_iter().map(|f| decode(f, src.bit_depth)).collect::<Result<_>>()?;
    let (w0, h0) = frames[0].shape();
    for (f, img) in files.iter().zip(&frames) {
        if img.shape() != (w0, h0) {
            return Err(Error::Dimension(format!(
                "{} is {}x{} but {} is {}x{}",
                f.display(),
                img.width(),
                img.height(),
                files[0].display(),
                w0,
                h0
            )));
        }
    }
    ScalarVolume::from_frames(&frames)
}

fn save(buf: &GrayImage, path: &Path) -> Result<()> {
    buf.save(path).map_err(|e| Error::Format { path: path.to_path_buf(), msg: e.to_string() })
}

/// Writes `mask_%05d.png`, 0 or 255, one file per frame.
pub fn write_masks(dir: &Path, masks: &MaskVolume) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let (nx, ny, nt) = masks.shape();
    (0..nt)
        .map(|n| {
            let fr = masks.frame(n);
            let buf = GrayImage::from_fn(nx as u32, ny as u32, |i, j| {
                Luma([if fr[(i as usize, j as usize)] { 255 } else { 0 }])
            });
            let path = dir.join(format!("mask_{n:05}.png"));
            save(&buf, &path).map(|_| path)
        })
        .collect()
}

/// Writes 16-bit `frame_%05d.png`, clamping to `[0, 1]`.
pub fn write_sequence(dir: &Path, frames: &ScalarVolume) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let (nx, ny, nt) = frames.shape();
    (0..nt)
        .map(|n| {
            let fr = frames.frame(n);
            let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_fn(nx as u32, ny as u32, |i, j| {
                Luma([(fr[(i as usize, j as usize)].clamp(0.0, 1.0) * 65535.0).round() as u16])
            });
            let path = dir.join(format!("frame_{n:05}.png"));
            buf.save(&path).map_err(|e| Error::Format { path: path.clone(), msg: e.to_string() })?;
            Ok(path)
        })
        .collect()
}
