use std::path::Path;

use super::list_files;
use crate::detection::MaskVolume;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundTruthFormat {
    /// `frame,x,y,w,h` per line; an optional header line is skipped.
    CsvBoxes,
    /// One mask image per frame, nonzero meaning foreground.
    MaskDir,
}

impl std::str::FromStr for GroundTruthFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" | "boxes" => Ok(GroundTruthFormat::CsvBoxes),
            "masks" | "mask_dir" => Ok(GroundTruthFormat::MaskDir),
            _ => Err(Error::Config(format!("unknown ground-truth format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxAnnotation {
    pub frame: usize,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruth {
    Boxes { shape: (usize, usize, usize), boxes: Vec<BoxAnnotation> },
    Masks(MaskVolume),
}

impl GroundTruth {
    pub fn format(&self) -> GroundTruthFormat {
        match self {
            GroundTruth::Boxes { .. } => GroundTruthFormat::CsvBoxes,
            GroundTruth::Masks(_) => GroundTruthFormat::MaskDir,
        }
    }

    /// Boxes become filled rectangles.
    pub fn rasterize(&self) -> MaskVolume {
        match self {
            GroundTruth::Boxes { shape: (nx, ny, nt), boxes } => {
                let mut m = MaskVolume::filled(*nx, *ny, *nt, false);
                for b in boxes {
                    for j in b.y..b.y + b.h {
                        for i in b.x..b.x + b.w {
                            m[(i, j, b.frame)] = true;
                        }
                    }
                }
                m
            }
            GroundTruth::Masks(m) => m.clone(),
        }
    }
}

fn parse_boxes(path: &Path, shape: (usize, usize, usize)) -> Result<GroundTruth> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Format { path: path.to_path_buf(), msg: e.to_string() })?;
    let (nx, ny, nt) = shape;
    let mut boxes = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format { path: path.to_path_buf(), msg: e.to_string() })?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        let err = |msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if k == 0 && rec.get(0).is_some_and(|f| f.eq_ignore_ascii_case("frame")) {
            continue;
        }
        if rec.len() != 5 {
            return Err(err(format!("expected 5 fields frame,x,y,w,h, found {}", rec.len())));
        }
        let mut v = [0usize; 5];
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field.parse().map_err(|_| err(format!("'{field}' is not a non-negative integer")))?;
        }
        let b = BoxAnnotation { frame: v[0], x: v[1], y: v[2], w: v[3], h: v[4] };
        if b.w == 0 || b.h == 0 {
            return Err(err("box has zero size".into()));
        }
        if b.frame >= nt || b.x + b.w > nx || b.y + b.h > ny {
            return Err(err(format!(
                "box frame {} at ({}, {}) size {}x{} exceeds sequence {nx}x{ny}x{nt}",
                b.frame, b.x, b.y, b.w, b.h
            )));
        }
        boxes.push(b);
    }
    Ok(GroundTruth::Boxes { shape, boxes })
}

fn parse_masks(dir: &Path, shape: (usize, usize, usize)) -> Result<GroundTruth> {
    let files = list_files(dir, "*.[pP][nNgG][gGmM]")?;
    let (nx, ny, nt) = shape;
    if files.len() != nt {
        return Err(Error::Dimension(format!("{} holds {} masks for {nt} frames", dir.display(), files.len())));
    }
    let mut m = MaskVolume::filled(nx, ny, nt, false);
    for (n, f) in files.iter().enumerate() {
        let img = image::open(f).map_err(|e| Error::Decode { path: f.clone(), msg: e.to_string() })?.to_luma16();
        if (img.width() as usize, img.height() as usize) != (nx, ny) {
            return Err(Error::Dimension(format!(
                "{} is {}x{} but frames are {nx}x{ny}",
                f.display(),
                img.width(),
                img.height()
            )));
        }
        for (i, j, p) in img.enumerate_pixels() {
            m[(i as usize, j as usize, n)] = p.0[0] > 0;
        }
    }
    Ok(GroundTruth::Masks(m))
}

/// Reads and validates ground truth for a sequence of `shape = (nx, ny, nt)`.
pub fn read_groundtruth(path: &Path, format: GroundTruthFormat, shape: (usize, usize, usize)) -> Result<GroundTruth> {
    match format {
        GroundTruthFormat::CsvBoxes => parse_boxes(path, shape),
        GroundTruthFormat::MaskDir => parse_masks(path, shape),
    }
}
