//! Frame, ground-truth, flow and mask files, flow color coding, and padding
//! to transform-valid sizes.

mod color;
mod flo;
mod groundtruth;
mod pad;
mod sequence;

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub use color::{flow_to_rgb, flow_wheel_legend, WHEEL};
pub use flo::{read_flo, read_flo_sequence, write_flo, write_flo_sequence, FLO_MAGIC};
pub use groundtruth::{read_groundtruth, BoxAnnotation, GroundTruth, GroundTruthFormat};
pub use pad::{crop, pad_for_transform, CropRecord};
pub use sequence::{read_sequence, write_masks, write_sequence, SequenceSource};

/// Regular files in `dir` whose names match `pattern`, sorted by name.
pub(crate) fn list_files(dir: &Path, pattern: &str) -> Result<Vec<PathBuf>> {
    let pat =
        glob::Pattern::new(pattern).map_err(|e| Error::Config(format!("bad filename pattern '{pattern}': {e}")))?;
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let name = entry.file_name();
        if path.is_file() && name.to_str().is_some_and(|n| pat.matches(n)) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
