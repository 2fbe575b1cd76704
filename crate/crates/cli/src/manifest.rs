use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use turbodetect::{Error, Result};

pub const MANIFEST_NAME: &str = "MANIFEST";

/// Completed stages, in completion order, and every artifact written,
/// relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    stages: Vec<String>,
    artifacts: BTreeSet<PathBuf>,
}

impl Manifest {
    /// Loads an existing manifest from `dir`, or starts an empty one.
    pub fn load_or_default(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_NAME);
        if !path.exists() {
            return Ok(Manifest::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut m = Manifest::default();
        for (k, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once(' ') {
                Some(("stage", s)) => m.add_stage(s),
                Some(("artifact", a)) => {
                    m.artifacts.insert(PathBuf::from(a));
                }
                _ => return Err(Error::Parse { path, line: k + 1, msg: format!("unrecognized line '{line}'") }),
            }
        }
        Ok(m)
    }

    pub fn stages(&self) -> &[String] {
        &self.stages
    }

    pub fn artifacts(&self) -> impl Iterator<Item = &Path> {
        self.artifacts.iter().map(PathBuf::as_path)
    }

    pub fn has_stage(&self, stage: &str) -> bool {
        self.stages.iter().any(|s| s == stage)
    }

    pub fn add_stage(&mut self, stage: &str) {
        if !self.has_stage(stage) {
            self.stages.push(stage.to_string());
        }
    }

    /// Records `path`, which must lie under `root`.
    pub fn add_artifact(&mut self, root: &Path, path: &Path) {
        let rel = path.strip_prefix(root).unwrap_or(path);
        self.artifacts.insert(rel.to_path_buf());
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut text = String::from("# turbodetect manifest\n");
        for s in &self.stages {
            text.push_str(&format!("stage {s}\n"));
        }
        for a in &self.artifacts {
            text.push_str(&format!("artifact {}\n", a.display()));
        }
        let path = dir.join(MANIFEST_NAME);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}
