use std::collections::BTreeMap;
use std::path::Path;

use turbodetect::detection::EvalReport;
use turbodetect::{Error, Result};

/// Sorted `key = value` lines. Floats are written with a fixed precision so
/// identical runs give identical bytes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: BTreeMap<String, String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.insert(key.into(), value.to_string());
    }

    pub fn set_f64(&mut self, key: impl Into<String>, value: f64) {
        self.set(key, format!("{value:.6}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn merge(&mut self, other: &Report) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// P/R/F1, pixel counts, hit frames and false-positive components under
    /// `prefix.`.
    pub fn add_eval(&mut self, prefix: &str, r: &EvalReport) {
        self.set_f64(format!("{prefix}.precision"), r.precision);
        self.set_f64(format!("{prefix}.recall"), r.recall);
        self.set_f64(format!("{prefix}.f1"), r.f1);
        self.set(format!("{prefix}.tp"), r.tp);
        self.set(format!("{prefix}.fp"), r.fp);
        self.set(format!("{prefix}.fn"), r.fn_);
        self.set(format!("{prefix}.hit_frames"), r.hit_frames);
        self.set(format!("{prefix}.fp_components"), r.fp_components);
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Option<Report> {
        let mut r = Report::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once(" = ")?;
            r.set(k, v);
        }
        Some(r)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Report> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Report::parse(&text)
            .ok_or_else(|| Error::Format { path: path.to_path_buf(), msg: "expected key = value lines".into() })
    }
}
