//! Moving-object masks from flow magnitude, the temporal-median baseline,
//! connected components and mask scoring.

mod baseline;
mod components;
mod eval;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{magnitude, Grid2, ScalarVolume, VectorField3, Volume};

pub use baseline::{background_subtraction_baseline, morphological_opening, temporal_median_background};
pub use components::{connected_components, remove_small_components, Component, Components};
pub use eval::{evaluate_masks, match_recall, EvalReport, FrameEval, RecallMatch};

pub type MaskVolume = Volume<bool>;
pub type Mask2 = Grid2<bool>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Use `DetectionParams::threshold` as given.
    Manual,
    /// Otsu's threshold on the magnitude histogram of the whole field.
    Otsu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    /// Temporal median window, in frames.
    pub window: usize,
    /// Multiplier on the per-frame standard deviation of the difference image.
    pub k: f64,
    pub opening_radius: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams { window: 30, k: 3.0, opening_radius: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    /// Magnitude threshold in pixels per frame.
    pub threshold: f64,
    pub mode: ThresholdMode,
    /// Components with fewer pixels are discarded.
    pub min_component_size: usize,
    pub baseline: BaselineParams,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            threshold: 0.5,
            mode: ThresholdMode::Manual,
            min_component_size: 5,
            baseline: BaselineParams::default(),
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::Config(format!("detect.threshold must be positive (got {})", self.threshold)));
        }
        if self.min_component_size < 1 {
            return Err(Error::Config("detect.min_component_size must be at least 1".into()));
        }
        if self.baseline.window < 3 {
            return Err(Error::Config(format!("baseline.window must be at least 3 (got {})", self.baseline.window)));
        }
        if !(self.baseline.k > 0.0 && self.baseline.k.is_finite()) {
            return Err(Error::Config(format!("baseline.k must be positive (got {})", self.baseline.k)));
        }
        Ok(())
    }
}

/// `magnitude(f) > t`, without any filtering.
pub fn threshold_magnitude(f: &VectorField3, t: f64) -> MaskVolume {
    magnitude(f).map(|&m| m > t)
}

/// Otsu's threshold over a 256-bin histogram of `values` on `[0, max]`.
pub fn otsu_threshold(values: &[f64]) -> f64 {
    const BINS: usize = 256;
    let max = values.iter().fold(0.0f64, |m, &x| m.max(x));
    if max <= 0.0 || values.is_empty() {
        return f64::MIN_POSITIVE;
    }
    let mut hist = [0usize; BINS];
    for &x in values {
        let b = ((x / max) * BINS as f64) as usize;
        hist[b.min(BINS - 1)] += 1;
    }
    let total = values.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0, mut best, mut best_bin) = (0.0, 0.0, -1.0, 0);
    for (i, &c) in hist.iter().enumerate() {
        w0 += c as f64;
        sum0 += i as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best {
            best = between;
            best_bin = i;
        }
    }
    (best_bin + 1) as f64 * max / BINS as f64
}

/// The threshold `detect_by_magnitude` will apply to `f`.
pub fn effective_threshold(f: &VectorField3, p: &DetectionParams) -> f64 {
    match p.mode {
        ThresholdMode::Manual => p.threshold,
        ThresholdMode::Otsu => otsu_threshold(magnitude(f).as_slice()),
    }
}

/// Thresholds the flow magnitude, then drops small components frame by frame.
pub fn detect_by_magnitude(f: &VectorField3, p: &DetectionParams) -> Result<MaskVolume> {
    p.validate()?;
    let raw = threshold_magnitude(f, effective_threshold(f, p));
    Ok(filter_frames(&raw, p.min_component_size))
}

pub(crate) fn filter_frames(mask: &MaskVolume, min_size: usize) -> MaskVolume {
    let (nx, ny, nt) = mask.shape();
    let frames: Vec<Mask2> =
        (0..nt).into_par_iter().map(|n| remove_small_components(&mask.frame(n), min_size)).collect();
    let mut out = MaskVolume::filled(nx, ny, nt, false);
    for (n, fr) in frames.iter().enumerate() {
        out.set_frame(n, fr);
    }
    out
}

pub(crate) fn frames_of(v: &ScalarVolume) -> Vec<Grid2<f64>> {
    (0..v.nt()).map(|n| v.frame(n)).collect()
}
