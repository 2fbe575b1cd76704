use super::{connected_components, MaskVolume};
use crate::error::{Error, Result};
use crate::field::ScalarVolume;

/// Pixel counts and scores for one frame. A ratio with an empty denominator
/// is 1 (nothing claimed, nothing missed).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameEval {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Some predicted component has its centroid inside the truth.
    pub object_hit: bool,
    /// Predicted components sharing no pixel with the truth.
    pub fp_components: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub frames: Vec<FrameEval>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// Micro-averaged over all frames.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub hit_frames: usize,
    pub fp_components: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

fn scores(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let p = ratio(tp, tp + fp);
    let r = ratio(tp, tp + fn_);
    let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f1)
}

pub fn evaluate_masks(pred: &MaskVolume, gt: &MaskVolume) -> Result<EvalReport> {
    pred.check_same_shape(gt, "evaluate_masks")?;
    let nt = pred.nt();
    let mut frames = Vec::with_capacity(nt);
    for n in 0..nt {
        let (pf, gf) = (pred.frame(n), gt.frame(n));
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for (&p, &g) in pf.as_slice().iter().zip(gf.as_slice()) {
            match (p, g) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                _ => {}
            }
        }
        let cc = connected_components(&pf);
        let object_hit = cc.components.iter().any(|c| {
            let (x, y) = (c.centroid.0.round() as usize, c.centroid.1.round() as usize);
            gf[(x, y)]
        });
        let mut overlaps = vec![false; cc.components.len() + 1];
        for (&l, &g) in cc.labels.as_slice().iter().zip(gf.as_slice()) {
            if g {
                overlaps[l as usize] = true;
            }
        }
        let fp_components = overlaps[1..].iter().filter(|&&o| !o).count();
        let (precision, recall, f1) = scores(tp, fp, fn_);
        frames.push(FrameEval { tp, fp, fn_, precision, recall, f1, object_hit, fp_components });
    }
    let tp = frames.iter().map(|f| f.tp).sum();
    let fp = frames.iter().map(|f| f.fp).sum();
    let fn_ = frames.iter().map(|f| f.fn_).sum();
    let (precision, recall, f1) = scores(tp, fp, fn_);
    let hit_frames = frames.iter().filter(|f| f.object_hit).count();
    let fp_components = frames.iter().map(|f| f.fp_components).sum();
    Ok(EvalReport { frames, tp, fp, fn_, precision, recall, f1, hit_frames, fp_components })
}

/// Operating point of a score volume thresholded to reach a given recall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecallMatch {
    /// Pixels with `score >= threshold` are detections.
    pub threshold: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
}

/// Largest threshold on `score` whose pixel recall against `gt` is at least
/// `target_recall`; no size filtering.
pub fn match_recall(score: &ScalarVolume, gt: &MaskVolume, target_recall: f64) -> Result<RecallMatch> {
    score.check_same_shape(gt, "match_recall")?;
    let mut on: Vec<f64> = score.as_slice().iter().zip(gt.as_slice()).filter(|(_, &g)| g).map(|(&s, _)| s).collect();
    if on.is_empty() {
        return Err(Error::Dimension("match_recall: ground truth is empty".into()));
    }
    on.sort_unstable_by(|a, b| b.total_cmp(a));
    let k = ((target_recall.clamp(0.0, 1.0) * on.len() as f64).ceil() as usize).clamp(1, on.len());
    let threshold = on[k - 1];
    let mut tp = 0;
    let mut fp = 0;
    for (&s, &g) in score.as_slice().iter().zip(gt.as_slice()) {
        if s >= threshold {
            if g {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    Ok(RecallMatch { threshold, recall: tp as f64 / on.len() as f64, tp, fp })
}
