//! Background subtraction with a sliding temporal median and a per-frame
//! adaptive threshold `mean(d) + k std(d)`.

use rayon::prelude::*;

use super::{filter_frames, frames_of, DetectionParams, Mask2, MaskVolume};
use crate::error::{Error, Result};
use crate::field::{Image, ScalarVolume};

/// Per-pixel median over the `window` frames centred on `n`, with the
/// window slid inward at the sequence ends.
pub fn temporal_median_background(frames: &ScalarVolume, n: usize, window: usize) -> Image {
    let (nx, ny, nt) = frames.shape();
    let start = n.saturating_sub(window / 2).min(nt - window);
    let mut buf = vec![0.0; window];
    Image::from_fn(nx, ny, |i, j| {
        for (s, b) in buf.iter_mut().enumerate() {
            *b = frames[(i, j, start + s)];
        }
        buf.sort_unstable_by(f64::total_cmp);
        if window % 2 == 1 {
            buf[window / 2]
        } else {
            0.5 * (buf[window / 2 - 1] + buf[window / 2])
        }
    })
}

fn disk(r: usize) -> Vec<(i64, i64)> {
    let r = r as i64;
    (-r..=r).flat_map(|dy| (-r..=r).map(move |dx| (dx, dy))).filter(|&(dx, dy)| dx * dx + dy * dy <= r * r).collect()
}

fn erode_or_dilate(m: &Mask2, se: &[(i64, i64)], erode: bool) -> Mask2 {
    let (w, h) = m.shape();
    Mask2::from_fn(w, h, |i, j| {
        let mut hits = se.iter().filter_map(|&(dx, dy)| {
            let (x, y) = (i as i64 + dx, j as i64 + dy);
            (x >= 0 && y >= 0 && x < w as i64 && y < h as i64).then(|| m[(x as usize, y as usize)])
        });
        if erode {
            hits.all(|b| b)
        } else {
            hits.any(|b| b)
        }
    })
}

/// Erosion then dilation by a disk of radius `r`; pixels outside the frame
/// are ignored.
pub fn morphological_opening(m: &Mask2, r: usize) -> Mask2 {
    if r == 0 {
        return m.clone();
    }
    let se = disk(r);
    erode_or_dilate(&erode_or_dilate(m, &se, true), &se, false)
}

fn frame_mask(frame: &Image, bg: &Image, k: f64, opening: usize) -> Mask2 {
    let d: Vec<f64> = frame.as_slice().iter().zip(bg.as_slice()).map(|(a, b)| (a - b).abs()).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return Mask2::filled(frame.width(), frame.height(), false);
    }
    let t = mean + k * std;
    let raw = Mask2::from_vec(frame.width(), frame.height(), d.iter().map(|&x| x > t).collect()).unwrap();
    morphological_opening(&raw, opening)
}

pub fn background_subtraction_baseline(frames: &ScalarVolume, p: &DetectionParams) -> Result<MaskVolume> {
    p.validate()?;
    let (nx, ny, nt) = frames.shape();
    let w = p.baseline.window;
    if nt < w {
        return Err(Error::Dimension(format!("baseline needs at least {w} frames (got {nt})")));
    }
    let imgs = frames_of(frames);
    let masks: Vec<Mask2> = (0..nt)
        .into_par_iter()
        .map(|n| {
            frame_mask(&imgs[n], &temporal_median_background(frames, n, w), p.baseline.k, p.baseline.opening_radius)
        })
        .collect();
    let mut out = MaskVolume::filled(nx, ny, nt, false);
    for (n, m) in masks.iter().enumerate() {
        out.set_frame(n, m);
    }
    Ok(filter_frames(&out, p.min_component_size))
}
