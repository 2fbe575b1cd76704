//! The Middlebury flow color coding.

use std::sync::LazyLock;

use image::{Rgb, RgbImage};

use crate::field::Flow2;

/// The 55-entry color wheel: red, yellow, green, cyan, blue, magenta.
pub static WHEEL: LazyLock<Vec<[f64; 3]>> = LazyLock::new(|| {
    let (ry, yg, gc, cb, bm, mr) = (15, 6, 4, 11, 13, 6);
    let mut w = Vec::with_capacity(55);
    let ramp = |i: usize, n: usize| (255 * i / n) as f64;
    w.extend((0..ry).map(|i| [255.0, ramp(i, ry), 0.0]));
    w.extend((0..yg).map(|i| [255.0 - ramp(i, yg), 255.0, 0.0]));
    w.extend((0..gc).map(|i| [0.0, 255.0, ramp(i, gc)]));
    w.extend((0..cb).map(|i| [0.0, 255.0 - ramp(i, cb), 255.0]));
    w.extend((0..bm).map(|i| [ramp(i, bm), 0.0, 255.0]));
    w.extend((0..mr).map(|i| [255.0, 0.0, 255.0 - ramp(i, mr)]));
    w
});

fn encode(u: f64, v: f64) -> [u8; 3] {
    let n = WHEEL.len();
    let rad = u.hypot(v);
    let a = (-v).atan2(-u) / std::f64::consts::PI;
    let fk = (a + 1.0) / 2.0 * (n - 1) as f64;
    let k0 = (fk.floor() as usize).min(n - 1);
    let k1 = if k0 + 1 == n { 0 } else { k0 + 1 };
    let f = fk - k0 as f64;
    let mut out = [0u8; 3];
    for c in 0..3 {
        let col = ((1.0 - f) * WHEEL[k0][c] + f * WHEEL[k1][c]) / 255.0;
        let col = if rad <= 1.0 { 1.0 - rad * (1.0 - col) } else { col * 0.75 };
        out[c] = (255.0 * col).floor() as u8;
    }
    out
}

/// Hue from direction, saturation from `|w| / max_magnitude`; zero is white.
/// `None` scales by the largest magnitude present.
pub fn flow_to_rgb(flow: &Flow2, max_magnitude: Option<f64>) -> RgbImage {
    let (w, h) = flow.shape();
    let max = max_magnitude.unwrap_or_else(|| {
        flow.u.as_slice().iter().zip(flow.v.as_slice()).fold(0.0f64, |m, (u, v)| m.max(u.hypot(*v)))
    });
    let scale = if max > 0.0 { 1.0 / max } else { 1.0 };
    RgbImage::from_fn(w as u32, h as u32, |i, j| {
        let (i, j) = (i as usize, j as usize);
        let rad_u = flow.u[(i, j)] * scale;
        let rad_v = flow.v[(i, j)] * scale;
        // Clip magnitudes above the maximum to the rim of the wheel.
        let r = rad_u.hypot(rad_v);
        let c = if r > 1.0 { 1.0 / r } else { 1.0 };
        Rgb(encode(rad_u * c, rad_v * c))
    })
}

/// A `size x size` wheel: the color for each direction at each magnitude up
/// to the rim, white outside.
pub fn flow_wheel_legend(size: usize) -> RgbImage {
    let c = (size as f64 - 1.0) / 2.0;
    RgbImage::from_fn(size as u32, size as u32, |i, j| {
        let u = (i as f64 - c) / c;
        let v = (j as f64 - c) / c;
        if u.hypot(v) > 1.0 {
            Rgb([255, 255, 255])
        } else {
            Rgb(encode(u, v))
        }
    })
}
