//! Small 2D image helpers shared by the estimators and generators.

use crate::field::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Border {
    Clamp,
    Periodic,
}

/// Normalized Gaussian taps for `sigma`, radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius).map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

#[inline]
fn wrap_index(i: i64, n: usize, border: Border) -> usize {
    match border {
        Border::Clamp => i.clamp(0, n as i64 - 1) as usize,
        Border::Periodic => i.rem_euclid(n as i64) as usize,
    }
}

/// Separable convolution with a symmetric kernel.
pub fn convolve_separable(img: &Image, kernel: &[f64], border: Border) -> Image {
    if kernel.len() == 1 {
        return img.map(|v| v * kernel[0]);
    }
    let (w, h) = img.shape();
    let r = (kernel.len() / 2) as i64;
    let mut tmp = Image::zeros(w, h);
    for j in 0..h {
        for i in 0..w {
            let mut acc = 0.0;
            for (t, k) in kernel.iter().enumerate() {
                acc += k * img[(wrap_index(i as i64 + t as i64 - r, w, border), j)];
            }
            tmp[(i, j)] = acc;
        }
    }
    let mut out = Image::zeros(w, h);
    for j in 0..h {
        for i in 0..w {
            let mut acc = 0.0;
            for (t, k) in kernel.iter().enumerate() {
                acc += k * tmp[(i, wrap_index(j as i64 + t as i64 - r, h, border))];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

pub fn gaussian_blur(img: &Image, sigma: f64) -> Image {
    convolve_separable(img, &gaussian_kernel(sigma), Border::Clamp)
}

/// Bilinear sample at `(x, y)` with clamp-to-edge.
#[inline]
pub fn sample_bilinear(img: &Image, x: f64, y: f64) -> f64 {
    let (w, h) = img.shape();
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let top = img[(x0, y0)] * (1.0 - fx) + img[(x1, y0)] * fx;
    let bottom = img[(x0, y1)] * (1.0 - fx) + img[(x1, y1)] * fx;
    top * (1.0 - fy) + bottom * fy
}

/// `out(p) = img(p + (u, v)(p))`.
pub fn warp(img: &Image, u: &Image, v: &Image) -> Image {
    Image::from_fn(img.width(), img.height(), |i, j| sample_bilinear(img, i as f64 + u[(i, j)], j as f64 + v[(i, j)]))
}

/// Central-difference gradient with one-sided differences at the border.
pub fn gradient(img: &Image) -> (Image, Image) {
    let (w, h) = img.shape();
    let gx = Image::from_fn(w, h, |i, j| {
        if w < 2 {
            0.0
        } else if i == 0 {
            img[(1, j)] - img[(0, j)]
        } else if i == w - 1 {
            img[(i, j)] - img[(i - 1, j)]
        } else {
            0.5 * (img[(i + 1, j)] - img[(i - 1, j)])
        }
    });
    let gy = Image::from_fn(w, h, |i, j| {
        if h < 2 {
            0.0
        } else if j == 0 {
            img[(i, 1)] - img[(i, 0)]
        } else if j == h - 1 {
            img[(i, j)] - img[(i, j - 1)]
        } else {
            0.5 * (img[(i, j + 1)] - img[(i, j - 1)])
        }
    });
    (gx, gy)
}

/// Bilinear resize to `(w, h)` using pixel-center alignment.
pub fn resize(img: &Image, w: usize, h: usize) -> Image {
    let sx = img.width() as f64 / w as f64;
    let sy = img.height() as f64 / h as f64;
    Image::from_fn(w, h, |i, j| sample_bilinear(img, (i as f64 + 0.5) * sx - 0.5, (j as f64 + 0.5) * sy - 0.5))
}

/// Blur then halve each side (rounding up).
pub fn downsample(img: &Image) -> Image {
    let smooth = gaussian_blur(img, 0.8);
    resize(&smooth, img.width().div_ceil(2), img.height().div_ceil(2))
}

/// Gaussian pyramid, finest level first.
pub fn pyramid(img: &Image, levels: usize, min_side: usize) -> Vec<Image> {
    let mut out = vec![img.clone()];
    while out.len() < levels {
        let last = out.last().unwrap();
        if last.width() / 2 < min_side || last.height() / 2 < min_side {
            break;
        }
        out.push(downsample(last));
    }
    out
}

pub fn laplacian_energy(u: &Image) -> f64 {
    let (w, h) = u.shape();
    let mut e = 0.0;
    for j in 1..h.saturating_sub(1) {
        for i in 1..w.saturating_sub(1) {
            let l = u[(i + 1, j)] + u[(i - 1, j)] + u[(i, j + 1)] + u[(i, j - 1)] - 4.0 * u[(i, j)];
            e += l * l;
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_sums_to_one() {
        for s in [0.5, 1.0, 2.5] {
            assert!((gaussian_kernel(s).iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
        assert_eq!(gaussian_kernel(0.0), vec![1.0]);
    }

    #[test]
    fn blur_preserves_constants() {
        let img = Image::filled(9, 7, 0.3);
        for b in [Border::Clamp, Border::Periodic] {
            let out = convolve_separable(&img, &gaussian_kernel(1.5), b);
            assert!(out.as_slice().iter().all(|v| (v - 0.3).abs() < 1e-14));
        }
    }

    #[test]
    fn bilinear_interpolates_linear_ramps_exactly() {
        let img = Image::from_fn(8, 8, |i, j| 2.0 * i as f64 - j as f64);
        assert!((sample_bilinear(&img, 2.25, 3.5) - (4.5 - 3.5)).abs() < 1e-12);
        let u = Image::filled(8, 8, 0.5);
        let v = Image::zeros(8, 8);
        let w = warp(&img, &u, &v);
        assert!((w[(3, 3)] - (7.0 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn gradient_of_ramp() {
        let img = Image::from_fn(6, 5, |i, j| 3.0 * i as f64 + 0.5 * j as f64);
        let (gx, gy) = gradient(&img);
        assert!(gx.as_slice().iter().all(|v| (v - 3.0).abs() < 1e-12));
        assert!(gy.as_slice().iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn pyramid_sizes() {
        let img = Image::zeros(64, 48);
        let p = pyramid(&img, 3, 8);
        let sizes: Vec<_> = p.iter().map(|l| l.shape()).collect();
        assert_eq!(sizes, vec![(64, 48), (32, 24), (16, 12)]);
        assert_eq!(pyramid(&img, 10, 8).len(), 3);
    }
}
