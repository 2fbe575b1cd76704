//! Synthetic ground-truth generators.
//!
//! A rectangle moving at constant velocity sweeps an exact tube through the
//! `(x, y, t)` volume. Turbulence is modelled as per-frame displacement
//! fields made of Gaussian-filtered white noise, white or AR(1) in time.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::detection::MaskVolume;
use crate::error::{Error, Result};
use crate::field::{Image, ScalarVolume, VectorField3, Volume};
use crate::imgproc::{convolve_separable, gaussian_kernel, sample_bilinear, Border};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemporalModel {
    Iid,
    Ar1(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    pub width: usize,
    pub height: usize,
    /// Top-left corner in frame 0, pixels.
    pub start: (f64, f64),
    /// Pixels per frame.
    pub velocity: (f64, f64),
    /// Rendered intensity in `[0, 1]`.
    pub intensity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceSpec {
    /// Per-component displacement standard deviation, pixels.
    pub sigma_w: f64,
    /// Spatial correlation length (Gaussian filter sigma), pixels.
    pub corr_len: f64,
    pub temporal: TemporalModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub target: TargetSpec,
    pub turbulence: TurbulenceSpec,
    /// Smoothing of the background texture, pixels.
    pub background_smoothing: f64,
    /// Optional additive Gaussian noise on rendered frames.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            nx: 64,
            ny: 64,
            nt: 32,
            target: TargetSpec { width: 8, height: 8, start: (12.0, 16.0), velocity: (1.0, 0.5), intensity: 0.95 },
            turbulence: TurbulenceSpec { sigma_w: 1.0, corr_len: 4.0, temporal: TemporalModel::Iid },
            background_smoothing: 4.0,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nt == 0 {
            return Err(Error::Config("synthetic volume must be non-empty".into()));
        }
        let t = &self.target;
        if t.width == 0 || t.height == 0 {
            return Err(Error::Config("target must be non-empty".into()));
        }
        for n in [0, self.nt - 1] {
            let (x, y) = self.target_origin(n);
            if x < 0 || y < 0 || x as usize + t.width > self.nx || y as usize + t.height > self.ny {
                return Err(Error::Config(format!("target leaves the frame at t = {n}")));
            }
        }
        let tb = &self.turbulence;
        if !(tb.sigma_w >= 0.0) || !(tb.corr_len >= 0.0) {
            return Err(Error::Config("turbulence sigma and correlation length must be >= 0".into()));
        }
        if let TemporalModel::Ar1(rho) = tb.temporal {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::Config(format!("AR(1) coefficient must be in [0, 1), got {rho}")));
            }
        }
        if !(self.noise_sigma >= 0.0) || !(self.background_smoothing >= 0.0) {
            return Err(Error::Config("noise and smoothing must be >= 0".into()));
        }
        Ok(())
    }

    /// Continuous top-left corner at frame `n`.
    pub fn target_position(&self, n: usize) -> (f64, f64) {
        let t = &self.target;
        (t.start.0 + t.velocity.0 * n as f64, t.start.1 + t.velocity.1 * n as f64)
    }

    /// Pixel-rasterized top-left corner. Pixel `i` spans `[i, i + 1)` and
    /// belongs to the target when its centre lies inside the rectangle.
    pub fn target_origin(&self, n: usize) -> (i64, i64) {
        let (x, y) = self.target_position(n);
        ((x - 0.5).ceil() as i64, (y - 0.5).ceil() as i64)
    }

    pub fn in_target(&self, i: usize, j: usize, n: usize) -> bool {
        let (x0, y0) = self.target_origin(n);
        let (i, j) = (i as i64, j as i64);
        i >= x0 && i < x0 + self.target.width as i64 && j >= y0 && j < y0 + self.target.height as i64
    }
}

#[derive(Debug, Clone)]
pub struct SynthTruth {
    pub masks: MaskVolume,
    /// Target velocity on the tube; turbulence displacement elsewhere.
    pub flow: VectorField3,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn white_noise(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
    Image::from_fn(w, h, |_, _| StandardNormal.sample(rng))
}

/// Zero-mean, unit-variance spatially correlated noise (periodic filtering).
fn correlated_noise(rng: &mut ChaCha8Rng, w: usize, h: usize, corr_len: f64) -> Image {
    let kernel = gaussian_kernel(corr_len);
    let gain: f64 = kernel.iter().map(|k| k * k).sum::<f64>();
    // Separable filter: variance scales by gain^2.
    let norm = 1.0 / gain;
    convolve_separable(&white_noise(rng, w, h), &kernel, Border::Periodic).map(|v| v * norm)
}

/// Per-frame turbulence displacements `(wx, wy)`, each of std `sigma_w`.
pub fn turbulence_fields(spec: &SynthSpec) -> Result<VectorField3> {
    spec.validate()?;
    let (nx, ny, nt) = (spec.nx, spec.ny, spec.nt);
    let tb = spec.turbulence;
    let mut rng = rng_for(spec.seed, 1);
    let mut out = VectorField3::zeros(nx, ny, nt);
    if tb.sigma_w == 0.0 {
        return Ok(out);
    }
    let mut prev: Option<(Image, Image)> = None;
    for n in 0..nt {
        let ex = correlated_noise(&mut rng, nx, ny, tb.corr_len);
        let ey = correlated_noise(&mut rng, nx, ny, tb.corr_len);
        let (wx, wy) = match (tb.temporal, prev) {
            (TemporalModel::Ar1(rho), Some((px, py))) => {
                let c = (1.0 - rho * rho).sqrt();
                let mix = |p: &Image, e: &Image| {
                    Image::from_vec(
                        nx,
                        ny,
                        p.as_slice().iter().zip(e.as_slice()).map(|(a, b)| rho * a + c * b).collect(),
                    )
                    .expect("same shape")
                };
                (mix(&px, &ex), mix(&py, &ey))
            }
            _ => (ex, ey),
        };
        out.v1.set_frame(n, &wx.map(|v| v * tb.sigma_w));
        out.v2.set_frame(n, &wy.map(|v| v * tb.sigma_w));
        prev = Some((wx, wy));
    }
    Ok(out)
}

fn target_masks(spec: &SynthSpec) -> MaskVolume {
    Volume::from_fn(spec.nx, spec.ny, spec.nt, |i, j, n| spec.in_target(i, j, n))
}

fn truth(spec: &SynthSpec, turbulence: &VectorField3) -> SynthTruth {
    let masks = target_masks(spec);
    let (vx, vy) = spec.target.velocity;
    let mut flow = turbulence.clone();
    for (k, &m) in masks.as_slice().iter().enumerate() {
        if m {
            flow.v1.as_mut_slice()[k] = vx;
            flow.v2.as_mut_slice()[k] = vy;
        }
    }
    SynthTruth { masks, flow }
}

/// Directly synthesized flow volume: target velocity on the tube and
/// turbulence elsewhere.
pub fn synth_vector_field(spec: &SynthSpec) -> Result<(VectorField3, SynthTruth)> {
    let turbulence = turbulence_fields(spec)?;
    let t = truth(spec, &turbulence);
    Ok((t.flow.clone(), t))
}

/// Background texture in roughly `[0.2, 0.8]`.
pub fn background(spec: &SynthSpec) -> Image {
    let mut rng = rng_for(spec.seed, 2);
    let tex = correlated_noise(&mut rng, spec.nx, spec.ny, spec.background_smoothing);
    tex.map(|v| (0.5 + 0.1 * v).clamp(0.0, 1.0))
}

fn coverage(lo: f64, len: f64, pixel: usize) -> f64 {
    let a = lo.max(pixel as f64);
    let b = (lo + len).min(pixel as f64 + 1.0);
    (b - a).max(0.0)
}

/// Background with the target composited at its continuous position.
pub fn clean_frame(spec: &SynthSpec, bg: &Image, n: usize) -> Image {
    let (px, py) = spec.target_position(n);
    let t = &spec.target;
    Image::from_fn(spec.nx, spec.ny, |i, j| {
        let c = coverage(px, t.width as f64, i) * coverage(py, t.height as f64, j);
        (1.0 - c) * bg[(i, j)] + c * t.intensity
    })
}

/// Rendered sequence: each clean frame is resampled at `p + w_n(p)`.
pub fn synth_turbulent_sequence(spec: &SynthSpec) -> Result<(ScalarVolume, SynthTruth)> {
    let turbulence = turbulence_fields(spec)?;
    let bg = background(spec);
    let mut noise_rng = rng_for(spec.seed, 3);
    let mut frames = ScalarVolume::zeros(spec.nx, spec.ny, spec.nt);
    for n in 0..spec.nt {
        let clean = clean_frame(spec, &bg, n);
        let warped = Image::from_fn(spec.nx, spec.ny, |i, j| {
            let v = sample_bilinear(&clean, i as f64 + turbulence.v1[(i, j, n)], j as f64 + turbulence.v2[(i, j, n)]);
            if spec.noise_sigma > 0.0 {
                let e: f64 = StandardNormal.sample(&mut noise_rng);
                (v + spec.noise_sigma * e).clamp(0.0, 1.0)
            } else {
                v
            }
        });
        frames.set_frame(n, &warped);
    }
    Ok((frames, truth(spec, &turbulence)))
}
