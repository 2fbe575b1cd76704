//! 3D curvelet tight frame built in the frequency domain.
//!
//! Frequencies are normalized per axis to `[-1, 1)`. Scales come from a
//! tensor Meyer low-pass `Phi_j(w) = prod_a phi(2^(J-1-j) w_a)`: the coarse
//! window is `Phi_0`, band `j` is `sqrt(Phi_j^2 - Phi_(j-1)^2)` and the
//! finest band completes the sum to one. Angular bands are split over the
//! six faces of the frequency cube; on the face with dominant axis `d` the
//! two slopes `w_a / |w_d|` are cut into `L x L` cells, each with a smooth
//! bump that reaches into its neighbours. The bumps are normalized by the
//! root of their sum of squares, so the squared windows of every scale add
//! up to its radial window squared and the whole system is a partition of
//! unity.
//!
//! Each wedge is wrapped into its axis-aligned frequency bounding box and
//! brought back to space with a box-sized inverse FFT. Because the box holds
//! the support without overlap the frame is tight, and synthesis is the
//! exact adjoint of analysis.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fft::{signed_freq, Fft3};
use crate::field::ComplexVolume;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveletConfig {
    pub num_scales: usize,
    /// Angular sectors along any great circle through four cube faces at
    /// the coarsest angular scale. Must be a positive multiple of 8.
    pub wedges_coarsest: usize,
    /// Split the finest scale into wedges instead of keeping it isotropic.
    pub finest_angular: bool,
}

impl Default for CurveletConfig {
    fn default() -> Self {
        CurveletConfig { num_scales: 3, wedges_coarsest: 8, finest_angular: false }
    }
}

/// Orientation of an angular wedge: face of the frequency cube and slope cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WedgeOrientation {
    pub axis: usize,
    pub positive: bool,
    pub cell: (usize, usize),
}

#[derive(Debug, Clone)]
struct Wedge {
    scale: usize,
    orientation: Option<WedgeOrientation>,
    dims: [usize; 3],
    fft: Fft3,
    /// Full-grid index, wrapped box index and window value of every support sample.
    support: Vec<(u32, u32, f64)>,
}

impl Wedge {
    fn box_len(&self) -> usize {
        self.dims.iter().product()
    }
}

#[derive(Debug, Clone)]
pub struct CurveletSystem {
    shape: (usize, usize, usize),
    config: CurveletConfig,
    wedges_per_scale: Vec<usize>,
    wedges: Vec<Wedge>,
    fft: Fft3,
}

/// Coefficients of one wedge on its decimated grid (x fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeCoeffs {
    pub scale: usize,
    pub dims: [usize; 3],
    pub data: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveletCoeffs {
    shape: (usize, usize, usize),
    wedges: Vec<WedgeCoeffs>,
}

impl CurveletCoeffs {
    pub fn wedges(&self) -> &[WedgeCoeffs] {
        &self.wedges
    }

    pub fn wedges_mut(&mut self) -> &mut [WedgeCoeffs] {
        &mut self.wedges
    }

    pub fn num_coeffs(&self) -> usize {
        self.wedges.iter().map(|w| w.data.len()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.wedges.iter().flat_map(|w| &w.data).map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn map(&self, mut f: impl FnMut(&Complex64) -> Complex64) -> Self {
        CurveletCoeffs {
            shape: self.shape,
            wedges: self
                .wedges
                .iter()
                .map(|w| WedgeCoeffs { scale: w.scale, dims: w.dims, data: w.data.iter().map(&mut f).collect() })
                .collect(),
        }
    }

    /// Coefficients grouped by scale, coarsest first.
    pub fn by_scale(&self) -> Vec<Vec<Complex64>> {
        let scales = self.wedges.iter().map(|w| w.scale + 1).max().unwrap_or(0);
        let mut groups = vec![Vec::new(); scales];
        for w in &self.wedges {
            groups[w.scale].extend_from_slice(&w.data);
        }
        groups
    }
}

/// Meyer auxiliary polynomial, 0 at 0 and 1 at 1.
fn meyer_nu(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3))
}

/// 1D low-pass: one on `|t| <= 1/2`, zero from `|t| >= 1`.
fn lowpass_1d(t: f64) -> f64 {
    let a = t.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        (FRAC_PI_2 * meyer_nu(2.0 * a - 1.0)).cos()
    }
}

/// Angular bump, positive on `|t| < 1`.
fn bump(t: f64) -> f64 {
    let a = t.abs();
    if a >= 1.0 {
        0.0
    } else {
        (FRAC_PI_2 * meyer_nu(a)).cos()
    }
}

impl CurveletSystem {
    pub fn new(nx: usize, ny: usize, nt: usize, config: CurveletConfig) -> Result<Self> {
        let j = config.num_scales;
        if j < 2 {
            return Err(Error::Config(format!("curvelets need at least 2 scales, got {j}")));
        }
        if config.wedges_coarsest == 0 || !config.wedges_coarsest.is_multiple_of(8) {
            return Err(Error::Config(format!(
                "wedges_coarsest must be a positive multiple of 8, got {}",
                config.wedges_coarsest
            )));
        }
        let min_side = 1usize.checked_shl(j as u32 + 2).filter(|&m| m > 0).unwrap_or(usize::MAX);
        if nx.min(ny).min(nt) < min_side {
            return Err(Error::Config(format!(
                "volume {nx}x{ny}x{nt} too small for {j} curvelet scales (need every side >= {min_side})"
            )));
        }

        let dims = [nx, ny, nt];
        let mut planner = FftPlanner::new();
        let fft = Fft3::new(&mut planner, dims);

        // Per-scale sample lists: (full index, signed frequency, window, wedge slot).
        let mut wedges_per_scale = Vec::with_capacity(j);
        let mut orientations: Vec<(usize, Option<WedgeOrientation>)> = Vec::new();
        for scale in 0..j {
            let per_side = Self::cells_per_side(&config, scale);
            match per_side {
                None => {
                    wedges_per_scale.push(1);
                    orientations.push((scale, None));
                }
                Some(l) => {
                    wedges_per_scale.push(6 * l * l);
                    for axis in 0..3 {
                        for positive in [true, false] {
                            for p in 0..l {
                                for q in 0..l {
                                    orientations.push((scale, Some(WedgeOrientation { axis, positive, cell: (p, q) })));
                                }
                            }
                        }
                    }
                }
            }
        }
        let offsets: Vec<usize> = wedges_per_scale
            .iter()
            .scan(0, |acc, &n| {
                let o = *acc;
                *acc += n;
                Some(o)
            })
            .collect();

        let mut samples: Vec<Vec<(usize, [i64; 3], f64)>> = vec![Vec::new(); orientations.len()];
        let mut angular = Vec::new();
        for k2 in 0..nt {
            for k1 in 0..ny {
                for k0 in 0..nx {
                    let freq = [signed_freq(k0, nx), signed_freq(k1, ny), signed_freq(k2, nt)];
                    let w = [
                        2.0 * freq[0] as f64 / nx as f64,
                        2.0 * freq[1] as f64 / ny as f64,
                        2.0 * freq[2] as f64 / nt as f64,
                    ];
                    let g = k0 + nx * (k1 + ny * k2);
                    let lows: Vec<f64> = (0..j).map(|s| Self::lowpass(j, s, &w)).collect();
                    for scale in 0..j {
                        let radial = if scale == 0 {
                            lows[0]
                        } else {
                            (lows[scale] * lows[scale] - lows[scale - 1] * lows[scale - 1]).max(0.0).sqrt()
                        };
                        if radial <= 0.0 {
                            continue;
                        }
                        let base = offsets[scale];
                        match Self::cells_per_side(&config, scale) {
                            None => samples[base].push((g, freq, radial)),
                            Some(l) => {
                                Self::angular_weights(&w, l, &mut angular);
                                let norm = angular.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
                                debug_assert!(norm > 0.0);
                                for &(slot, v) in &angular {
                                    samples[base + slot].push((g, freq, radial * v / norm));
                                }
                            }
                        }
                    }
                }
            }
        }

        let mut wedges = Vec::with_capacity(orientations.len());
        for ((scale, orientation), pts) in orientations.into_iter().zip(samples) {
            let mut lo = [i64::MAX; 3];
            let mut hi = [i64::MIN; 3];
            for (_, f, _) in &pts {
                for a in 0..3 {
                    lo[a] = lo[a].min(f[a]);
                    hi[a] = hi[a].max(f[a]);
                }
            }
            if pts.is_empty() {
                lo = [0; 3];
                hi = [0; 3];
            }
            let wdims: [usize; 3] = std::array::from_fn(|a| (hi[a] - lo[a] + 1) as usize);
            let support = pts
                .into_iter()
                .map(|(g, f, v)| {
                    let s0 = f[0].rem_euclid(wdims[0] as i64) as usize;
                    let s1 = f[1].rem_euclid(wdims[1] as i64) as usize;
                    let s2 = f[2].rem_euclid(wdims[2] as i64) as usize;
                    (g as u32, (s0 + wdims[0] * (s1 + wdims[1] * s2)) as u32, v)
                })
                .collect();
            wedges.push(Wedge { scale, orientation, dims: wdims, fft: Fft3::new(&mut planner, wdims), support });
        }

        Ok(CurveletSystem { shape: (nx, ny, nt), config, wedges_per_scale, wedges, fft })
    }

    fn cells_per_side(config: &CurveletConfig, scale: usize) -> Option<usize> {
        let finest = scale + 1 == config.num_scales;
        if scale == 0 || (finest && !config.finest_angular) {
            None
        } else {
            Some(config.wedges_coarsest / 4 * (1 << ((scale - 1) / 2)))
        }
    }

    fn lowpass(num_scales: usize, scale: usize, w: &[f64; 3]) -> f64 {
        if scale + 1 >= num_scales {
            return 1.0;
        }
        let f = (1u64 << (num_scales - 1 - scale)) as f64;
        w.iter().map(|&x| lowpass_1d(f * x)).product()
    }

    /// Unnormalized angular weights of every wedge touching `w`, as
    /// `(slot within scale, weight)`.
    fn angular_weights(w: &[f64; 3], l: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let h = 2.0 / l as f64;
        for axis in 0..3 {
            let d = w[axis];
            if d == 0.0 {
                continue;
            }
            let positive = d > 0.0;
            let (a, b) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let sa = w[a] / d.abs();
            let sb = w[b] / d.abs();
            if sa.abs() >= 1.0 + h || sb.abs() >= 1.0 + h {
                continue;
            }
            let face = 2 * axis + usize::from(!positive);
            for p in 0..l {
                let ba = bump((sa - (-1.0 + (p as f64 + 0.5) * h)) / h);
                if ba == 0.0 {
                    continue;
                }
                for q in 0..l {
                    let bb = bump((sb - (-1.0 + (q as f64 + 0.5) * h)) / h);
                    if bb > 0.0 {
                        out.push((face * l * l + p * l + q, ba * bb));
                    }
                }
            }
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.shape
    }

    pub fn config(&self) -> &CurveletConfig {
        &self.config
    }

    pub fn num_scales(&self) -> usize {
        self.config.num_scales
    }

    pub fn wedges_per_scale(&self) -> &[usize] {
        &self.wedges_per_scale
    }

    pub fn num_wedges(&self) -> usize {
        self.wedges.len()
    }

    pub fn wedge_scale(&self, w: usize) -> usize {
        self.wedges[w].scale
    }

    pub fn wedge_orientation(&self, w: usize) -> Option<WedgeOrientation> {
        self.wedges[w].orientation
    }

    pub fn wedge_dims(&self, w: usize) -> [usize; 3] {
        self.wedges[w].dims
    }

    /// Total number of coefficients across all wedges.
    pub fn coeff_count(&self) -> usize {
        self.wedges.iter().map(Wedge::box_len).sum()
    }

    /// Window of wedge `w` on the full frequency grid.
    pub fn window(&self, w: usize) -> Vec<f64> {
        let (nx, ny, nt) = self.shape;
        let mut out = vec![0.0; nx * ny * nt];
        for &(g, _, v) in &self.wedges[w].support {
            out[g as usize] = v;
        }
        out
    }

    /// Sum of squared windows at every frequency sample.
    pub fn window_energy(&self) -> Vec<f64> {
        let (nx, ny, nt) = self.shape;
        let mut out = vec![0.0; nx * ny * nt];
        for wedge in &self.wedges {
            for &(g, _, v) in &wedge.support {
                out[g as usize] += v * v;
            }
        }
        out
    }

    fn check_coeffs(&self, k: &CurveletCoeffs) -> Result<()> {
        let ok = k.shape == self.shape
            && k.wedges.len() == self.wedges.len()
            && k.wedges
                .iter()
                .zip(&self.wedges)
                .all(|(c, w)| c.dims == w.dims && c.scale == w.scale && c.data.len() == w.box_len());
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension("curvelet coefficients do not match the system".into()))
        }
    }

    pub fn forward(&self, c: &ComplexVolume) -> Result<CurveletCoeffs> {
        if c.shape() != self.shape {
            return Err(Error::Dimension(format!("volume {:?} vs curvelet system {:?}", c.shape(), self.shape)));
        }
        let mut spectrum = c.as_slice().to_vec();
        self.fft.forward(&mut spectrum);
        let n_total = spectrum.len() as f64;
        let wedges = self
            .wedges
            .par_iter()
            .map(|w| {
                let len = w.box_len();
                let mut buf = vec![Complex64::new(0.0, 0.0); len];
                for &(g, s, v) in &w.support {
                    buf[s as usize] = spectrum[g as usize] * v;
                }
                w.fft.inverse(&mut buf);
                let scale = 1.0 / (len as f64 * n_total).sqrt();
                for z in &mut buf {
                    *z *= scale;
                }
                WedgeCoeffs { scale: w.scale, dims: w.dims, data: buf }
            })
            .collect();
        Ok(CurveletCoeffs { shape: self.shape, wedges })
    }

    /// Adjoint synthesis, which is the inverse on the frame's range.
    pub fn inverse(&self, k: &CurveletCoeffs) -> Result<ComplexVolume> {
        self.check_coeffs(k)?;
        let (nx, ny, nt) = self.shape;
        let n_total = (nx * ny * nt) as f64;
        let parts: Vec<Vec<Complex64>> = self
            .wedges
            .par_iter()
            .zip(&k.wedges)
            .map(|(w, c)| {
                let mut buf = c.data.clone();
                w.fft.forward(&mut buf);
                let scale = 1.0 / (w.box_len() as f64 * n_total).sqrt();
                w.support.iter().map(|&(_, s, v)| buf[s as usize] * (v * scale)).collect()
            })
            .collect();
        let mut spectrum = vec![Complex64::new(0.0, 0.0); nx * ny * nt];
        for (w, part) in self.wedges.iter().zip(parts) {
            for (&(g, _, _), z) in w.support.iter().zip(part) {
                spectrum[g as usize] += z;
            }
        }
        self.fft.inverse(&mut spectrum);
        ComplexVolume::from_vec(nx, ny, nt, spectrum)
    }

    /// Coefficient structure with every value zero.
    pub fn zero_coeffs(&self) -> CurveletCoeffs {
        CurveletCoeffs {
            shape: self.shape,
            wedges: self
                .wedges
                .iter()
                .map(|w| WedgeCoeffs {
                    scale: w.scale,
                    dims: w.dims,
                    data: vec![Complex64::new(0.0, 0.0); w.box_len()],
                })
                .collect(),
        }
    }
}

pub fn build_curvelet_system(
    nx: usize,
    ny: usize,
    nt: usize,
    num_scales: usize,
    wedges_coarsest: usize,
) -> Result<CurveletSystem> {
    CurveletSystem::new(nx, ny, nt, CurveletConfig { num_scales, wedges_coarsest, finest_angular: false })
}

pub fn curvelet_forward(c: &ComplexVolume, sys: &CurveletSystem) -> Result<CurveletCoeffs> {
    sys.forward(c)
}

pub fn curvelet_inverse(k: &CurveletCoeffs, sys: &CurveletSystem) -> Result<ComplexVolume> {
    sys.inverse(k)
}
