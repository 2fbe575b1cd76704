//! Separable orthogonal 3D wavelet transform with periodic boundaries.
//!
//! The filter is the 8-tap Daubechies pair (4 vanishing moments). Complex
//! input is handled by applying the real filter bank to the real and
//! imaginary parts at once, which is the same as transforming them
//! independently.
//!
//! Coefficients use the usual in-place (Mallat) layout: after `J` levels
//! the approximation occupies the corner block `[0, nx/2^J) x [0, ny/2^J) x
//! [0, nt/2^J)`, and the seven detail subbands of level `l` fill the rest
//! of the `[0, nx/2^(l-1)) x ...` block.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexVolume;

/// Daubechies-4 analysis low-pass filter.
pub const DB4_LOWPASS: [f64; 8] = [
    0.230_377_813_308_896_5,
    0.714_846_570_552_915_6,
    0.630_880_767_929_858_9,
    -0.027_983_769_416_859_854,
    -0.187_034_811_719_093_08,
    0.030_841_381_835_560_764,
    0.032_883_011_666_885_2,
    -0.010_597_401_785_069_032,
];

fn highpass() -> [f64; 8] {
    let mut g = [0.0; 8];
    for (n, v) in g.iter_mut().enumerate() {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        *v = s * DB4_LOWPASS[7 - n];
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    Periodic,
}

/// Subband of one decomposition level; bit `a` set means the high-pass
/// branch was taken along axis `a` (0 = x, 1 = y, 2 = t).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subband(pub u8);

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoeffs {
    levels: usize,
    boundary: BoundaryMode,
    data: ComplexVolume,
}

impl WaveletCoeffs {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    /// All coefficients in the in-place layout.
    pub fn data(&self) -> &ComplexVolume {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut ComplexVolume {
        &mut self.data
    }

    pub fn map(&self, f: impl FnMut(&Complex64) -> Complex64) -> Self {
        WaveletCoeffs { levels: self.levels, boundary: self.boundary, data: self.data.map(f) }
    }

    /// Index ranges of a detail subband at decomposition level `level`
    /// (1 = finest).
    pub fn detail_block(&self, level: usize, band: Subband) -> [Range<usize>; 3] {
        assert!((1..=self.levels).contains(&level) && (1..8).contains(&band.0));
        let (nx, ny, nt) = self.data.shape();
        let half = [nx >> level, ny >> level, nt >> level];
        std::array::from_fn(|a| if band.0 & (1 << a) != 0 { half[a]..2 * half[a] } else { 0..half[a] })
    }

    pub fn approx_block(&self) -> [Range<usize>; 3] {
        let (nx, ny, nt) = self.data.shape();
        [0..nx >> self.levels, 0..ny >> self.levels, 0..nt >> self.levels]
    }

    /// Coefficients grouped by scale index, coarsest first. Group 0 holds the
    /// approximation and the coarsest details; group `levels - 1` holds the
    /// finest details.
    pub fn by_scale(&self) -> Vec<Vec<Complex64>> {
        let mut groups = vec![Vec::new(); self.levels];
        let collect = |block: [Range<usize>; 3], out: &mut Vec<Complex64>| {
            for n in block[2].clone() {
                for j in block[1].clone() {
                    for i in block[0].clone() {
                        out.push(self.data[(i, j, n)]);
                    }
                }
            }
        };
        collect(self.approx_block(), &mut groups[0]);
        for level in 1..=self.levels {
            let scale = self.levels - level;
            for b in 1..8 {
                collect(self.detail_block(level, Subband(b)), &mut groups[scale]);
            }
        }
        groups
    }
}

fn check_dims(shape: (usize, usize, usize), levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::Config("wavelet levels must be at least 1".into()));
    }
    let step = 1usize << levels;
    let (nx, ny, nt) = shape;
    if nx % step != 0 || ny % step != 0 || nt % step != 0 {
        return Err(Error::Config(format!("volume {nx}x{ny}x{nt} is not divisible by 2^{levels}; pad it first")));
    }
    Ok(())
}

fn analyze_line(line: &mut [Complex64], tmp: &mut [Complex64], g: &[f64; 8]) {
    let n = line.len();
    let half = n / 2;
    for k in 0..half {
        let mut a = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for (t, (&hl, &hh)) in DB4_LOWPASS.iter().zip(g).enumerate() {
            let x = line[(2 * k + t) % n];
            a += x * hl;
            d += x * hh;
        }
        tmp[k] = a;
        tmp[half + k] = d;
    }
    line.copy_from_slice(&tmp[..n]);
}

fn synthesize_line(line: &mut [Complex64], tmp: &mut [Complex64], g: &[f64; 8]) {
    let n = line.len();
    let half = n / 2;
    tmp[..n].fill(Complex64::new(0.0, 0.0));
    for k in 0..half {
        let a = line[k];
        let d = line[half + k];
        for (t, (&hl, &hh)) in DB4_LOWPASS.iter().zip(g).enumerate() {
            tmp[(2 * k + t) % n] += a * hl + d * hh;
        }
    }
    line.copy_from_slice(&tmp[..n]);
}

/// Applies `op` to every line along `axis` inside the corner block `ext`.
fn for_each_line(
    vol: &mut ComplexVolume,
    ext: [usize; 3],
    axis: usize,
    mut op: impl FnMut(&mut [Complex64], &mut [Complex64]),
) {
    let len = ext[axis];
    let mut line = vec![Complex64::new(0.0, 0.0); len];
    let mut tmp = vec![Complex64::new(0.0, 0.0); len];
    let (oa, ob) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    for q in 0..ext[ob] {
        for p in 0..ext[oa] {
            let at = |s: usize| {
                let mut c = [0usize; 3];
                c[axis] = s;
                c[oa] = p;
                c[ob] = q;
                (c[0], c[1], c[2])
            };
            for (s, v) in line.iter_mut().enumerate() {
                *v = vol[at(s)];
            }
            op(&mut line, &mut tmp);
            for (s, v) in line.iter().enumerate() {
                vol[at(s)] = *v;
            }
        }
    }
}

pub fn wavelet_forward3(c: &ComplexVolume, levels: usize) -> Result<WaveletCoeffs> {
    check_dims(c.shape(), levels)?;
    let g = highpass();
    let mut data = c.clone();
    let (nx, ny, nt) = c.shape();
    for level in 0..levels {
        let ext = [nx >> level, ny >> level, nt >> level];
        for axis in 0..3 {
            for_each_line(&mut data, ext, axis, |line, tmp| analyze_line(line, tmp, &g));
        }
    }
    Ok(WaveletCoeffs { levels, boundary: BoundaryMode::Periodic, data })
}

pub fn wavelet_inverse3(k: &WaveletCoeffs) -> Result<ComplexVolume> {
    check_dims(k.data.shape(), k.levels)?;
    let g = highpass();
    let mut data = k.data.clone();
    let (nx, ny, nt) = data.shape();
    for level in (0..k.levels).rev() {
        let ext = [nx >> level, ny >> level, nt >> level];
        for axis in (0..3).rev() {
            for_each_line(&mut data, ext, axis, |line, tmp| synthesize_line(line, tmp, &g));
        }
    }
    Ok(data)
}
