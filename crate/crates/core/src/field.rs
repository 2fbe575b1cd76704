//! Volume and vector-field data model.
//!
//! Every 3D grid in the crate uses the same row-major layout: `x` varies
//! fastest, then `y`, then `t`, so the linear index of `(i, j, n)` is
//! `i + nx * (j + ny * n)`. 2D grids follow the same rule with `(i, j)`.
//! Transforms, estimators and file IO all rely on this layout.
//!
//! Displacements are in pixels per frame. A vector `(v1, v2)` stored at
//! `(i, j, n)` moves pixel `(i, j)` of frame `n` to `(i + v1, j + v2)` in
//! frame `n + 1`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A dense 3D grid `(x, y, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume<T> {
    nx: usize,
    ny: usize,
    nt: usize,
    data: Vec<T>,
}

pub type ScalarVolume = Volume<f64>;
pub type ComplexVolume = Volume<Complex64>;

impl<T: Clone> Volume<T> {
    pub fn filled(nx: usize, ny: usize, nt: usize, value: T) -> Self {
        Volume { nx, ny, nt, data: vec![value; nx * ny * nt] }
    }

    pub fn from_fn(nx: usize, ny: usize, nt: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nx * ny * nt);
        for n in 0..nt {
            for j in 0..ny {
                for i in 0..nx {
                    data.push(f(i, j, n));
                }
            }
        }
        Volume { nx, ny, nt, data }
    }

    /// Stacks equally sized frames along `t`.
    pub fn from_frames(frames: &[Grid2<T>]) -> Result<Self> {
        let first = frames.first().ok_or_else(|| Error::Dimension("cannot stack zero frames".into()))?;
        let (nx, ny) = first.shape();
        let mut data = Vec::with_capacity(nx * ny * frames.len());
        for (n, f) in frames.iter().enumerate() {
            if f.shape() != (nx, ny) {
                return Err(Error::Dimension(format!("frame {n} is {}x{}, expected {nx}x{ny}", f.width(), f.height())));
            }
            data.extend_from_slice(f.as_slice());
        }
        Ok(Volume { nx, ny, nt: frames.len(), data })
    }

    /// Frame `n` as a 2D grid.
    pub fn frame(&self, n: usize) -> Grid2<T> {
        let len = self.nx * self.ny;
        Grid2::from_vec(self.nx, self.ny, self.data[n * len..(n + 1) * len].to_vec()).expect("frame length matches")
    }

    pub fn set_frame(&mut self, n: usize, frame: &Grid2<T>) {
        assert_eq!(frame.shape(), (self.nx, self.ny), "frame shape");
        let len = self.nx * self.ny;
        self.data[n * len..(n + 1) * len].clone_from_slice(frame.as_slice());
    }

    /// The `x`–`t` plane at row `y`; entry `(i, n)` of the result is `v(i, y, n)`.
    pub fn slice_xt(&self, y: usize) -> Result<Grid2<T>> {
        if y >= self.ny {
            return Err(Error::Dimension(format!("row {y} out of range (ny = {})", self.ny)));
        }
        let mut out = Vec::with_capacity(self.nx * self.nt);
        for n in 0..self.nt {
            let start = self.idx(0, y, n);
            out.extend_from_slice(&self.data[start..start + self.nx]);
        }
        Grid2::from_vec(self.nx, self.nt, out)
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Volume<U> {
        Volume { nx: self.nx, ny: self.ny, nt: self.nt, data: self.data.iter().map(f).collect() }
    }
}

impl<T> Volume<T> {
    pub fn from_vec(nx: usize, ny: usize, nt: usize, data: Vec<T>) -> Result<Self> {
        if nx == 0 || ny == 0 || nt == 0 {
            return Err(Error::Dimension(format!("empty volume {nx}x{ny}x{nt}")));
        }
        if data.len() != nx * ny * nt {
            return Err(Error::Dimension(format!("data length {} does not match {nx}x{ny}x{nt}", data.len())));
        }
        Ok(Volume { nx, ny, nt, data })
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nt)
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn nt(&self) -> usize {
        self.nt
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, n: usize) -> usize {
        i + self.nx * (j + self.ny * n)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub(crate) fn check_same_shape<U>(&self, other: &Volume<U>, what: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!("{what}: {:?} vs {:?}", self.shape(), other.shape())));
        }
        Ok(())
    }
}

impl<T> Index<(usize, usize, usize)> for Volume<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j, n): (usize, usize, usize)) -> &T {
        &self.data[self.idx(i, j, n)]
    }
}

impl<T> IndexMut<(usize, usize, usize)> for Volume<T> {
    #[inline]
    fn index_mut(&mut self, (i, j, n): (usize, usize, usize)) -> &mut T {
        let k = self.idx(i, j, n);
        &mut self.data[k]
    }
}

impl ScalarVolume {
    pub fn zeros(nx: usize, ny: usize, nt: usize) -> Self {
        Self::filled(nx, ny, nt, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl ComplexVolume {
    pub fn zeros(nx: usize, ny: usize, nt: usize) -> Self {
        Self::filled(nx, ny, nt, Complex64::new(0.0, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Unnormalized discrete L2 norm.
    pub fn norm_l2(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|z| z * a)
    }
}

fn zip_with<T: Copy>(a: &Volume<T>, b: &Volume<T>, f: impl Fn(T, T) -> T) -> Volume<T> {
    assert_eq!(a.shape(), b.shape(), "volume shapes differ");
    Volume { nx: a.nx, ny: a.ny, nt: a.nt, data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect() }
}

impl<T: Copy + Add<Output = T>> Add for &Volume<T> {
    type Output = Volume<T>;
    fn add(self, rhs: Self) -> Volume<T> {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl<T: Copy + Sub<Output = T>> Sub for &Volume<T> {
    type Output = Volume<T>;
    fn sub(self, rhs: Self) -> Volume<T> {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Mul<f64> for &ScalarVolume {
    type Output = ScalarVolume;
    fn mul(self, rhs: f64) -> ScalarVolume {
        self.map(|v| v * rhs)
    }
}

/// A dense 2D grid, `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

pub type Image = Grid2<f64>;

impl<T: Clone> Grid2<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Grid2 { width, height, data: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                data.push(f(i, j));
            }
        }
        Grid2 { width, height, data }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid2<U> {
        Grid2 { width: self.width, height: self.height, data: self.data.iter().map(f).collect() }
    }
}

impl<T> Grid2<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Dimension(format!("data length {} does not match {width}x{height}", data.len())));
        }
        Ok(Grid2 { width, height, data })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i + self.width * j
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }
}

impl<T> Index<(usize, usize)> for Grid2<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i + self.width * j]
    }
}

impl<T> IndexMut<(usize, usize)> for Grid2<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i + self.width * j]
    }
}

impl Image {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len().max(1) as f64
    }
}

/// Per-pixel, per-frame displacement field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    pub v1: ScalarVolume,
    pub v2: ScalarVolume,
}

impl VectorField3 {
    pub fn new(v1: ScalarVolume, v2: ScalarVolume) -> Result<Self> {
        v1.check_same_shape(&v2, "vector field components")?;
        Ok(VectorField3 { v1, v2 })
    }

    pub fn zeros(nx: usize, ny: usize, nt: usize) -> Self {
        VectorField3 { v1: ScalarVolume::zeros(nx, ny, nt), v2: ScalarVolume::zeros(nx, ny, nt) }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.v1.shape()
    }

    /// Time slot `n` as a 2D flow.
    pub fn slot(&self, n: usize) -> Flow2 {
        Flow2 { u: self.v1.frame(n), v: self.v2.frame(n) }
    }

    pub fn set_slot(&mut self, n: usize, flow: &Flow2) {
        self.v1.set_frame(n, &flow.u);
        self.v2.set_frame(n, &flow.v);
    }

    pub fn from_slots(slots: &[Flow2]) -> Result<Self> {
        let u: Vec<_> = slots.iter().map(|f| f.u.clone()).collect();
        let v: Vec<_> = slots.iter().map(|f| f.v.clone()).collect();
        VectorField3::new(Volume::from_frames(&u)?, Volume::from_frames(&v)?)
    }
}

/// A single-frame displacement field.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow2 {
    pub u: Image,
    pub v: Image,
}

impl Flow2 {
    pub fn zeros(width: usize, height: usize) -> Self {
        Flow2 { u: Image::zeros(width, height), v: Image::zeros(width, height) }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.u.shape()
    }

    pub fn max_abs(&self) -> f64 {
        self.u.as_slice().iter().chain(self.v.as_slice()).fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Embeds `(v1, v2)` as `v1 + i v2`.
pub fn to_complex(f: &VectorField3) -> Result<ComplexVolume> {
    f.v1.check_same_shape(&f.v2, "to_complex")?;
    let data = f.v1.as_slice().iter().zip(f.v2.as_slice()).map(|(&a, &b)| Complex64::new(a, b)).collect();
    Volume::from_vec(f.v1.nx, f.v1.ny, f.v1.nt, data)
}

pub fn from_complex(c: &ComplexVolume) -> VectorField3 {
    VectorField3 { v1: c.map(|z| z.re), v2: c.map(|z| z.im) }
}

pub fn magnitude(f: &VectorField3) -> ScalarVolume {
    zip_with(&f.v1, &f.v2, |a, b| a.hypot(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(seed: u64, nx: usize, ny: usize, nt: usize) -> VectorField3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v1 = ScalarVolume::from_fn(nx, ny, nt, |_, _, _| rng.random_range(-5.0..5.0));
        let v2 = ScalarVolume::from_fn(nx, ny, nt, |_, _, _| rng.random_range(-5.0..5.0));
        VectorField3::new(v1, v2).unwrap()
    }

    #[test]
    fn complex_embedding_axis_cases() {
        let zero = VectorField3::zeros(3, 2, 2);
        assert!(to_complex(&zero).unwrap().as_slice().iter().all(|z| *z == Complex64::new(0.0, 0.0)));

        let f = VectorField3::new(ScalarVolume::filled(3, 2, 2, 1.0), ScalarVolume::zeros(3, 2, 2)).unwrap();
        assert!(to_complex(&f).unwrap().as_slice().iter().all(|z| *z == Complex64::new(1.0, 0.0)));

        let c = ComplexVolume::filled(2, 2, 2, Complex64::new(2.0, 3.0));
        let back = from_complex(&c);
        assert!(back.v1.as_slice().iter().all(|&v| v == 2.0));
        assert!(back.v2.as_slice().iter().all(|&v| v == 3.0));
        assert_eq!(from_complex(&ComplexVolume::zeros(2, 2, 2)), VectorField3::zeros(2, 2, 2));
    }

    #[test]
    fn embedding_is_exact_bijection() {
        let f = random_field(7, 5, 4, 3);
        let c = to_complex(&f).unwrap();
        assert_eq!(from_complex(&c), f);
        assert_eq!(to_complex(&from_complex(&c)).unwrap(), c);
        assert_eq!(magnitude(&f), magnitude(&from_complex(&c)));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let bad = VectorField3 { v1: ScalarVolume::zeros(2, 2, 2), v2: ScalarVolume::zeros(2, 2, 3) };
        assert!(matches!(to_complex(&bad), Err(Error::Dimension(_))));
        assert!(VectorField3::new(ScalarVolume::zeros(2, 2, 2), ScalarVolume::zeros(3, 2, 2)).is_err());
    }

    #[test]
    fn magnitude_cases() {
        let f = VectorField3::new(ScalarVolume::filled(4, 3, 2, 3.0), ScalarVolume::filled(4, 3, 2, 4.0)).unwrap();
        assert!(magnitude(&f).as_slice().iter().all(|&m| m == 5.0));
        assert!(magnitude(&VectorField3::zeros(2, 2, 2)).as_slice().iter().all(|&m| m == 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let theta = ScalarVolume::from_fn(8, 8, 4, |_, _, _| rng.random_range(0.0..std::f64::consts::TAU));
        let f = VectorField3::new(theta.map(|t| t.cos()), theta.map(|t| t.sin())).unwrap();
        for &m in magnitude(&f).as_slice() {
            assert!((m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn slice_xt_extracts_rows_without_interpolation() {
        let c = ScalarVolume::filled(4, 3, 5, 2.5);
        let s = c.slice_xt(1).unwrap();
        assert_eq!(s.shape(), (4, 5));
        assert!(s.as_slice().iter().all(|&v| v == 2.5));

        let ramp = ScalarVolume::from_fn(4, 3, 5, |_, _, n| n as f64);
        let s = ramp.slice_xt(2).unwrap();
        for n in 0..5 {
            for i in 0..4 {
                assert_eq!(s[(i, n)], n as f64);
            }
        }
        assert!(ramp.slice_xt(3).is_err());

        let f = random_field(11, 6, 5, 4);
        let s = f.v1.slice_xt(3).unwrap();
        for n in 0..4 {
            for i in 0..6 {
                assert_eq!(s[(i, n)], f.v1[(i, 3, n)]);
            }
        }
    }

    #[test]
    fn from_vec_validates_length() {
        assert!(ScalarVolume::from_vec(2, 2, 2, vec![0.0; 7]).is_err());
        assert!(ScalarVolume::from_vec(0, 2, 2, vec![]).is_err());
        assert!(ScalarVolume::from_vec(2, 2, 2, vec![0.0; 8]).is_ok());
    }
}
