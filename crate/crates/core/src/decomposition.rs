//! Geometric/oscillatory splitting of complex volumes by iterated shrinkage.
//!
//! Starting from `u = v = 0`, each iteration computes
//!
//! ```text
//! v' = (f - u) - T^-1( CShrink( T(f - u), 2 mu ) )
//! u' = T^-1( CShrink( T(f - v'), 2 lambda ) )
//! ```
//!
//! with `T` an orthogonal wavelet transform or a curvelet tight frame, and
//! stops once `max(|u' - u|, |v' - v|) < tol` (unnormalized L2) or after
//! `n_max` iterations. Thresholds are the same at every scale.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{from_complex, to_complex, ComplexVolume, VectorField3};
use crate::transforms::{CurveletConfig, CurveletSystem, Frame, WaveletFrame};

/// Soft threshold `sign(x) max(0, |x| - t)`.
#[inline]
pub fn shrink(x: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    let m = x.abs() - t;
    if m > 0.0 {
        m.copysign(x)
    } else {
        0.0
    }
}

/// Complex soft threshold: shrinks the modulus by `t`, keeps the phase.
#[inline]
pub fn cshrink(z: Complex64, t: f64) -> Complex64 {
    debug_assert!(t >= 0.0);
    let r = z.norm();
    if r > t {
        z * ((r - t) / r)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformConfig {
    Wavelet3 { levels: usize },
    Curvelet3(CurveletConfig),
}

impl TransformConfig {
    /// Smallest side multiple the transform accepts, and the smallest side.
    pub fn size_rule(&self) -> (usize, usize) {
        match *self {
            TransformConfig::Wavelet3 { levels } => (1 << levels, 1 << levels),
            TransformConfig::Curvelet3(c) => (1 << c.num_scales, 1 << (c.num_scales + 2)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionParams {
    pub lambda: f64,
    pub mu: f64,
    pub n_max: usize,
    pub tol: f64,
    pub transform: TransformConfig,
    /// Leave the coarse/approximation coefficients unshrunk.
    pub exempt_coarse: bool,
}

impl Default for DecompositionParams {
    fn default() -> Self {
        DecompositionParams {
            lambda: 1.0,
            mu: 1.0,
            n_max: 5,
            tol: 1e-6,
            transform: TransformConfig::Curvelet3(CurveletConfig::default()),
            exempt_coarse: false,
        }
    }
}

impl DecompositionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) || !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Config(format!("lambda and mu must be positive (got {}, {})", self.lambda, self.mu)));
        }
        if self.n_max < 1 {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive (got {})", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    /// Geometric component.
    pub u: ComplexVolume,
    /// Oscillatory component.
    pub v: ComplexVolume,
    /// `f - u - v`.
    pub residual: ComplexVolume,
    pub iterations_run: usize,
    /// `max(|u' - u|, |v' - v|)` of the last iteration.
    pub final_delta: f64,
}

/// `T^-1(CShrink(T(x), t))`.
pub fn shrink_in_frame<F: Frame>(frame: &F, x: &ComplexVolume, t: f64, exempt_coarse: bool) -> Result<ComplexVolume> {
    let mut k = frame.analyze(x)?;
    F::for_each_coeff(&mut k, !exempt_coarse, |z| *z = cshrink(*z, t));
    frame.synthesize(&k)
}

/// Runs the iteration with an explicit frame.
pub fn decompose_with<F: Frame>(f: &ComplexVolume, frame: &F, p: &DecompositionParams) -> Result<DecompositionResult> {
    p.validate()?;
    if !f.is_finite() {
        return Err(Error::NonFinite("decomposition input"));
    }
    let (nx, ny, nt) = f.shape();
    let mut u = ComplexVolume::zeros(nx, ny, nt);
    let mut v = ComplexVolume::zeros(nx, ny, nt);
    let mut iterations_run = 0;
    let mut final_delta = f64::INFINITY;
    while iterations_run < p.n_max {
        let f_minus_u = f - &u;
        let v_next = &f_minus_u - &shrink_in_frame(frame, &f_minus_u, 2.0 * p.mu, p.exempt_coarse)?;
        let u_next = shrink_in_frame(frame, &(f - &v_next), 2.0 * p.lambda, p.exempt_coarse)?;
        final_delta = (&u_next - &u).norm_l2().max((&v_next - &v).norm_l2());
        u = u_next;
        v = v_next;
        iterations_run += 1;
        if final_delta < p.tol {
            break;
        }
    }
    let residual = &(f - &u) - &v;
    Ok(DecompositionResult { u, v, residual, iterations_run, final_delta })
}

/// Builds the configured transform for `f`'s shape and decomposes `f`.
pub fn decompose(f: &ComplexVolume, p: &DecompositionParams) -> Result<DecompositionResult> {
    p.validate()?;
    let (nx, ny, nt) = f.shape();
    match p.transform {
        TransformConfig::Wavelet3 { levels } => decompose_with(f, &WaveletFrame { levels }, p),
        TransformConfig::Curvelet3(cfg) => {
            let sys = CurveletSystem::new(nx, ny, nt, cfg)?;
            decompose_with(f, &sys, p)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub iterations_run: usize,
    pub final_delta: f64,
}

#[derive(Debug, Clone)]
pub struct FieldDecomposition {
    pub u: VectorField3,
    pub v: VectorField3,
    pub residual: VectorField3,
    pub report: DecompositionReport,
}

/// Decomposes a flow volume as the single complex field `v1 + i v2`.
pub fn decompose_field(f: &VectorField3, p: &DecompositionParams) -> Result<FieldDecomposition> {
    let r = decompose(&to_complex(f)?, p)?;
    Ok(FieldDecomposition {
        u: from_complex(&r.u),
        v: from_complex(&r.v),
        residual: from_complex(&r.residual),
        report: DecompositionReport { iterations_run: r.iterations_run, final_delta: r.final_delta },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn shrink_cases() {
        assert_eq!(shrink(3.0, 1.0), 2.0);
        assert_eq!(shrink(-3.0, 1.0), -2.0);
        assert_eq!(shrink(0.5, 1.0), 0.0);
        assert_eq!(shrink(-0.5, 1.0), 0.0);
        assert_eq!(shrink(2.0, 0.0), 2.0);
    }

    #[test]
    fn cshrink_cases() {
        let z = Complex64::from_polar(2.0, FRAC_PI_4);
        let out = cshrink(z, 1.0);
        assert!((out - Complex64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-15);
        assert_eq!(cshrink(Complex64::new(0.0, 0.5), 1.0), Complex64::new(0.0, 0.0));
        assert_eq!(cshrink(Complex64::new(0.0, 0.0), 0.0), Complex64::new(0.0, 0.0));
        let z = Complex64::new(-1.25, 3.5);
        assert_eq!(cshrink(z, 0.0), z);
        // Real line: cshrink degenerates to shrink.
        for x in [-3.0, -0.2, 0.0, 0.7, 5.0] {
            assert!((cshrink(Complex64::new(x, 0.0), 1.0).re - shrink(x, 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn cshrink_scaling_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let z = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let t = rng.random_range(0.0..3.0);
            let a = rng.random_range(0.01..10.0);
            let lhs = cshrink(z * a, a * t);
            let rhs = cshrink(z, t) * a;
            assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn params_validation() {
        let ok = DecompositionParams::default();
        assert!(ok.validate().is_ok());
        assert!(DecompositionParams { lambda: 0.0, ..ok }.validate().is_err());
        assert!(DecompositionParams { mu: -1.0, ..ok }.validate().is_err());
        assert!(DecompositionParams { n_max: 0, ..ok }.validate().is_err());
        assert!(DecompositionParams { tol: 0.0, ..ok }.validate().is_err());
    }

    #[test]
    fn zero_input_is_a_fixed_point() {
        for transform in
            [TransformConfig::Wavelet3 { levels: 2 }, TransformConfig::Curvelet3(CurveletConfig::default())]
        {
            let p = DecompositionParams { transform, ..Default::default() };
            let r = decompose(&ComplexVolume::zeros(32, 32, 32), &p).unwrap();
            assert_eq!(r.iterations_run, 1);
            assert_eq!(r.u.norm_l2(), 0.0);
            assert_eq!(r.v.norm_l2(), 0.0);
            assert_eq!(r.final_delta, 0.0);
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut f = ComplexVolume::zeros(8, 8, 8);
        f[(1, 2, 3)] = Complex64::new(f64::NAN, 0.0);
        let p = DecompositionParams { transform: TransformConfig::Wavelet3 { levels: 1 }, ..Default::default() };
        assert!(matches!(decompose(&f, &p), Err(Error::NonFinite(_))));
        let f = ComplexVolume::zeros(12, 8, 8);
        let p = DecompositionParams { transform: TransformConfig::Wavelet3 { levels: 3 }, ..p };
        assert!(matches!(decompose(&f, &p), Err(Error::Config(_))));
    }

    #[test]
    fn wavelet_first_iterate_matches_coefficientwise_shrinkage() {
        // With an orthogonal transform the first iterate acts per coefficient:
        // v1 = clip(c, 2mu), u1 = shrink(c - v1, 2 lambda).
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = ComplexVolume::from_fn(16, 16, 16, |_, _, _| {
            Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
        });
        let frame = WaveletFrame { levels: 2 };
        let p = DecompositionParams {
            lambda: 0.4,
            mu: 0.3,
            n_max: 1,
            transform: TransformConfig::Wavelet3 { levels: 2 },
            ..Default::default()
        };
        let r = decompose_with(&f, &frame, &p).unwrap();
        let c = frame.analyze(&f).unwrap();
        let ku = frame.analyze(&r.u).unwrap();
        let kv = frame.analyze(&r.v).unwrap();
        for ((z, zu), zv) in c.data().as_slice().iter().zip(ku.data().as_slice()).zip(kv.data().as_slice()) {
            let clip = if z.norm() > 0.6 { z * (0.6 / z.norm()) } else { *z };
            let u1 = cshrink(z - clip, 0.8);
            assert!((zv - clip).norm() < 1e-10);
            assert!((zu - u1).norm() < 1e-10);
        }
    }
}
