//! Dyadic coefficient norms (Besov and curvelet-space).
//!
//! Scale index `j` counts from the coarsest group (`j = 0`) toward fine
//! scales. For `p, q < inf` the norm is
//!
//! ```text
//! ( sum_j 2^(j (1 - 1/p + s) q) [ sum_k 2^(j p / 2) |c_jk|^p ]^(q/p) )^(1/q)
//! ```
//!
//! where `k` runs over positions (and wedges, for curvelets). Infinite `q`
//! takes the supremum over scales; infinite `p` the supremum over positions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::transforms::curvelet::CurveletCoeffs;
use crate::transforms::wavelet::WaveletCoeffs;

fn check_exponents(p: f64, q: f64, s: f64) -> Result<()> {
    if !(p >= 1.0) || !(q >= 1.0) || !s.is_finite() {
        return Err(Error::Config(format!("invalid norm exponents p={p}, q={q}, s={s}")));
    }
    Ok(())
}

/// Per-scale term `2^(j (1 - 1/p + s)) [ sum_k 2^(j p/2) |c|^p ]^(1/p)`.
fn scale_term(j: usize, coeffs: &[Complex64], p: f64, s: f64) -> f64 {
    let j = j as f64;
    let inner = if p.is_infinite() {
        2f64.powf(j / 2.0) * coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    } else {
        let sum: f64 = coeffs.iter().map(|z| z.norm().powf(p)).sum();
        2f64.powf(j / 2.0) * sum.powf(1.0 / p)
    };
    let outer_exp = if p.is_infinite() { 1.0 + s } else { 1.0 - 1.0 / p + s };
    2f64.powf(j * outer_exp) * inner
}

pub fn dyadic_norm(groups: &[Vec<Complex64>], p: f64, q: f64, s: f64) -> Result<f64> {
    check_exponents(p, q, s)?;
    let terms = groups.iter().enumerate().map(|(j, g)| scale_term(j, g, p, s));
    if q.is_infinite() {
        Ok(terms.fold(0.0, f64::max))
    } else {
        Ok(terms.map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q))
    }
}

pub fn besov_norm(k: &WaveletCoeffs, p: f64, q: f64, s: f64) -> Result<f64> {
    dyadic_norm(&k.by_scale(), p, q, s)
}

pub fn curvelet_norm(k: &CurveletCoeffs, p: f64, q: f64, s: f64) -> Result<f64> {
    dyadic_norm(&k.by_scale(), p, q, s)
}
