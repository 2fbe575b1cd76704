//! Multiscale frames used by the decomposition solvers.

pub mod curvelet;
pub mod norms;
pub mod wavelet;

use num_complex::Complex64;

use crate::error::Result;
use crate::field::ComplexVolume;

pub use curvelet::{
    build_curvelet_system, curvelet_forward, curvelet_inverse, CurveletCoeffs, CurveletConfig, CurveletSystem,
};
pub use norms::{besov_norm, curvelet_norm};
pub use wavelet::{wavelet_forward3, wavelet_inverse3, WaveletCoeffs};

/// A linear analysis/synthesis pair whose synthesis inverts analysis.
pub trait Frame {
    type Coeffs;

    fn analyze(&self, x: &ComplexVolume) -> Result<Self::Coeffs>;
    fn synthesize(&self, k: &Self::Coeffs) -> Result<ComplexVolume>;

    /// Visits every coefficient; coarse-scale ones only if `include_coarse`.
    fn for_each_coeff(k: &mut Self::Coeffs, include_coarse: bool, f: impl FnMut(&mut Complex64));
}

/// Orthogonal 3D wavelet frame with a fixed number of levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveletFrame {
    pub levels: usize,
}

impl Frame for WaveletFrame {
    type Coeffs = WaveletCoeffs;

    fn analyze(&self, x: &ComplexVolume) -> Result<WaveletCoeffs> {
        wavelet_forward3(x, self.levels)
    }

    fn synthesize(&self, k: &WaveletCoeffs) -> Result<ComplexVolume> {
        wavelet_inverse3(k)
    }

    fn for_each_coeff(k: &mut WaveletCoeffs, include_coarse: bool, mut f: impl FnMut(&mut Complex64)) {
        let approx = k.approx_block();
        let data = k.data_mut();
        for n in 0..data.nt() {
            for j in 0..data.ny() {
                for i in 0..data.nx() {
                    let coarse = approx[0].contains(&i) && approx[1].contains(&j) && approx[2].contains(&n);
                    if include_coarse || !coarse {
                        f(&mut data[(i, j, n)]);
                    }
                }
            }
        }
    }
}

impl Frame for CurveletSystem {
    type Coeffs = CurveletCoeffs;

    fn analyze(&self, x: &ComplexVolume) -> Result<CurveletCoeffs> {
        self.forward(x)
    }

    fn synthesize(&self, k: &CurveletCoeffs) -> Result<ComplexVolume> {
        self.inverse(k)
    }

    fn for_each_coeff(k: &mut CurveletCoeffs, include_coarse: bool, mut f: impl FnMut(&mut Complex64)) {
        for w in k.wedges_mut() {
            if include_coarse || w.scale > 0 {
                w.data.iter_mut().for_each(&mut f);
            }
        }
    }
}
