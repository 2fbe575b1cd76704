//! Unnormalized separable 3D FFT over the crate's x-fastest layout.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

#[derive(Clone)]
pub(crate) struct Fft3 {
    dims: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("dims", &self.dims).finish()
    }
}

impl Fft3 {
    pub fn new(planner: &mut FftPlanner<f64>, dims: [usize; 3]) -> Self {
        let plan = |p: &mut FftPlanner<f64>, dir| {
            [p.plan_fft(dims[0], dir), p.plan_fft(dims[1], dir), p.plan_fft(dims[2], dir)]
        };
        Fft3 { dims, forward: plan(planner, FftDirection::Forward), inverse: plan(planner, FftDirection::Inverse) }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Inverse transform without the `1/N` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let [n0, n1, n2] = self.dims;
        assert_eq!(data.len(), n0 * n1 * n2);
        let scratch_len = plans.iter().map(|p| p.get_inplace_scratch_len()).max().unwrap_or(0);
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];

        if n0 > 1 {
            plans[0].process_with_scratch(data, &mut scratch);
        }
        if n1 > 1 {
            let mut line = vec![Complex64::new(0.0, 0.0); n1];
            for k in 0..n2 {
                for i in 0..n0 {
                    let base = i + n0 * n1 * k;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + n0 * j];
                    }
                    plans[1].process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[base + n0 * j] = *v;
                    }
                }
            }
        }
        if n2 > 1 {
            let stride = n0 * n1;
            let mut line = vec![Complex64::new(0.0, 0.0); n2];
            for base in 0..stride {
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[base + stride * k];
                }
                plans[2].process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[base + stride * k] = *v;
                }
            }
        }
    }
}

/// Signed frequency index of bin `k` on an axis of length `n`, in `[-n/2, n/2)`.
#[inline]
pub(crate) fn signed_freq(k: usize, n: usize) -> i64 {
    let k = k as i64;
    let n = n as i64;
    if k < (n + 1) / 2 {
        k
    } else {
        k - n
    }
}
