//! Forward and inverse FFTs of fields on a periodic `n^d` lattice, `d ≤ 2`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub(crate) type C64 = Complex<f64>;

#[derive(Clone)]
pub(crate) struct GridFft {
    n: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl GridFft {
    pub fn new(n: usize, dim: usize) -> Self {
        assert!(dim == 1 || dim == 2);
        let mut planner = FftPlanner::new();
        GridFft {
            n,
            dim,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    fn apply(&self, data: &mut [C64], fft: &Arc<dyn Fft<f64>>, scratch: &mut Vec<C64>) {
        let n = self.n;
        for row in data.chunks_mut(n) {
            fft.process(row);
        }
        if self.dim == 2 {
            scratch.resize(n, C64::new(0.0, 0.0));
            for j in 0..n {
                for i in 0..n {
                    scratch[i] = data[i * n + j];
                }
                fft.process(scratch);
                for i in 0..n {
                    data[i * n + j] = scratch[i];
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [C64], scratch: &mut Vec<C64>) {
        self.apply(data, &self.forward, scratch);
    }

    /// Inverse transform including the `1/n^d` normalization.
    pub fn inverse(&self, data: &mut [C64], scratch: &mut Vec<C64>) {
        self.apply(data, &self.inverse, scratch);
        let s = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}
