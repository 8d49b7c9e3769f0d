//! Discrete Fourier transforms on periodic grids of dimension 1 or 2.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridFunction;

/// Forward and inverse FFT plans for an `n`-per-axis periodic grid.
/// Plans are immutable and can be shared between threads.
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    dims: usize,
    side: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("n", &self.n)
            .field("dims", &self.dims)
            .field("side", &self.side)
            .finish()
    }
}

impl Spectral {
    pub fn new(n: usize, dims: usize, side: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            dims,
            side,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn for_grid(f: &GridFunction) -> Self {
        Self::new(f.samples_per_axis(), f.dims(), f.domain().side())
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn samples_per_axis(&self) -> usize {
        self.n
    }

    fn apply(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.dims {
            let stride = n.pow((self.dims - 1 - axis) as u32);
            if stride == 1 {
                plan.process(data);
                continue;
            }
            let outer = n.pow(axis as u32);
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * n * stride + inner;
                    for t in 0..n {
                        line[t] = data[base + t * stride];
                    }
                    plan.process(&mut line);
                    for t in 0..n {
                        data[base + t * stride] = line[t];
                    }
                }
            }
        }
    }

    /// Unnormalized forward DFT of real samples.
    pub fn forward_real(&self, samples: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.apply(&mut data, &self.forward);
        data
    }

    /// Inverse DFT normalized so that `inverse(forward(x)) = x`.
    pub fn inverse(&self, mut data: Vec<Complex64>) -> Vec<Complex64> {
        self.apply(&mut data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
        data
    }

    /// Signed integer frequency of DFT bin `i` along one axis, in `[-n/2, n/2)`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Physical frequency vector `ξ` (cycles per unit length) of a flat bin.
    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        let mut xi = vec![0.0; self.dims];
        let mut rest = flat;
        for a in (0..self.dims).rev() {
            xi[a] = self.wavenumber(rest % self.n) as f64 / self.side;
            rest /= self.n;
        }
        xi
    }

    /// Flat index of the bin holding `-ξ`.
    pub fn negated(&self, flat: usize) -> usize {
        let n = self.n;
        let mut rest = flat;
        let mut out = 0;
        let mut mult = 1;
        for _ in 0..self.dims {
            let i = rest % n;
            rest /= n;
            out += ((n - i) % n) * mult;
            mult *= n;
        }
        out
    }
}

/// Periodic convolution `(cell volume)·Σ_k f(x_k) k(x_i - x_k)` where the
/// kernel is given by its samples at the minimum-image offsets.
pub fn periodic_convolve(
    plan: &Spectral,
    f_hat: &[Complex64],
    kernel: &[f64],
    cell_volume: f64,
) -> Vec<f64> {
    let k_hat = plan.forward_real(kernel);
    let product: Vec<Complex64> = f_hat.iter().zip(&k_hat).map(|(a, b)| a * b).collect();
    plan.inverse(product)
        .iter()
        .map(|v| v.re * cell_volume)
        .collect()
}
