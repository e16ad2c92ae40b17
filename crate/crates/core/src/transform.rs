//! FFT and DST-I plans over a grid.
//!
//! Forward transforms are unnormalized. The inverse FFT divides by `N^dim`;
//! the inverse DST-I multiplies by `2/(N+1)`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

pub struct Spectral {
    n: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    sine: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).field("dim", &self.dim).finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.points();
        let mut planner = FftPlanner::new();
        Self {
            n,
            dim: grid.dim(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            sine: planner.plan_fft_forward(2 * (n + 1)),
        }
    }

    pub fn fft(&self, data: &mut [Complex64]) {
        self.apply(&self.forward, data);
    }

    pub fn ifft(&self, data: &mut [Complex64]) {
        self.apply(&self.inverse, data);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    fn apply(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(data.len(), n.pow(self.dim as u32));
        let scratch_len = plan.get_inplace_scratch_len();
        let rows = |buf: &mut [Complex64]| {
            if buf.len() >= 4 * n {
                buf.par_chunks_mut(n).for_each_init(
                    || vec![Complex64::default(); scratch_len],
                    |scratch, row| plan.process_with_scratch(row, scratch),
                );
            } else {
                let mut scratch = vec![Complex64::default(); scratch_len];
                plan.process_with_scratch(buf, &mut scratch);
            }
        };
        rows(data);
        if self.dim == 2 {
            let mut t = transpose(data, n);
            rows(&mut t);
            transpose_into(&t, data, n);
        }
    }

    /// DST-I of a 1D array: `S_k = Σ_j w_j sin(π k j / (N+1))`, `j, k = 1..=N`.
    /// Works on complex input by linearity.
    pub fn dst(&self, data: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        let m = 2 * (n + 1);
        let mut ext = vec![Complex64::default(); m];
        for (j, &w) in data.iter().enumerate() {
            ext[j + 1] = w;
            ext[m - 1 - j] = -w;
        }
        self.sine.process(&mut ext);
        // FFT of the odd extension equals -2i S_k.
        for (k, s) in data.iter_mut().enumerate() {
            *s = ext[k + 1] * Complex64::new(0.0, 0.5);
        }
    }

    pub fn idst(&self, data: &mut [Complex64]) {
        self.dst(data);
        let scale = 2.0 / (self.n + 1) as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    transpose_into(data, &mut out, n);
    out
}

fn transpose_into(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    dst.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for (i, z) in row.iter_mut().enumerate() {
            *z = src[i * n + j];
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, BoundaryKind};
    use std::f64::consts::PI;

    fn naive_dst(w: &[Complex64]) -> Vec<Complex64> {
        let n = w.len();
        (1..=n)
            .map(|k| {
                (1..=n)
                    .map(|j| w[j - 1] * (PI * (k * j) as f64 / (n + 1) as f64).sin())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn dst_matches_direct_sum_and_inverts() {
        let g = make_grid(1, 3.0, 13, BoundaryKind::Dirichlet).unwrap();
        let sp = Spectral::new(&g);
        let w: Vec<Complex64> = (0..13)
            .map(|j| Complex64::new((j as f64 * 0.7).sin(), (j as f64 * 0.3).cos() - 0.2))
            .collect();
        let mut s = w.clone();
        sp.dst(&mut s);
        for (a, b) in s.iter().zip(naive_dst(&w)) {
            assert!((a - b).norm() < 1e-12);
        }
        sp.idst(&mut s);
        for (a, b) in s.iter().zip(&w) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn fft_2d_round_trip() {
        let g = make_grid(2, 1.0, 16, BoundaryKind::Periodic).unwrap();
        let sp = Spectral::new(&g);
        let w: Vec<Complex64> =
            (0..256).map(|j| Complex64::new((j as f64).sin(), (j as f64 * 0.1).cos())).collect();
        let mut s = w.clone();
        sp.fft(&mut s);
        sp.ifft(&mut s);
        for (a, b) in s.iter().zip(&w) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
