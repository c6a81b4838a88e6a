//! Cubic 3D FFTs assembled from 1D rustfft plans.
//!
//! Data is row-major with the last (z) index fastest. Strided axes are
//! transformed by gathering small batches of columns into a contiguous
//! buffer, which keeps memory access sequential.
//!
//! Both directions accept an `active` extent `a <= m`: on the forward pass the
//! input is known to vanish outside `[0, a)^3`, on the inverse pass only the
//! output inside `[0, a)^3` is wanted. Lines that are identically zero or never
//! read are skipped. With `a = m / 2` (zero-padded convolution) this saves
//! roughly 40% of the work.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

const COLUMN_BATCH: usize = 16;

#[derive(Clone)]
pub(crate) struct Fft3 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("m", &self.m).finish()
    }
}

impl Fft3 {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    /// Forward transform in place; entries outside `[0, active)^3` must be zero.
    pub fn forward(&self, data: &mut [Complex64], active: usize) {
        let m = self.m;
        debug_assert_eq!(data.len(), self.len());
        let fft = &*self.forward;
        let mut scratch = vec![Complex64::default(); self.scratch_len(fft)];
        let mut buf = vec![Complex64::default(); COLUMN_BATCH * m];

        for x in 0..active {
            let start = x * m * m;
            fft.process_with_scratch(&mut data[start..start + active * m], &mut scratch);
        }
        for x in 0..active {
            let slab = &mut data[x * m * m..(x + 1) * m * m];
            columns(fft, slab, m, m, &mut buf, &mut scratch);
        }
        columns(fft, data, m, m * m, &mut buf, &mut scratch);
    }

    /// Unnormalized inverse transform in place; only `[0, active)^3` of the
    /// result is valid afterwards.
    pub fn inverse(&self, data: &mut [Complex64], active: usize) {
        let m = self.m;
        debug_assert_eq!(data.len(), self.len());
        let fft = &*self.inverse;
        let mut scratch = vec![Complex64::default(); self.scratch_len(fft)];
        let mut buf = vec![Complex64::default(); COLUMN_BATCH * m];

        columns(fft, data, m, m * m, &mut buf, &mut scratch);
        for x in 0..active {
            let slab = &mut data[x * m * m..(x + 1) * m * m];
            columns(fft, slab, m, m, &mut buf, &mut scratch);
        }
        for x in 0..active {
            let start = x * m * m;
            fft.process_with_scratch(&mut data[start..start + active * m], &mut scratch);
        }
    }

    fn scratch_len(&self, fft: &dyn Fft<f64>) -> usize {
        fft.get_inplace_scratch_len().max(1)
    }

    /// Forward transform of a real array over the full cube.
    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut data, self.m);
        data
    }

    /// Inverse transform returning the real part, normalized by `m^3`.
    pub fn inverse_real(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut data, self.m);
        let scale = 1.0 / self.len() as f64;
        data.into_iter().map(|c| c.re * scale).collect()
    }
}

/// Transforms every column of a `rows x cols` row-major matrix along the row index.
fn columns(
    fft: &dyn Fft<f64>,
    matrix: &mut [Complex64],
    rows: usize,
    cols: usize,
    buf: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    let mut start = 0;
    while start < cols {
        let width = COLUMN_BATCH.min(cols - start);
        for r in 0..rows {
            let row = &matrix[r * cols + start..r * cols + start + width];
            for (c, &v) in row.iter().enumerate() {
                buf[c * rows + r] = v;
            }
        }
        fft.process_with_scratch(&mut buf[..width * rows], scratch);
        for r in 0..rows {
            let row = &mut matrix[r * cols + start..r * cols + start + width];
            for (c, v) in row.iter_mut().enumerate() {
                *v = buf[c * rows + r];
            }
        }
        start += width;
    }
}

/// Angular wavenumbers of a periodic grid with `n` points and period `period`,
/// in FFT order. The Nyquist entry is zeroed so that first derivatives of real
/// fields stay real.
pub(crate) fn derivative_wavenumbers(n: usize, period: f64) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / period;
    (0..n)
        .map(|j| {
            if 2 * j == n {
                0.0
            } else if j < n / 2 {
                base * j as f64
            } else {
                base * (j as f64 - n as f64)
            }
        })
        .collect()
}
