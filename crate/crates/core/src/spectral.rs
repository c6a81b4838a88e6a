//! Fourier differentiation on the periodic box.
//!
//! First derivatives drop the Nyquist mode, so `∫|∇u|²` from the multiplier
//! and from physical-space gradients agree to rounding. `-Δ` keeps the full
//! symbol `k_N² = (π/h)²` on that mode: zeroing it would leave the checkerboard
//! free of kinetic energy and let minimizers collapse onto single nodes.

use crate::fft::{derivative_wavenumbers, Fft3};
use crate::field::Grid3;
use rustfft::num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct Spectral {
    grid: Grid3,
    fft: Fft3,
    k: Vec<f64>,
    k2: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: Grid3) -> Self {
        let n = grid.n();
        let k = derivative_wavenumbers(n, 2.0 * grid.half_width());
        let nyquist = std::f64::consts::PI / grid.spacing();
        let sq: Vec<f64> = (0..n).map(|j| if 2 * j == n { nyquist * nyquist } else { k[j] * k[j] }).collect();
        let mut k2 = Vec::with_capacity(grid.len());
        for &x in &sq {
            for &y in &sq {
                for &z in &sq {
                    k2.push(x + y + z);
                }
            }
        }
        Self { grid, fft: Fft3::new(n), k, k2 }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    /// `∫|∇u|²` evaluated as a Fourier multiplier sum.
    pub fn gradient_energy(&self, u: &[f64]) -> f64 {
        let n = self.grid.n();
        let hat = self.fft.forward_real(u);
        let s: f64 = hat
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let (i, j, l) = (idx / (n * n), (idx / n) % n, idx % n);
                (self.k[i].powi(2) + self.k[j].powi(2) + self.k[l].powi(2)) * c.norm_sqr()
            })
            .sum();
        s * self.grid.cell_volume() / self.grid.len() as f64
    }

    /// `<-Δu, u>`; differs from [`Spectral::gradient_energy`] only by the
    /// Nyquist content of `u`.
    pub fn laplacian_energy(&self, u: &[f64]) -> f64 {
        let hat = self.fft.forward_real(u);
        let s: f64 = hat.iter().zip(&self.k2).map(|(c, k2)| k2 * c.norm_sqr()).sum();
        s * self.grid.cell_volume() / self.grid.len() as f64
    }

    /// `∫|∇u|²` from the three gradient components in physical space.
    pub fn gradient_energy_physical(&self, u: &[f64]) -> f64 {
        let s: f64 = self.gradient(u).iter().flat_map(|g| g.iter()).map(|v| v * v).sum();
        s * self.grid.cell_volume()
    }

    pub fn neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        let mut hat = self.fft.forward_real(u);
        for (c, k2) in hat.iter_mut().zip(&self.k2) {
            *c *= *k2;
        }
        self.fft.inverse_real(hat)
    }

    /// Solves `(-Δ + shift) w = f` for `shift > 0`.
    pub fn solve_shifted(&self, f: &[f64], shift: f64) -> Vec<f64> {
        let mut hat = self.fft.forward_real(f);
        for (c, k2) in hat.iter_mut().zip(&self.k2) {
            *c /= k2 + shift;
        }
        self.fft.inverse_real(hat)
    }

    pub fn gradient(&self, u: &[f64]) -> [Vec<f64>; 3] {
        let n = self.grid.n();
        let hat = self.fft.forward_real(u);
        let mut out: [Vec<f64>; 3] = Default::default();
        for (axis, slot) in out.iter_mut().enumerate() {
            let mut d = hat.clone();
            for (idx, c) in d.iter_mut().enumerate() {
                let i = [idx / (n * n), (idx / n) % n, idx % n][axis];
                *c *= Complex64::new(0.0, self.k[i]);
            }
            *slot = self.fft.inverse_real(d);
        }
        out
    }
}
