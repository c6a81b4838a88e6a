//! Newtonian potential `φ = 1/|x| * ρ` on the box, without periodic images.
//!
//! The density is zero-padded to the doubled box and convolved with a
//! truncated Green's function: `1/|x|` cut off at radius `R = 2√3 L`, which
//! exceeds every separation inside the box. Its Fourier transform
//! `8π sin²(kR/2)/k²` is smooth, so sampling it on a fine periodic lattice
//! and transforming back gives a real-space kernel whose discrete convolution
//! is spectrally accurate even for the singular `1/|x|`.

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{lp_norm, Field3, Grid3, RadialField};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Fourier multiplier of the free-space convolution on the doubled box.
///
/// Only the octant of nonnegative folded frequencies is stored; the
/// multiplier is even in every axis. Quadrature weights are included.
#[derive(Debug, Clone)]
pub struct CoulombKernel {
    grid: Grid3,
    fft: Fft3,
    octant: Vec<f64>,
}

impl CoulombKernel {
    pub fn new(grid: Grid3) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let radius = 2.0 * 3f64.sqrt() * grid.half_width();

        // Truncated-kernel transform sampled on the 4n-periodic lattice of
        // spacing h, transformed to real-space offsets 0..=n.
        let period = 4 * n;
        let dk = 2.0 * PI / (period as f64 * h);
        let ft = |idx: [usize; 3]| {
            let k = dk * ((idx[0] * idx[0] + idx[1] * idx[1] + idx[2] * idx[2]) as f64).sqrt();
            if k == 0.0 {
                2.0 * PI * radius * radius
            } else {
                8.0 * PI * (0.5 * k * radius).sin().powi(2) / (k * k)
            }
        };
        let wide = 2 * n + 1;
        let mut shape = [wide, wide, wide];
        let mut data = even_transform(&ft, &mut shape, 2, period, n + 1);
        for axis in [1, 0] {
            let get = |idx: [usize; 3]| data[(idx[0] * shape[1] + idx[1]) * shape[2] + idx[2]];
            let mut s = shape;
            let next = even_transform(&get, &mut s, axis, period, n + 1);
            data = next;
            shape = s;
        }
        let scale = 1.0 / ((period as f64).powi(3) * h.powi(3));
        data.iter_mut().for_each(|v| *v *= scale);

        // Folded real-space kernel on the 2n box is even, so its DFT is again
        // an even cosine transform of the octant.
        for axis in [2, 1, 0] {
            let get = |idx: [usize; 3]| data[(idx[0] * shape[1] + idx[1]) * shape[2] + idx[2]];
            let mut s = shape;
            let next = even_transform(&get, &mut s, axis, 2 * n, n + 1);
            data = next;
            shape = s;
        }
        let weight = grid.cell_volume();
        let octant = data.into_iter().map(|v| (v * weight).max(0.0)).collect();
        Self { grid, fft: Fft3::new(2 * n), octant }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    /// Kernel with the sign of the multiplier reversed. Only useful for
    /// checking that the verification suite detects a broken kernel.
    #[doc(hidden)]
    pub fn sign_flipped(mut self) -> Self {
        self.octant.iter_mut().for_each(|v| *v = -*v);
        self
    }

    fn multiplier(&self, f: [usize; 3]) -> f64 {
        let n = self.grid.n();
        let m = 2 * n;
        let [a, b, c] = f.map(|i| if i <= n { i } else { m - i });
        self.octant[(a * (n + 1) + b) * (n + 1) + c]
    }

    /// Potential of a density given by its grid samples.
    pub fn potential_of_density(&self, rho: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let m = 2 * n;
        assert_eq!(rho.len(), self.grid.len(), "density length must match the grid");
        let mut buf = vec![Complex64::default(); m * m * m];
        for ix in 0..n {
            for iy in 0..n {
                let src = (ix * n + iy) * n;
                let dst = (ix * m + iy) * m;
                for iz in 0..n {
                    buf[dst + iz] = Complex64::new(rho[src + iz], 0.0);
                }
            }
        }
        self.fft.forward(&mut buf, n);
        for fx in 0..m {
            for fy in 0..m {
                let row = (fx * m + fy) * m;
                for fz in 0..m {
                    buf[row + fz] *= self.multiplier([fx, fy, fz]);
                }
            }
        }
        self.fft.inverse(&mut buf, n);
        let scale = 1.0 / (m * m * m) as f64;
        let mut out = Vec::with_capacity(self.grid.len());
        for ix in 0..n {
            for iy in 0..n {
                let src = (ix * m + iy) * m;
                out.extend(buf[src..src + n].iter().map(|c| c.re * scale));
            }
        }
        out
    }

    /// `φ = 1/|x| * (h u²)`, with `h ≡ 1` when `weight` is `None`.
    pub fn potential(&self, u: &Field3, weight: Option<&Field3>) -> Result<Field3> {
        let rho = self.density(u, weight)?;
        Ok(Field3::from_vec_unchecked(*u.grid(), self.potential_of_density(&rho)))
    }

    /// `∫φ · h u²`.
    pub fn energy(&self, u: &Field3, weight: Option<&Field3>) -> Result<f64> {
        let rho = self.density(u, weight)?;
        let phi = self.potential_of_density(&rho);
        Ok(pair(&phi, &rho) * self.grid.cell_volume())
    }

    /// Symmetric bilinear form `∫(1/|x| * f) g`.
    pub fn bilinear(&self, f: &Field3, g: &Field3) -> Result<f64> {
        self.check(f)?;
        self.check(g)?;
        let phi = self.potential_of_density(f.values());
        Ok(pair(&phi, g.values()) * self.grid.cell_volume())
    }

    pub(crate) fn density(&self, u: &Field3, weight: Option<&Field3>) -> Result<Vec<f64>> {
        self.check(u)?;
        Ok(match weight {
            None => u.values().iter().map(|v| v * v).collect(),
            Some(h) => {
                self.check(h)?;
                u.values().iter().zip(h.values()).map(|(v, w)| w * (v * v)).collect()
            }
        })
    }

    fn check(&self, f: &Field3) -> Result<()> {
        if f.grid() == &self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

fn pair(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Even (cosine) transform along `axis`.
///
/// The input along `axis` holds samples `0..=period/2` of a sequence that is
/// even with the given period; the output holds its DFT at frequencies
/// `0..out_len`. `shape` is updated in place.
fn even_transform(
    get: &dyn Fn([usize; 3]) -> f64,
    shape: &mut [usize; 3],
    axis: usize,
    period: usize,
    out_len: usize,
) -> Vec<f64> {
    let half = period / 2;
    assert_eq!(shape[axis], half + 1);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(period);
    let mut out_shape = *shape;
    out_shape[axis] = out_len;
    let mut out = vec![0.0; out_shape.iter().product()];
    let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
    let mut line = vec![Complex64::default(); period];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for i in 0..shape[others[0]] {
        for j in 0..shape[others[1]] {
            let mut idx = [0; 3];
            idx[others[0]] = i;
            idx[others[1]] = j;
            for c in 0..=half {
                idx[axis] = c;
                let v = get(idx);
                line[c] = Complex64::new(v, 0.0);
                if c > 0 && c < half {
                    line[period - c] = Complex64::new(v, 0.0);
                }
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (f, value) in line.iter().take(out_len).enumerate() {
                idx[axis] = f;
                out[(idx[0] * out_shape[1] + idx[1]) * out_shape[2] + idx[2]] = value.re;
            }
        }
    }
    *shape = out_shape;
    out
}

/// `φ = 1/|x| * (h u²)` with a freshly built kernel.
pub fn coulomb_potential(u: &Field3, weight: Option<&Field3>) -> Result<Field3> {
    CoulombKernel::new(*u.grid()).potential(u, weight)
}

/// `∫φ_u h u²` with a freshly built kernel.
pub fn coulomb_energy(u: &Field3, weight: Option<&Field3>) -> Result<f64> {
    CoulombKernel::new(*u.grid()).energy(u, weight)
}

/// Both sides of `‖φ‖_{D^{1,2}} <= S^{-1/2} |u|²_{12/5}`.
///
/// The norm on the left is that of the solution of `-Δφ = u²`, which is
/// `1/(4π)` times the convolution computed here; hence
/// `‖φ‖²_{D^{1,2}} = ∫φ_u u² / (4π)`.
pub fn coulomb_bound_check(u: &Field3) -> Result<(f64, f64)> {
    bound_sides(&CoulombKernel::new(*u.grid()), u)
}

pub(crate) fn bound_sides(kernel: &CoulombKernel, u: &Field3) -> Result<(f64, f64)> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let lhs = (kernel.energy(u, None)? / (4.0 * PI)).sqrt();
    let rhs = crate::semiclassics::sobolev_constant().powf(-0.5) * lp_norm(u, 12.0 / 5.0)?.powi(2);
    Ok((lhs, rhs))
}

/// Potential of a radial density, `ρ` given as `4π r² ρ(r) Δr` node weights:
/// `φ_j = Σ_k ρ_k / max(r_j, r_k)`.
pub(crate) fn radial_potential_of_weights(r: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = r.len();
    let mut outer = vec![0.0; n];
    let mut acc = 0.0;
    for j in (0..n).rev() {
        outer[j] = acc;
        acc += weights[j] / r[j];
    }
    let mut inner = 0.0;
    (0..n)
        .map(|j| {
            inner += weights[j];
            inner / r[j] + outer[j]
        })
        .collect()
}

/// Exact radial reduction of the Newtonian potential of `u²`.
pub fn radial_coulomb(u: &RadialField) -> RadialField {
    let grid = *u.grid();
    let r = grid.nodes();
    let dr = grid.step();
    let weights: Vec<f64> = r.iter().zip(u.values()).map(|(r, v)| 4.0 * PI * r * r * v * v * dr).collect();
    RadialField::new(grid, radial_potential_of_weights(&r, &weights)).expect("finite input gives finite potential")
}
