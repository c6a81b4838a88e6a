//! Uniform grids, scalar fields and their quadratures.

use crate::error::{Error, Result};
use crate::spectral::Spectral;

/// Cubic grid `[-L, L)^3` with `n` points per axis.
///
/// Node `i` sits at `-L + i * h` with `h = 2L / n`, so the origin is a node.
/// Flat indices are row-major with `z` fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    n: usize,
    half_width: f64,
}

impl Grid3 {
    /// Largest number of nodes accepted by [`Grid3::new`] (a 128³ box).
    pub const DEFAULT_MAX_POINTS: usize = 1 << 21;

    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        Self::with_budget(n, half_width, Self::DEFAULT_MAX_POINTS)
    }

    pub fn with_budget(n: usize, half_width: f64, max_points: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 16, got {n}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        match n.checked_pow(3) {
            Some(total) if total <= max_points => Ok(Self { n, half_width }),
            _ => Err(Error::InvalidGrid(format!(
                "{n}^3 points exceed the memory budget of {max_points}"
            ))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(3)
    }

    /// Coordinate of node `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        self.multi_index(idx).map(|i| self.coord(i))
    }

    /// Index of the node nearest to `p`, clamped to the box.
    pub fn nearest(&self, p: [f64; 3]) -> usize {
        let h = self.spacing();
        let [ix, iy, iz] = p.map(|c| {
            let i = ((c + self.half_width) / h).round();
            i.clamp(0.0, (self.n - 1) as f64) as usize
        });
        self.index(ix, iy, iz)
    }

    /// Iterator over all node coordinates in storage order.
    pub fn points(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Real scalar field sampled on a [`Grid3`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    grid: Grid3,
    values: Vec<f64>,
}

impl Field3 {
    pub fn new(grid: Grid3, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid3, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid3, value: f64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    /// Samples `f` at every node. Non-finite samples are rejected.
    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().map(f).collect())
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| t * v).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Midpoint quadrature of the field over the box.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Index and value of the largest entry (first one on ties).
    pub fn argmax(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, &v) in self.values.iter().enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute value on the outer faces of the box.
    pub fn boundary_max_abs(&self) -> f64 {
        let n = self.grid.n;
        let mut m: f64 = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let [ix, iy, iz] = self.grid.multi_index(i);
            if [ix, iy, iz].iter().any(|&j| j == 0 || j == n - 1) {
                m = m.max(v.abs());
            }
        }
        m
    }

    pub(crate) fn check_same_grid(&self, other: &Field3) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// L² inner product by midpoint quadrature.
pub fn inner_product(a: &Field3, b: &Field3) -> Result<f64> {
    a.check_same_grid(b)?;
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok(s * a.grid.cell_volume())
}

/// `∫|∇u|² + ∫V u²` with the gradient computed spectrally.
pub fn h1_norm_sq(u: &Field3, v: &Field3) -> Result<f64> {
    u.check_same_grid(v)?;
    let min = v.min();
    if min <= 0.0 {
        return Err(Error::NonPositivePotential { min });
    }
    let spectral = Spectral::new(u.grid);
    Ok(spectral.laplacian_energy(&u.values) + weighted_l2_sq(u, v))
}

pub(crate) fn weighted_l2_sq(u: &Field3, w: &Field3) -> f64 {
    let s: f64 = u.values.iter().zip(&w.values).map(|(x, wt)| wt * x * x).sum();
    s * u.grid.cell_volume()
}

/// `(∫|u|^p)^{1/p}` for `p >= 1`.
pub fn lp_norm(u: &Field3, p: f64) -> Result<f64> {
    Ok(lp_integral(u, p)?.powf(1.0 / p))
}

/// `∫|u|^p` for `p >= 1`.
pub fn lp_integral(u: &Field3, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    let s: f64 = u.values.iter().map(|v| v.abs().powf(p)).sum();
    Ok(s * u.grid.cell_volume())
}

/// Uniform radial nodes `r_j = j Δr`, `j = 1..=n_r`, with `Δr = r_max / (n_r + 1)`.
///
/// Fields vanish at `r = r_max`, which is the first node past the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    n_r: usize,
    r_max: f64,
}

impl RadialGrid {
    pub const MIN_RADIUS: f64 = 50.0;

    pub fn new(n_r: usize, r_max: f64) -> Result<Self> {
        if n_r < 16 {
            return Err(Error::InvalidGrid(format!("radial grid needs at least 16 nodes, got {n_r}")));
        }
        if !(r_max.is_finite() && r_max >= Self::MIN_RADIUS) {
            return Err(Error::InvalidGrid(format!(
                "radial truncation must be at least {}, got {r_max}",
                Self::MIN_RADIUS
            )));
        }
        Ok(Self { n_r, r_max })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn step(&self) -> f64 {
        self.r_max / (self.n_r + 1) as f64
    }

    /// Radius of node `j` (0-based storage index).
    pub fn r(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_r).map(|j| self.r(j)).collect()
    }
}

/// Radially symmetric field `u(|x|)` sampled on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_r {
            return Err(Error::InvalidGrid(format!(
                "expected {} radial values, got {}",
                grid.n_r,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `∫_{R³} f(|x|) dx` by the radial trapezoid rule.
    pub fn integral(&self) -> f64 {
        let dr = self.grid.step();
        let s: f64 = self.values.iter().enumerate().map(|(j, v)| self.grid.r(j).powi(2) * v).sum();
        4.0 * std::f64::consts::PI * s * dr
    }

    pub fn lp_integral(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
        Ok(self.map(|v| v.abs().powf(p)).integral())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Linear interpolation in `r`, using the boundary value zero at `r_max`
    /// and the first node value near the origin.
    pub fn eval(&self, r: f64) -> f64 {
        let dr = self.grid.step();
        let s = r / dr;
        if s <= 1.0 {
            return self.values[0];
        }
        let j = s.floor() as usize;
        let frac = s - j as f64;
        let at = |k: usize| if k == 0 { self.values[0] } else { self.values.get(k - 1).copied().unwrap_or(0.0) };
        if j > self.grid.n_r {
            return 0.0;
        }
        (1.0 - frac) * at(j) + frac * at(j + 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value at the outermost node, the discrete stand-in for `u(r_max)`.
    pub fn tail(&self) -> f64 {
        *self.values.last().expect("radial grids are nonempty")
    }
}
