//! Exponential decay away from the maximum point.

use crate::error::{Error, Result};
use crate::field::Field3;
use serde::Serialize;

/// Fits with `R²` below this are rejected by [`decay_fit`].
pub const MIN_FIT_QUALITY: f64 = 0.98;

/// `u ≈ C e^{-μ|x - center|}` on an annulus, in grid units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub c: f64,
    pub mu: f64,
    /// Coefficient of determination of the line through `(r, log u)`.
    pub fit_quality: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    pub points: usize,
}

impl DecayFit {
    /// The rate in original coordinates, `μ / ε`.
    pub fn mu_original(&self, eps: f64) -> f64 {
        self.mu / eps
    }
}

fn distance(p: [f64; 3], c: [f64; 3]) -> f64 {
    ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt()
}

/// Least-squares line through `(|x - center|, log u)` for grid points with
/// `r_inner <= |x - center| <= r_outer`, without a quality threshold.
pub fn fit_exponential(u: &Field3, center: [f64; 3], r_inner: f64, r_outer: f64) -> Result<DecayFit> {
    if !(r_inner >= 0.0 && r_outer > r_inner) {
        return Err(Error::DecayFit(format!("empty annulus [{r_inner}, {r_outer}]")));
    }
    let (mut n, mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0usize, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, &v) in u.grid().points().zip(u.values()) {
        let r = distance(p, center);
        if r < r_inner || r > r_outer {
            continue;
        }
        if v <= 0.0 {
            return Err(Error::DecayFit(format!("nonpositive value {v:e} at distance {r:.4} in the annulus")));
        }
        let y = v.ln();
        n += 1;
        sx += r;
        sy += y;
        sxx += r * r;
        sxy += r * y;
        syy += y * y;
    }
    if n < 3 {
        return Err(Error::DecayFit(format!("only {n} grid points in [{r_inner}, {r_outer}]")));
    }
    let nf = n as f64;
    let vxx = sxx - sx * sx / nf;
    let vxy = sxy - sx * sy / nf;
    let vyy = syy - sy * sy / nf;
    if vxx <= 0.0 {
        return Err(Error::DecayFit("annulus points share one radius".into()));
    }
    let slope = vxy / vxx;
    let intercept = (sy - slope * sx) / nf;
    let fit_quality = if vyy > 0.0 { vxy * vxy / (vxx * vyy) } else { 1.0 };
    Ok(DecayFit { c: intercept.exp(), mu: -slope, fit_quality, r_inner, r_outer, points: n })
}

/// Decay fit of a ground state around its maximum `center` (grid
/// coordinates) on the annulus from the half-maximum radius to the nearest
/// box face.
pub fn decay_fit(u: &Field3, center: [f64; 3]) -> Result<DecayFit> {
    let g = u.grid();
    let (_, umax) = u.argmax();
    let r_inner = g
        .points()
        .zip(u.values())
        .filter(|(_, &v)| v <= 0.5 * umax)
        .map(|(p, _)| distance(p, center))
        .fold(f64::INFINITY, f64::min);
    let r_outer = center.iter().map(|c| g.half_width() - c.abs()).fold(f64::INFINITY, f64::min);
    if !r_inner.is_finite() {
        return Err(Error::DecayFit("field never drops below half its maximum".into()));
    }
    let fit = fit_exponential(u, center, r_inner, r_outer)?;
    if fit.fit_quality < MIN_FIT_QUALITY {
        return Err(Error::DecayFit(format!(
            "fit quality R² = {:.4} below {MIN_FIT_QUALITY} (tail is not exponential)",
            fit.fit_quality
        )));
    }
    if fit.mu <= 0.0 {
        return Err(Error::DecayFit(format!("nonpositive decay rate {}", fit.mu)));
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid3;

    #[test]
    fn recovers_exact_rate() {
        let g = Grid3::new(32, 6.0).unwrap();
        let u = Field3::from_fn(g, |p| 3.0 * (-2.0 * distance(p, [0.0; 3])).exp()).unwrap();
        let fit = decay_fit(&u, [0.0; 3]).unwrap();
        assert!((fit.mu - 2.0).abs() < 1e-10);
        assert!((fit.c - 3.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_tail_is_rejected() {
        let g = Grid3::new(32, 6.0).unwrap();
        let u = Field3::from_fn(g, |p| (-distance(p, [0.0; 3]).powi(2)).exp()).unwrap();
        let raw = fit_exponential(&u, [0.0; 3], 0.84, 6.0).unwrap();
        assert!(raw.fit_quality < MIN_FIT_QUALITY);
        assert!(matches!(decay_fit(&u, [0.0; 3]), Err(Error::DecayFit(_))));
    }
}
