//! The energy restricted to a ray `t ↦ I(tu)` and the Nehari projection.
//!
//! Along a ray every term of the energy is a monomial in `t`, so the four
//! integrals `A = ‖u‖²`, `B = ∫φ_u h u²`, `C_i = ∫Q_i|u|^{q_i}` and
//! `D = ∫K u⁶` determine everything. The same struct serves the 3D and the
//! radial discretizations.

use crate::error::{Error, Result};
use serde::Serialize;

pub const BRACKET_LOW: f64 = 1e-6;
pub const BRACKET_HIGH: f64 = 1.0;
pub const BRACKET_CAP: f64 = 1e6;

/// Projected points are accepted when `|⟨I'(tu), tu⟩| / ‖tu‖²` is below this.
pub const NEHARI_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NehariCoefficients {
    pub quadratic: f64,
    pub poisson: f64,
    pub subcritical: Vec<f64>,
    pub exponents: Vec<f64>,
    pub critical: f64,
}

/// Scale `t > 0` placing `tu` on the Nehari manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NehariPoint {
    pub t: f64,
    pub nehari_residual: f64,
}

impl NehariCoefficients {
    /// `I(tu) = t²A/2 + t⁴B/4 - Σ t^{q_i} C_i/q_i - t⁶D/6`.
    pub fn ray_energy(&self, t: f64) -> f64 {
        let t2 = t * t;
        let mut e = 0.5 * t2 * self.quadratic + 0.25 * t2 * t2 * self.poisson;
        for (c, q) in self.subcritical.iter().zip(&self.exponents) {
            e -= t.powf(*q) * c / q;
        }
        e - t2 * t2 * t2 * self.critical / 6.0
    }

    /// `f(t) - A` with `f(t) = -t²B + Σ t^{q_i-2} C_i + t⁴D`.
    ///
    /// `⟨I'(tu), tu⟩ = -t² (f(t) - A)`, so roots are Nehari scales.
    pub fn nehari_scalar(&self, t: f64) -> f64 {
        let t2 = t * t;
        let mut f = -t2 * self.poisson + t2 * t2 * self.critical;
        for (c, q) in self.subcritical.iter().zip(&self.exponents) {
            f += t.powf(q - 2.0) * c;
        }
        f - self.quadratic
    }

    fn scalar_derivative(&self, t: f64) -> f64 {
        let mut d = -2.0 * t * self.poisson + 4.0 * t * t * t * self.critical;
        for (c, q) in self.subcritical.iter().zip(&self.exponents) {
            d += (q - 2.0) * t.powf(q - 3.0) * c;
        }
        d
    }

    /// `|⟨I'(tu), tu⟩| / ‖tu‖²`.
    pub fn residual_at(&self, t: f64) -> f64 {
        self.nehari_scalar(t).abs() / self.quadratic
    }

    /// `d/dt I(tu)`.
    pub fn ray_derivative(&self, t: f64) -> f64 {
        -t * self.nehari_scalar(t)
    }

    /// Coefficients of the ray through `s·u`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            quadratic: self.quadratic * s * s,
            poisson: self.poisson * s.powi(4),
            subcritical: self.subcritical.iter().zip(&self.exponents).map(|(c, q)| c * s.powf(*q)).collect(),
            exponents: self.exponents.clone(),
            critical: self.critical * s.powi(6),
        }
    }

    fn bracket(&self) -> Result<(f64, f64)> {
        if !(self.quadratic > 0.0) {
            return Err(Error::ZeroField);
        }
        let mut lo = BRACKET_LOW;
        // f(t) → 0 as t → 0, so the scalar tends to -A < 0; the loop only
        // guards against round-off for huge subcritical weights.
        while self.nehari_scalar(lo) >= 0.0 {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::DegenerateProjection { lo, hi: BRACKET_HIGH });
            }
        }
        let mut hi = BRACKET_HIGH.max(lo);
        while self.nehari_scalar(hi) <= 0.0 {
            hi *= 2.0;
            if hi > BRACKET_CAP {
                return Err(Error::DegenerateProjection { lo, hi: BRACKET_CAP });
            }
        }
        Ok((lo, hi))
    }

    /// Root of the Nehari scalar by safeguarded Newton iteration.
    pub fn project(&self) -> Result<NehariPoint> {
        let (mut lo, mut hi) = self.bracket()?;
        let mut t = if lo < 1.0 && 1.0 < hi { 1.0 } else { 0.5 * (lo + hi) };
        for _ in 0..200 {
            let g = self.nehari_scalar(t);
            if g == 0.0 {
                break;
            }
            if g < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let d = self.scalar_derivative(t);
            let newton = t - g / d;
            let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            let done = (next - t).abs() <= 4.0 * f64::EPSILON * t || hi - lo <= 4.0 * f64::EPSILON * hi;
            t = next;
            if done {
                break;
            }
        }
        Ok(NehariPoint { t, nehari_residual: self.residual_at(t) })
    }

    /// Root of the Nehari scalar by bisection alone.
    pub fn project_bisection(&self) -> Result<NehariPoint> {
        let (mut lo, mut hi) = self.bracket()?;
        while hi - lo > 2.0 * f64::EPSILON * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.nehari_scalar(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = if self.nehari_scalar(lo).abs() < self.nehari_scalar(hi).abs() { lo } else { hi };
        Ok(NehariPoint { t, nehari_residual: self.residual_at(t) })
    }

    /// Maximizer of `t ↦ I(tu)` found without the projection: a dense scan
    /// of `[0, t_max]` followed by bisection on the sign of `d/dt I(tu)` in
    /// the cells adjacent to the best sample.
    pub fn ray_argmax(&self, t_max: f64, samples: usize) -> f64 {
        let step = t_max / samples as f64;
        let (mut best, mut best_e) = (step, f64::NEG_INFINITY);
        for i in 1..=samples {
            let t = i as f64 * step;
            let e = self.ray_energy(t);
            if e > best_e {
                best = t;
                best_e = e;
            }
        }
        let (mut lo, mut hi) = ((best - step).max(0.5 * step), best + step);
        if self.ray_derivative(lo) <= 0.0 || self.ray_derivative(hi) >= 0.0 {
            return best;
        }
        while hi - lo > 4.0 * f64::EPSILON * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.ray_derivative(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
