//! The rescaled energy
//!
//! ```text
//! I(u) = ½∫(|∇u|² + V_ε u²) + ¼∫φ_u h_ε u² - Σ 1/q_i ∫Q_{i,ε}|u|^{q_i} - ⅙∫K_ε u⁶
//! ```
//!
//! with `φ_u = 1/|x| * (h_ε u²)` and `W_ε(x) = W(εx + shift)` for each weight.

use crate::coulomb::CoulombKernel;
use crate::error::{Error, Result};
use crate::field::{Field3, Grid3};
use crate::nehari::{NehariCoefficients, NehariPoint};
use crate::potentials::{Coefficients, PotentialSet};
use crate::spectral::Spectral;
use serde::Serialize;
use std::sync::Arc;

/// The energy split into its terms, signs included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    /// `½‖u‖_ε²`.
    pub quadratic: f64,
    /// `¼∫φ_u h u²`.
    pub poisson: f64,
    /// `-1/q_i ∫Q_i|u|^{q_i}` for each `i`.
    pub subcritical: Vec<f64>,
    /// `-⅙∫K u⁶`.
    pub critical: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn from_coefficients(c: &NehariCoefficients) -> Self {
        let quadratic = 0.5 * c.quadratic;
        let poisson = 0.25 * c.poisson;
        let subcritical: Vec<f64> = c.subcritical.iter().zip(&c.exponents).map(|(v, q)| -v / q).collect();
        let critical = -c.critical / 6.0;
        let total = quadratic + poisson + subcritical.iter().sum::<f64>() + critical;
        Self { quadratic, poisson, subcritical, critical, total }
    }
}

/// Everything computed from one field: ray coefficients, `φ_u` and `-Δu`.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub coefficients: NehariCoefficients,
    pub(crate) phi: Vec<f64>,
    pub(crate) neg_lap: Vec<f64>,
}

impl Evaluation {
    pub fn energy(&self) -> f64 {
        EnergyBreakdown::from_coefficients(&self.coefficients).total
    }

    pub fn breakdown(&self) -> EnergyBreakdown {
        EnergyBreakdown::from_coefficients(&self.coefficients)
    }

    /// Evaluation of `s·u`, by homogeneity.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coefficients: self.coefficients.scaled(s),
            phi: self.phi.iter().map(|v| v * s * s).collect(),
            neg_lap: self.neg_lap.iter().map(|v| v * s).collect(),
        }
    }
}

/// Energy, gradient and Nehari projection for fixed sampled weights.
#[derive(Debug, Clone)]
pub struct Functional {
    coeffs: Coefficients,
    spectral: Arc<Spectral>,
    kernel: Arc<CoulombKernel>,
}

impl Functional {
    pub fn new(coeffs: Coefficients) -> Self {
        let grid = *coeffs.grid();
        Self::with_operators(coeffs, Arc::new(Spectral::new(grid)), Arc::new(CoulombKernel::new(grid)))
    }

    /// Shares prebuilt transforms, e.g. across multistart runs.
    pub fn with_operators(coeffs: Coefficients, spectral: Arc<Spectral>, kernel: Arc<CoulombKernel>) -> Self {
        assert_eq!(spectral.grid(), coeffs.grid());
        assert_eq!(kernel.grid(), coeffs.grid());
        Self { coeffs, spectral, kernel }
    }

    /// Weights of `P` at `εx + shift` on `grid`.
    pub fn for_problem(p: &PotentialSet, grid: &Grid3, eps: f64, shift: [f64; 3]) -> Result<Self> {
        Ok(Self::new(p.sample(grid, eps, shift)?))
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn grid(&self) -> &Grid3 {
        self.coeffs.grid()
    }

    pub fn spectral(&self) -> &Arc<Spectral> {
        &self.spectral
    }

    pub fn kernel(&self) -> &Arc<CoulombKernel> {
        &self.kernel
    }

    fn check(&self, u: &Field3) -> Result<()> {
        if u.grid() == self.grid() {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn evaluate(&self, u: &Field3) -> Result<Evaluation> {
        self.check(u)?;
        let c = &self.coeffs;
        let dv = self.grid().cell_volume();
        let vals = u.values();
        let neg_lap = self.spectral.neg_laplacian(vals);
        let phi = self.kernel.potential_of_density(&self.kernel.density(u, c.h.as_ref())?);

        let mut quadratic = 0.0;
        let mut poisson = 0.0;
        let mut critical = 0.0;
        for i in 0..vals.len() {
            let x = vals[i];
            let x2 = x * x;
            let hw = c.h.as_ref().map_or(1.0, |h| h.values()[i]);
            quadratic += neg_lap[i] * x + c.v.values()[i] * x2;
            poisson += phi[i] * (hw * x2);
            critical += c.k.values()[i] * x2 * x2 * x2;
        }
        let subcritical = c
            .q
            .iter()
            .zip(&c.exponents)
            .map(|(q, e)| q.values().iter().zip(vals).map(|(w, x)| w * x.abs().powf(*e)).sum::<f64>() * dv)
            .collect();
        Ok(Evaluation {
            coefficients: NehariCoefficients {
                quadratic: quadratic * dv,
                poisson: poisson * dv,
                subcritical,
                exponents: c.exponents.clone(),
                critical: critical * dv,
            },
            phi,
            neg_lap,
        })
    }

    pub fn energy(&self, u: &Field3) -> Result<EnergyBreakdown> {
        Ok(self.evaluate(u)?.breakdown())
    }

    /// `‖u‖_ε² = ∫|∇u|² + ∫V_ε u²`.
    pub fn norm_sq(&self, u: &Field3) -> Result<f64> {
        crate::field::h1_norm_sq(u, &self.coeffs.v)
    }

    /// Euler–Lagrange defect, the L² gradient of the energy.
    pub fn residual(&self, u: &Field3) -> Result<Field3> {
        let ev = self.evaluate(u)?;
        Ok(self.residual_from(u, &ev))
    }

    pub(crate) fn residual_from(&self, u: &Field3, ev: &Evaluation) -> Field3 {
        let c = &self.coeffs;
        let vals = u.values();
        let out = (0..vals.len())
            .map(|i| {
                let x = vals[i];
                let hw = c.h.as_ref().map_or(1.0, |h| h.values()[i]);
                let mut r = ev.neg_lap[i] + hw * ev.phi[i] * x + c.v.values()[i] * x;
                for (q, e) in c.q.iter().zip(&c.exponents) {
                    r -= q.values()[i] * x.signum() * x.abs().powf(e - 1.0);
                }
                r - c.k.values()[i] * x.powi(5)
            })
            .collect();
        Field3::from_vec_unchecked(*u.grid(), out)
    }

    /// `f(t) - ‖u‖²` for the ray through `u`.
    pub fn nehari_scalar(&self, u: &Field3, t: f64) -> Result<f64> {
        if u.is_zero() {
            return Err(Error::ZeroField);
        }
        Ok(self.evaluate(u)?.coefficients.nehari_scalar(t))
    }

    pub fn project(&self, u: &Field3) -> Result<NehariPoint> {
        if u.is_zero() {
            return Err(Error::ZeroField);
        }
        self.evaluate(u)?.coefficients.project()
    }

    /// `I(u) - (½ - 1/q_{i₀})‖u‖²` for `u` on the Nehari manifold.
    pub fn coercivity_gap(&self, u: &Field3) -> Result<f64> {
        let ev = self.evaluate(u)?;
        let c = &ev.coefficients;
        let residual = c.residual_at(1.0);
        if residual > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "field is not on the Nehari manifold (residual {residual:e})"
            )));
        }
        let q0 = c.exponents[self.coeffs.pivot];
        Ok(ev.energy() - (0.5 - 1.0 / q0) * c.quadratic)
    }
}

/// Energy of `u` for the weights of `P` at scale `ε`.
pub fn energy(u: &Field3, p: &PotentialSet, eps: f64) -> Result<EnergyBreakdown> {
    Functional::for_problem(p, u.grid(), eps, [0.0; 3])?.energy(u)
}

pub fn residual(u: &Field3, p: &PotentialSet, eps: f64) -> Result<Field3> {
    Functional::for_problem(p, u.grid(), eps, [0.0; 3])?.residual(u)
}

pub fn nehari_scalar(u: &Field3, p: &PotentialSet, eps: f64, t: f64) -> Result<f64> {
    Functional::for_problem(p, u.grid(), eps, [0.0; 3])?.nehari_scalar(u, t)
}

pub fn nehari_project(u: &Field3, p: &PotentialSet, eps: f64) -> Result<NehariPoint> {
    Functional::for_problem(p, u.grid(), eps, [0.0; 3])?.project(u)
}

pub fn coercivity_gap(u: &Field3, p: &PotentialSet, eps: f64) -> Result<f64> {
    Functional::for_problem(p, u.grid(), eps, [0.0; 3])?.coercivity_gap(u)
}
