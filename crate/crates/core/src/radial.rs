//! Radial ground states of autonomous problems
//!
//! ```text
//! -Δu + c (1/|x| * u²) u + a u = Σ b_i |u|^{q_i-2} u + k |u|⁴ u
//! ```
//!
//! The unknown is `w = r u` on the nodes of a [`RadialGrid`] with
//! `w(0) = w(r_max) = 0`; then `∫|∇u|² = 4π∫w'² dr` and `-Δ` becomes a
//! tridiagonal second difference.

use crate::coulomb::radial_potential_of_weights;
use crate::descent::{minimize, NehariProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::field::{RadialField, RadialGrid};
use crate::nehari::NehariCoefficients;
use crate::potentials::Frozen;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialConfig {
    pub n_r: usize,
    pub r_max: f64,
    /// Widths of the Gaussian initial guesses, in units of `a^{-1/2}`.
    pub widths: Vec<f64>,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for RadialConfig {
    fn default() -> Self {
        Self { n_r: 16_384, r_max: 60.0, widths: vec![0.5, 1.0, 2.0], max_iters: 20_000, tol: 1e-9 }
    }
}

/// Restarts whose energies differ by more than this (relative) flag the
/// problem as multimodal.
pub const MULTIMODAL_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub u: RadialField,
    /// The least energy `c` found.
    pub energy: f64,
    pub nehari_residual: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final energy of every restart, in the order of the configured widths.
    pub restart_energies: Vec<f64>,
    pub multimodal: bool,
}

/// Checks `a > 0`, `(j - i₀) b_j >= 0` for `j ≠ i₀` (the critical weight
/// counts as index `m + 1`), and that some attractive weight is positive.
pub fn check_parameters(f: &Frozen) -> Result<()> {
    let finite = [f.a, f.k, f.coulomb].iter().chain(&f.b).all(|v| v.is_finite());
    if !finite {
        return Err(Error::InvalidParameters("coefficients must be finite".into()));
    }
    if !(f.a > 0.0) {
        return Err(Error::InvalidParameters(format!("a = {} must be positive", f.a)));
    }
    if f.coulomb < 0.0 {
        return Err(Error::InvalidParameters(format!("Poisson weight {} is negative", f.coulomb)));
    }
    if f.b.len() != f.exponents.len() || f.pivot >= f.b.len() {
        return Err(Error::InvalidParameters("coefficient and exponent lists disagree".into()));
    }
    for (j, &b) in f.b.iter().enumerate() {
        if (j as f64 - f.pivot as f64) * b < 0.0 {
            return Err(Error::InvalidParameters(format!("b_{} = {b} has the wrong sign", j + 1)));
        }
    }
    if f.k < 0.0 {
        return Err(Error::InvalidParameters(format!("critical weight {} is negative", f.k)));
    }
    if f.k == 0.0 && f.b[f.pivot..].iter().all(|&b| b <= 0.0) {
        return Err(Error::InvalidParameters("no attractive term is positive".into()));
    }
    Ok(())
}

/// Discrete radial energy for fixed coefficients.
#[derive(Debug, Clone)]
pub struct RadialProblem {
    grid: RadialGrid,
    r: Vec<f64>,
    params: Frozen,
    /// `r^{2-q_i}` per term, and `r^{-4}`.
    q_weights: Vec<Vec<f64>>,
    k_weight: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct RadialEval {
    coefficients: NehariCoefficients,
    phi: Vec<f64>,
}

impl RadialProblem {
    pub fn new(params: &Frozen, grid: RadialGrid) -> Result<Self> {
        check_parameters(params)?;
        let r = grid.nodes();
        let q_weights = params.exponents.iter().map(|q| r.iter().map(|x| x.powf(2.0 - q)).collect()).collect();
        let k_weight = r.iter().map(|x| x.powi(-4)).collect();
        Ok(Self { grid, r, params: params.clone(), q_weights, k_weight })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    fn measure(&self) -> f64 {
        4.0 * PI * self.grid.step()
    }

    /// Ray coefficients of the field `u` (not `w`).
    pub fn coefficients_of(&self, u: &RadialField) -> NehariCoefficients {
        let w: Vec<f64> = u.values().iter().zip(&self.r).map(|(v, r)| v * r).collect();
        self.eval(&w).coefficients
    }

    fn eval(&self, w: &[f64]) -> RadialEval {
        let dr = self.grid.step();
        let mu = self.measure();
        let n = w.len();
        let mut grad = 0.0;
        let mut prev = 0.0;
        for &x in w.iter().chain(std::iter::once(&0.0)) {
            grad += (x - prev) * (x - prev);
            prev = x;
        }
        let l2: f64 = w.iter().map(|x| x * x).sum();
        let quadratic = 4.0 * PI * grad / dr + self.params.a * mu * l2;

        let rho: Vec<f64> = w.iter().map(|x| mu * x * x).collect();
        let phi = radial_potential_of_weights(&self.r, &rho);
        let poisson = self.params.coulomb * phi.iter().zip(&rho).map(|(p, q)| p * q).sum::<f64>();

        let subcritical = self
            .params
            .b
            .iter()
            .zip(&self.params.exponents)
            .zip(&self.q_weights)
            .map(|((b, q), wt)| b * mu * (0..n).map(|j| wt[j] * w[j].abs().powf(*q)).sum::<f64>())
            .collect();
        let critical = self.params.k * mu * (0..n).map(|j| self.k_weight[j] * w[j].powi(6)).sum::<f64>();
        RadialEval {
            coefficients: NehariCoefficients {
                quadratic,
                poisson,
                subcritical,
                exponents: self.params.exponents.clone(),
                critical,
            },
            phi,
        }
    }

    /// Solves `(-D² + a) x = f` with the Thomas algorithm.
    fn shifted_solve(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let dr2 = self.grid.step().powi(2);
        let diag = 2.0 / dr2 + self.params.a;
        let off = -1.0 / dr2;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = off / diag;
        d[0] = f[0] / diag;
        for i in 1..n {
            let m = diag - off * c[i - 1];
            c[i] = off / m;
            d[i] = (f[i] - off * d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }

    fn initial_guess(&self, width: f64) -> Vec<f64> {
        let s = width / self.params.a.sqrt();
        self.r.iter().map(|r| r * (-0.5 * r * r / (s * s)).exp()).collect()
    }

    fn to_field(&self, w: &[f64]) -> RadialField {
        let u = w.iter().zip(&self.r).map(|(x, r)| x / r).collect();
        RadialField::new(self.grid, u).expect("iterates stay finite")
    }

    /// Least-energy radial solution over the configured restarts.
    pub fn solve(&self, cfg: &RadialConfig) -> Result<RadialSolution> {
        if cfg.widths.is_empty() {
            return Err(Error::InvalidArgument("at least one initial width is required".into()));
        }
        let descent_cfg =
            SolverConfig { max_iters: cfg.max_iters, tol: cfg.tol, energy_tol: 1e-13, ..SolverConfig::default() };
        let mut best: Option<RadialSolution> = None;
        let mut energies = Vec::with_capacity(cfg.widths.len());
        for &width in &cfg.widths {
            let run = minimize(self, self.initial_guess(width), &descent_cfg, |_, _| {})?;
            energies.push(run.energy);
            let better = best.as_ref().map_or(true, |b| run.energy < b.energy);
            if better {
                best = Some(RadialSolution {
                    u: self.to_field(&run.u),
                    energy: run.energy,
                    nehari_residual: run.nehari_residual,
                    el_residual: run.el_residual,
                    iterations: run.iterations,
                    converged: run.converged,
                    restart_energies: Vec::new(),
                    multimodal: false,
                });
            }
        }
        let mut sol = best.expect("at least one restart");
        let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        sol.multimodal = hi - lo > MULTIMODAL_TOL * lo.abs().max(1.0);
        sol.restart_energies = energies;
        if !sol.converged {
            return Err(Error::NotConverged { iterations: sol.iterations, residual: sol.el_residual });
        }
        Ok(sol)
    }
}

impl NehariProblem for RadialProblem {
    type Eval = RadialEval;

    fn evaluate(&self, w: &[f64]) -> Result<RadialEval> {
        Ok(self.eval(w))
    }

    fn coefficients(eval: &RadialEval) -> &NehariCoefficients {
        &eval.coefficients
    }

    fn scale(eval: &RadialEval, s: f64) -> RadialEval {
        RadialEval {
            coefficients: eval.coefficients.scaled(s),
            phi: eval.phi.iter().map(|p| p * s * s).collect(),
        }
    }

    /// `-D²w + a w + c φ w - Σ b r^{2-q}|w|^{q-2}w - k r^{-4} w⁵`, the
    /// gradient for the inner product `4π Σ · Δr`.
    fn residual(&self, w: &[f64], eval: &RadialEval) -> Vec<f64> {
        let dr2 = self.grid.step().powi(2);
        let n = w.len();
        let p = &self.params;
        (0..n)
            .map(|j| {
                let left = if j > 0 { w[j - 1] } else { 0.0 };
                let right = if j + 1 < n { w[j + 1] } else { 0.0 };
                let x = w[j];
                let mut r = (2.0 * x - left - right) / dr2 + p.a * x + p.coulomb * eval.phi[j] * x;
                for ((b, q), wt) in p.b.iter().zip(&p.exponents).zip(&self.q_weights) {
                    r -= b * wt[j] * x.signum() * x.abs().powf(q - 1.0);
                }
                r - p.k * self.k_weight[j] * x.powi(5)
            })
            .collect()
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        self.shifted_solve(r)
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.measure() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }
}

/// Radial ground state and its energy `c` for frozen coefficients.
pub fn radial_ground_state(params: &Frozen, cfg: &RadialConfig) -> Result<RadialSolution> {
    let grid = RadialGrid::new(cfg.n_r, cfg.r_max)?;
    RadialProblem::new(params, grid)?.solve(cfg)
}
