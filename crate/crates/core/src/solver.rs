//! Positive ground states on the 3D grid.

use crate::descent::{minimize, LogRow, NehariProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::field::{Field3, Grid3};
use crate::functional::{EnergyBreakdown, Evaluation, Functional};
use crate::nehari::NehariCoefficients;
use crate::potentials::PotentialSet;
use rayon::prelude::*;
use serde::Serialize;

/// Smallest accepted `‖u‖_ε`; anything below indicates collapse to zero.
pub const NORM_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub u: Field3,
    pub energy: f64,
    pub breakdown: EnergyBreakdown,
    pub nehari_residual: f64,
    /// `‖r‖₂ / ‖u‖_ε`.
    pub el_residual: f64,
    /// `‖u‖_ε`.
    pub norm: f64,
    /// Grid coordinates of the global maximum, refined to sub-cell accuracy.
    pub max_point: [f64; 3],
    /// The same point in original coordinates, `ε x + shift`.
    pub max_point_original: [f64; 3],
    pub positive: bool,
    pub converged: bool,
    pub iterations: usize,
    /// Largest boundary value relative to the maximum.
    pub boundary_ratio: f64,
    pub log: Vec<LogRow>,
}

impl GroundState {
    /// Iteration log as CSV with header `iter,energy,el_residual,step`.
    pub fn log_csv(&self) -> String {
        let mut out = String::from("iter,energy,el_residual,step\n");
        for row in &self.log {
            out.push_str(&format!("{},{:.17e},{:.17e},{:.17e}\n", row.iter, row.energy, row.el_residual, row.step));
        }
        out
    }
}

/// Summary of one multistart seed.
#[derive(Debug, Clone, Serialize)]
pub struct SeedOutcome {
    /// Seed center in original coordinates.
    pub center: [f64; 3],
    pub energy: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

struct Problem3<'a> {
    functional: &'a Functional,
    shift: f64,
}

impl NehariProblem for Problem3<'_> {
    type Eval = Evaluation;

    fn evaluate(&self, u: &[f64]) -> Result<Evaluation> {
        let f = Field3::from_vec_unchecked(*self.functional.grid(), u.to_vec());
        self.functional.evaluate(&f)
    }

    fn coefficients(eval: &Evaluation) -> &NehariCoefficients {
        &eval.coefficients
    }

    fn scale(eval: &Evaluation, s: f64) -> Evaluation {
        eval.scaled(s)
    }

    fn residual(&self, u: &[f64], eval: &Evaluation) -> Vec<f64> {
        let f = Field3::from_vec_unchecked(*self.functional.grid(), u.to_vec());
        self.functional.residual_from(&f, eval).into_values()
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        self.functional.spectral().solve_shifted(r, self.shift)
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.functional.grid().cell_volume()
    }
}

/// The rescaled problem at one `ε`, with operators built once.
#[derive(Debug, Clone)]
pub struct Solver {
    functional: Functional,
    eps: f64,
    shift: [f64; 3],
}

impl Solver {
    pub fn new(p: &PotentialSet, grid: Grid3, eps: f64) -> Result<Self> {
        Self::centered(p, grid, eps, [0.0; 3])
    }

    /// Weights sampled at `εx + shift`.
    pub fn centered(p: &PotentialSet, grid: Grid3, eps: f64, shift: [f64; 3]) -> Result<Self> {
        Ok(Self { functional: Functional::for_problem(p, &grid, eps, shift)?, eps, shift })
    }

    pub fn from_functional(functional: Functional, eps: f64, shift: [f64; 3]) -> Self {
        Self { functional, eps, shift }
    }

    pub fn functional(&self) -> &Functional {
        &self.functional
    }

    pub fn grid(&self) -> &Grid3 {
        self.functional.grid()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Rescaled grid coordinates of an original-space point.
    pub fn to_grid(&self, s: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|i| (s[i] - self.shift[i]) / self.eps)
    }

    pub fn to_original(&self, x: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|i| self.eps * x[i] + self.shift[i])
    }

    /// Gaussian bump centered at the grid point `center`.
    pub fn seed(&self, center: [f64; 3], width: f64) -> Field3 {
        let g = *self.grid();
        let vals = g
            .points()
            .map(|p| {
                let d2: f64 = (0..3).map(|i| (p[i] - center[i]).powi(2)).sum();
                (-0.5 * d2 / (width * width)).exp()
            })
            .collect();
        Field3::from_vec_unchecked(g, vals)
    }

    pub fn minimize(&self, init: &Field3, cfg: &SolverConfig) -> Result<GroundState> {
        self.minimize_observed(init, cfg, |_, _| {})
    }

    /// As [`Solver::minimize`], calling `observe` on every accepted iterate.
    pub fn minimize_observed(
        &self,
        init: &Field3,
        cfg: &SolverConfig,
        observe: impl FnMut(usize, &[f64]),
    ) -> Result<GroundState> {
        cfg.validate()?;
        if init.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        if init.values().iter().all(|&v| v <= 0.0) {
            return Err(Error::ZeroField);
        }
        let problem = Problem3 { functional: &self.functional, shift: self.functional.coefficients().v_mean() };
        let run = minimize(&problem, init.values().to_vec(), cfg, observe)?;
        let u = Field3::from_vec_unchecked(*self.grid(), run.u);
        let (imax, vmax) = u.argmax();
        let max_point = refine_max(&u, imax);
        let n = self.grid().n();
        let central_min = u
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid().multi_index(*i).iter().all(|&j| j >= n / 4 && j < 3 * n / 4))
            .map(|(_, &v)| v)
            .fold(f64::INFINITY, f64::min);
        let norm = run.eval.coefficients.quadratic.sqrt();
        Ok(GroundState {
            breakdown: run.eval.breakdown(),
            energy: run.energy,
            nehari_residual: run.nehari_residual,
            el_residual: run.el_residual,
            norm,
            max_point,
            max_point_original: self.to_original(max_point),
            positive: u.min() >= 0.0 && central_min > 0.0 && norm >= NORM_FLOOR,
            converged: run.converged,
            iterations: run.iterations,
            boundary_ratio: u.boundary_max_abs() / vmax,
            log: run.log,
            u,
        })
    }

    /// Runs from Gaussian seeds centered at the given original-space points
    /// (deduplicated to one per grid cell) and keeps the lowest energy,
    /// preferring converged runs.
    pub fn multistart(
        &self,
        centers: &[[f64; 3]],
        width: f64,
        cfg: &SolverConfig,
    ) -> Result<(GroundState, Vec<SeedOutcome>)> {
        if centers.is_empty() {
            return Err(Error::InvalidArgument("multistart needs at least one seed".into()));
        }
        let mut unique: Vec<([f64; 3], usize)> = Vec::new();
        for &c in centers {
            let idx = self.grid().nearest(self.to_grid(c));
            if !unique.iter().any(|(_, i)| *i == idx) {
                unique.push((c, idx));
            }
        }
        let runs: Vec<Result<GroundState>> = unique
            .par_iter()
            .map(|(c, _)| self.minimize(&self.seed(self.to_grid(*c), width), cfg))
            .collect();
        let outcomes = unique
            .iter()
            .zip(&runs)
            .map(|((c, _), r)| match r {
                Ok(gs) => SeedOutcome { center: *c, energy: Some(gs.energy), converged: gs.converged, error: None },
                Err(e) => SeedOutcome { center: *c, energy: None, converged: false, error: Some(e.to_string()) },
            })
            .collect();
        let best = runs
            .into_iter()
            .flatten()
            .min_by(|a, b| (!a.converged, a.energy).partial_cmp(&(!b.converged, b.energy)).expect("finite energies"));
        best.map(|gs| (gs, outcomes)).ok_or(Error::AllStartsFailed)
    }
}

/// Quadratic refinement of a grid maximum along each axis.
fn refine_max(u: &Field3, idx: usize) -> [f64; 3] {
    let g = u.grid();
    let n = g.n();
    let base = g.multi_index(idx);
    let mut p = base.map(|i| g.coord(i));
    for axis in 0..3 {
        let i = base[axis];
        if i == 0 || i == n - 1 {
            continue;
        }
        let at = |j: usize| {
            let mut m = base;
            m[axis] = j;
            u.values()[g.index(m[0], m[1], m[2])]
        };
        let (l, c, r) = (at(i - 1), at(i), at(i + 1));
        let denom = l - 2.0 * c + r;
        if denom < 0.0 {
            p[axis] += 0.5 * (l - r) / denom * g.spacing();
        }
    }
    p
}

/// Ground state of `P` at scale `ε` from `init`, with weights sampled on
/// the grid of `init`.
pub fn minimize_nehari(p: &PotentialSet, eps: f64, init: &Field3, cfg: &SolverConfig) -> Result<GroundState> {
    Solver::new(p, *init.grid(), eps)?.minimize(init, cfg)
}
