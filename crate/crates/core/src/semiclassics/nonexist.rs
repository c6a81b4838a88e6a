//! Evidence for the absence of ground states when `V` stays above its limit:
//! the level matches `c_∞` and minimizing sequences drift away.

use super::gmap::limit_level;
use crate::descent::SolverConfig;
use crate::error::Result;
use crate::field::Grid3;
use crate::potentials::PotentialSet;
use crate::radial::RadialConfig;
use crate::solver::Solver;
use serde::Serialize;

/// Relative gap `|c_ε - c_∞| / c_∞` under which the energy counts as
/// plateaued at the limit level.
pub const PLATEAU_TOL: f64 = 0.03;

pub const DRIFT_BLOCKS: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct NonexistenceReport {
    pub eps: f64,
    pub c_eps: f64,
    pub c_inf: f64,
    /// `|c_ε - c_∞| / c_∞`.
    pub rel_gap: f64,
    pub runaway: bool,
    /// Distance of the centroid from the window center, averaged over
    /// [`DRIFT_BLOCKS`] consecutive blocks of the second half of the
    /// iterations, is nondecreasing. Single iterates zigzag with the step
    /// length, so they are not compared directly.
    pub drift_monotone: bool,
    /// Net change of that distance over the run, in rescaled units.
    pub drift: f64,
    /// Energy within [`PLATEAU_TOL`] of `c_∞` while the residual stalled above tolerance.
    pub plateau: bool,
    pub converged: bool,
    pub el_residual: f64,
    pub iterations: usize,
    /// `|u|²`-weighted centroid per accepted iterate, original coordinates.
    pub centroids: Vec<[f64; 3]>,
    pub max_point: [f64; 3],
}

fn centroid(grid: &Grid3, u: &[f64]) -> [f64; 3] {
    let mut c = [0.0; 3];
    let mut m = 0.0;
    for (p, v) in grid.points().zip(u) {
        let w = v * v;
        m += w;
        for i in 0..3 {
            c[i] += w * p[i];
        }
    }
    c.map(|x| x / m)
}

/// Minimizes from a Gaussian seed at `seed` (original coordinates) on a
/// window centered at the origin and reports level and drift, without
/// checking any hypothesis on `p`. Used directly for control runs.
pub fn runaway_probe(
    p: &PotentialSet,
    eps: f64,
    grid: Grid3,
    cfg: &SolverConfig,
    radial: &RadialConfig,
    seed: [f64; 3],
    width: f64,
) -> Result<NonexistenceReport> {
    let c_inf = limit_level(p, radial)?;
    let solver = Solver::new(p, grid, eps)?;
    let mut path = Vec::new();
    let state = solver.minimize_observed(&solver.seed(solver.to_grid(seed), width), cfg, |_, u| {
        path.push(centroid(&grid, u));
    })?;
    let radius: Vec<f64> = path.iter().map(|c| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()).collect();
    let tail = &radius[radius.len() / 2..];
    let drift = radius.last().copied().unwrap_or(0.0) - radius.first().copied().unwrap_or(0.0);
    let drift_monotone = tail.len() >= 2 * DRIFT_BLOCKS && {
        let means: Vec<f64> = tail
            .chunks(tail.len().div_ceil(DRIFT_BLOCKS))
            .map(|b| b.iter().sum::<f64>() / b.len() as f64)
            .collect();
        means.windows(2).all(|w| w[1] >= w[0])
    };
    let rel_gap = (state.energy - c_inf).abs() / c_inf.abs();
    let plateau = rel_gap <= PLATEAU_TOL && !state.converged;
    let runaway = (drift_monotone && drift > grid.spacing()) || plateau;
    Ok(NonexistenceReport {
        eps,
        c_eps: state.energy,
        c_inf,
        rel_gap,
        runaway,
        drift_monotone,
        drift,
        plateau,
        converged: state.converged,
        el_residual: state.el_residual,
        iterations: state.iterations,
        centroids: path.iter().map(|c| solver.to_original(*c)).collect(),
        max_point: state.max_point_original,
    })
}

/// [`runaway_probe`] after checking that `V >= V_∞`, `Q_i <= Q_i^∞` and
/// the admissible forms of `h` hold on the sampled window.
pub fn nonexistence_probe(
    p: &PotentialSet,
    eps: f64,
    grid: Grid3,
    cfg: &SolverConfig,
    radial: &RadialConfig,
    seed: [f64; 3],
    width: f64,
) -> Result<NonexistenceReport> {
    p.validate_nonexistence((eps * grid.half_width()).max(1.0))?;
    runaway_probe(p, eps, grid, cfg, radial, seed, width)
}
