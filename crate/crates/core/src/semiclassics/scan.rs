//! Concentration diagnostics along a decreasing sequence of `ε`.

use super::decay::{decay_fit, DecayFit};
use super::gmap::GroundEnergyMap;
use crate::descent::SolverConfig;
use crate::error::{Error, Result};
use crate::field::{Field3, Grid3};
use crate::potentials::PotentialSet;
use crate::radial::{radial_ground_state, RadialConfig, RadialSolution};
use crate::solver::{GroundState, SeedOutcome, Solver};
use serde::Serialize;

/// Seeds whose grid coordinates exceed this fraction of the half-width are dropped.
const SEED_WINDOW: f64 = 0.75;

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub eps: f64,
    pub c_eps: f64,
    /// Maximum point `x_ε` in original coordinates.
    pub max_point: [f64; 3],
    /// `dist(x_ε, 𝒢)`; `None` for translation-invariant weights.
    pub dist_to_argmin: Option<f64>,
    /// The same distance in units of the original-space cell `ε h`.
    pub dist_cells: Option<f64>,
    /// Relative L² distance to the limit profile centered at the maximum.
    pub profile_error: Option<f64>,
    /// Level of the problem frozen at `x_ε`.
    pub limit_level: Option<f64>,
    pub decay: Option<DecayFit>,
    pub decay_error: Option<String>,
    /// `¼∫φ_u h u²` of the rescaled state.
    pub poisson_energy: f64,
    pub converged: bool,
    pub positive: bool,
    pub el_residual: f64,
    pub nehari_residual: f64,
    pub iterations: usize,
    pub boundary_ratio: f64,
    pub seeds: Vec<SeedOutcome>,
}

#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub report: ConcentrationReport,
    pub state: GroundState,
}

/// Parameters of a scan besides the potentials.
#[derive(Debug, Clone)]
pub struct ScanSetup {
    pub grid: Grid3,
    pub solver: SolverConfig,
    pub radial: RadialConfig,
    /// Width of the Gaussian seeds in rescaled units.
    pub seed_width: f64,
}

/// Relative L² distance between `u` and the radial profile centered at `center`.
pub fn profile_error(u: &Field3, profile: &RadialSolution, center: [f64; 3]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (p, &v) in u.grid().points().zip(u.values()) {
        let r = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) + (p[2] - center[2]).powi(2)).sqrt();
        let w = if r <= profile.u.grid().r_max() { profile.u.eval(r) } else { 0.0 };
        num += (v - w).powi(2);
        den += w * w;
    }
    (num / den).sqrt()
}

/// Window center: the lowest sample of `G`, or the origin for constant weights.
pub fn scan_center(p: &PotentialSet, gmap: &GroundEnergyMap) -> [f64; 3] {
    if p.is_constant() {
        return [0.0; 3];
    }
    gmap.lowest(1).first().copied().unwrap_or([0.0; 3])
}

/// Solves at each `ε` from multistart seeds at the `restarts` lowest samples
/// of `G` and at the maximum point of `K`, on a window centered per
/// [`scan_center`].
pub fn epsilon_scan(
    p: &PotentialSet,
    eps_list: &[f64],
    setup: &ScanSetup,
    gmap: &GroundEnergyMap,
) -> Result<Vec<ScanEntry>> {
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("ε list must be nonempty and positive".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("ε list must be strictly decreasing".into()));
    }
    setup.solver.validate()?;
    let shift = scan_center(p, gmap);
    let constant = p.is_constant();
    let mut seeds = gmap.lowest(setup.solver.restarts);
    seeds.push(p.k_max_point());
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let solver = Solver::centered(p, setup.grid, eps, shift)?;
        let limit = SEED_WINDOW * setup.grid.half_width();
        let mut centers: Vec<[f64; 3]> =
            seeds.iter().copied().filter(|s| solver.to_grid(*s).iter().all(|c| c.abs() <= limit)).collect();
        if centers.is_empty() {
            centers.push(shift);
        }
        let (state, outcomes) = solver.multistart(&centers, setup.seed_width, &setup.solver)?;
        out.push(ScanEntry { report: report(p, eps, &state, outcomes, gmap, constant, setup)?, state });
    }
    Ok(out)
}

fn report(
    p: &PotentialSet,
    eps: f64,
    state: &GroundState,
    seeds: Vec<SeedOutcome>,
    gmap: &GroundEnergyMap,
    constant: bool,
    setup: &ScanSetup,
) -> Result<ConcentrationReport> {
    let x = state.max_point_original;
    let dist = (!constant).then(|| gmap.dist_to_argmin(x));
    let cell = eps * setup.grid.spacing();
    let limit = radial_ground_state(&p.frozen_at(x), &setup.radial).ok();
    let (decay, decay_error) = match decay_fit(&state.u, state.max_point) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ConcentrationReport {
        eps,
        c_eps: state.energy,
        max_point: x,
        dist_to_argmin: dist,
        dist_cells: dist.map(|d| d / cell),
        profile_error: limit.as_ref().map(|l| profile_error(&state.u, l, state.max_point)),
        limit_level: limit.as_ref().map(|l| l.energy),
        decay,
        decay_error,
        poisson_energy: state.breakdown.poisson,
        converged: state.converged,
        positive: state.positive,
        el_residual: state.el_residual,
        nehari_residual: state.nehari_residual,
        iterations: state.iterations,
        boundary_ratio: state.boundary_ratio,
        seeds,
    })
}

/// `eps,c_eps,xeps_x,xeps_y,xeps_z,dist_to_G,profile_err,mu,C,fit_q`, with
/// `n/a` for quantities that are undefined or were not obtained.
pub fn scan_csv(reports: &[ConcentrationReport]) -> String {
    let f = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.12e}"));
    let mut out = String::from("eps,c_eps,xeps_x,xeps_y,xeps_z,dist_to_G,profile_err,mu,C,fit_q\n");
    for r in reports {
        out.push_str(&format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{},{},{}\n",
            r.eps,
            r.c_eps,
            r.max_point[0],
            r.max_point[1],
            r.max_point[2],
            f(r.dist_to_argmin),
            f(r.profile_error),
            f(r.decay.map(|d| d.mu)),
            f(r.decay.map(|d| d.c)),
            f(r.decay.map(|d| d.fit_quality)),
        ));
    }
    out
}
