//! Nehari-projected, preconditioned gradient descent shared by the radial and
//! the 3D solvers.
//!
//! Each step is `u ← Π(max(u - τ P⁻¹ r(u), 0))` where `Π` rescales onto the
//! Nehari manifold. `τ` grows after accepted steps and is halved until the
//! Armijo condition holds, so the energy sequence never increases beyond the
//! roundoff of a single energy evaluation.

use crate::error::{Error, Result};
use crate::nehari::NehariCoefficients;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preconditioner {
    /// Plain L² gradient.
    Identity,
    /// `(-Δ + V̄)⁻¹` applied to the L² gradient.
    Sobolev,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Initial step length `τ₀`.
    pub step: f64,
    /// Factor applied to `τ` when a trial step is rejected.
    pub backtrack: f64,
    /// Factor applied to `τ` after an accepted step.
    pub growth: f64,
    /// Relative Euler–Lagrange tolerance `‖r‖₂ / ‖u‖_ε`.
    pub tol: f64,
    /// Relative energy decrease below which the energy counts as stalled.
    pub energy_tol: f64,
    pub preconditioner: Preconditioner,
    /// Number of multistart seeds taken from the lowest samples of `G`.
    pub restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            step: 1.0,
            backtrack: 0.5,
            growth: 1.5,
            tol: 1e-6,
            energy_tol: 1e-9,
            preconditioner: Preconditioner::Sobolev,
            restarts: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::Config { field: format!("solver.{field}"), msg: msg.into() });
        if self.max_iters < 1 {
            return bad("max_iters", "must be at least 1");
        }
        if !(self.step > 0.0) {
            return bad("step", "must be positive");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack", "must lie in (0, 1)");
        }
        if !(self.growth >= 1.0) {
            return bad("growth", "must be at least 1");
        }
        if !(self.tol > 0.0) {
            return bad("tol", "must be positive");
        }
        if !(self.energy_tol > 0.0) {
            return bad("energy_tol", "must be positive");
        }
        if self.restarts < 1 {
            return bad("restarts", "must be at least 1");
        }
        Ok(())
    }
}

/// One line of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRow {
    pub iter: usize,
    pub energy: f64,
    pub el_residual: f64,
    pub step: f64,
}

pub(crate) trait NehariProblem {
    type Eval: Clone;

    fn evaluate(&self, u: &[f64]) -> Result<Self::Eval>;
    fn coefficients(eval: &Self::Eval) -> &NehariCoefficients;
    /// Evaluation of `s·u` from that of `u`.
    fn scale(eval: &Self::Eval, s: f64) -> Self::Eval;
    fn residual(&self, u: &[f64], eval: &Self::Eval) -> Vec<f64>;
    fn precondition(&self, r: &[f64]) -> Vec<f64>;
    fn inner(&self, a: &[f64], b: &[f64]) -> f64;
}

#[derive(Debug, Clone)]
pub(crate) struct Descent<E> {
    pub u: Vec<f64>,
    pub eval: E,
    pub energy: f64,
    pub el_residual: f64,
    pub nehari_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub log: Vec<LogRow>,
}

fn energy_of(c: &NehariCoefficients) -> f64 {
    crate::functional::EnergyBreakdown::from_coefficients(c).total
}

/// Projects `u` (negative part removed) onto the Nehari manifold.
fn project<P: NehariProblem>(problem: &P, mut u: Vec<f64>) -> Result<(Vec<f64>, P::Eval)> {
    u.iter_mut().for_each(|v| *v = v.max(0.0));
    if u.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroField);
    }
    let eval = problem.evaluate(&u)?;
    let t = P::coefficients(&eval).project()?.t;
    u.iter_mut().for_each(|v| *v *= t);
    Ok((u, P::scale(&eval, t)))
}

/// Roundoff level of an energy evaluation with these coefficients.
pub(crate) fn energy_noise(c: &NehariCoefficients) -> f64 {
    let scale = 0.5 * c.quadratic
        + 0.25 * c.poisson.abs()
        + c.subcritical.iter().zip(&c.exponents).map(|(v, q)| (v / q).abs()).sum::<f64>()
        + c.critical.abs() / 6.0;
    64.0 * f64::EPSILON * scale
}

/// Runs the descent from `init`; `observe` sees every accepted iterate.
///
/// Steps are accepted on the Armijo condition. Once the predicted decrease
/// drops below the roundoff of an energy evaluation, a step is accepted
/// instead if the energy does not rise above that roundoff and the residual
/// strictly decreases; otherwise the energy could not drive the residual
/// below the L² noise floor of the discretization.
pub(crate) fn minimize<P: NehariProblem>(
    problem: &P,
    init: Vec<f64>,
    cfg: &SolverConfig,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<Descent<P::Eval>> {
    let (mut u, mut eval) = project(problem, init)?;
    let mut energy = energy_of(P::coefficients(&eval));
    let mut r = problem.residual(&u, &eval);
    let rel = |r: &[f64], e: &P::Eval| problem.inner(r, r).sqrt() / P::coefficients(e).quadratic.sqrt();
    let mut el_residual = rel(&r, &eval);
    let mut tau = cfg.step;
    let mut log = Vec::new();
    let mut last_decrease = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    loop {
        log.push(LogRow { iter: iterations, energy, el_residual, step: tau });
        observe(iterations, &u);

        let stalled = last_decrease <= cfg.energy_tol * energy.abs().max(f64::MIN_POSITIVE);
        if el_residual <= cfg.tol && (stalled || iterations == 0) {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iters {
            break;
        }

        let d = match cfg.preconditioner {
            Preconditioner::Identity => r.clone(),
            Preconditioner::Sobolev => problem.precondition(&r),
        };
        let slope = problem.inner(&r, &d);
        let noise = energy_noise(P::coefficients(&eval));
        let mut accepted = None;
        while tau > 1e-14 {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(x, g)| x - tau * g).collect();
            if let Ok((cand, cand_eval)) = project(problem, trial) {
                let e = energy_of(P::coefficients(&cand_eval));
                if e <= energy - 1e-4 * tau * slope {
                    accepted = Some((cand, cand_eval, e, None));
                    break;
                }
                if tau * slope < noise && e <= energy + noise {
                    let cand_r = problem.residual(&cand, &cand_eval);
                    let cand_res = rel(&cand_r, &cand_eval);
                    if cand_res < el_residual {
                        accepted = Some((cand, cand_eval, e, Some((cand_r, cand_res))));
                        break;
                    }
                }
            }
            tau *= cfg.backtrack;
        }
        iterations += 1;
        let Some((cand, cand_eval, e, cand_r)) = accepted else {
            // Neither the energy nor the residual can be reduced further.
            break;
        };
        last_decrease = energy - e;
        (r, el_residual) = cand_r.unwrap_or_else(|| {
            let r = problem.residual(&cand, &cand_eval);
            let res = rel(&r, &cand_eval);
            (r, res)
        });
        u = cand;
        eval = cand_eval;
        energy = e;
        tau = (tau * cfg.growth).min(cfg.step * 1e3);
    }

    let nehari_residual = P::coefficients(&eval).residual_at(1.0);
    Ok(Descent { u, eval, energy, el_residual, nehari_residual, iterations, converged, log })
}
