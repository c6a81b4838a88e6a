//! Self-checks of the numerical building blocks against independent oracles.
//!
//! Each property belongs to a group (`poisson`, `scalings`, `nehari`, `ray`,
//! `monotonicity`, `critical`, `bubbles`, `decay`, `gradient`); a filter
//! selects one group or one property by name.

use crate::config::RunConfig;
use crate::coulomb::{bound_sides, CoulombKernel};
use crate::descent::SolverConfig;
use crate::error::Result;
use crate::field::{inner_product, Field3, Grid3};
use crate::functional::Functional;
use crate::potentials::{Frozen, PotentialSet};
use crate::radial::{radial_ground_state, RadialConfig};
use crate::semiclassics::bubble::{bubble_quotient, DEFAULT_RADIUS, loglog_slope, predicted_slope, NORM_EXPONENTS};
use crate::semiclassics::{
    bubble_estimates, critical_level_check, fit_exponential, ground_energy_map, sobolev_constant,
};
use crate::solver::Solver;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

const SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub group: &'static str,
    pub passed: bool,
    /// The compared quantity, e.g. a worst relative error or a margin.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    /// Hash over the hashes of the configurations checked, in order.
    pub config_hash: String,
    pub properties: Vec<PropertyResult>,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Group or property name; `None` runs everything.
    pub filter: Option<String>,
    /// Runs the Coulomb-based checks with a sign-flipped kernel.
    pub flip_kernel: bool,
    /// Named configurations for the critical-level margin.
    pub configs: Vec<(String, RunConfig)>,
}

struct Ctx<'a> {
    opts: &'a VerifyOptions,
    out: Vec<PropertyResult>,
}

impl Ctx<'_> {
    fn kernel(&self, grid: Grid3) -> CoulombKernel {
        let k = CoulombKernel::new(grid);
        if self.opts.flip_kernel {
            k.sign_flipped()
        } else {
            k
        }
    }

    fn functional(&self, p: &PotentialSet, grid: Grid3, eps: f64) -> Result<Functional> {
        let coeffs = p.sample(&grid, eps, [0.0; 3])?;
        Ok(Functional::with_operators(
            coeffs,
            Arc::new(crate::spectral::Spectral::new(grid)),
            Arc::new(self.kernel(grid)),
        ))
    }

    /// Records a property whose check returns `(measured, tolerance, passed, detail)`.
    fn record(
        &mut self,
        group: &'static str,
        name: &str,
        check: impl FnOnce(&Self) -> Result<(f64, f64, bool, String)>,
    ) {
        if let Some(f) = &self.opts.filter {
            if f != group && f != name {
                return;
            }
        }
        let t = Instant::now();
        let (measured, tolerance, passed, detail) = match check(self) {
            Ok(v) => v,
            Err(e) => (f64::NAN, f64::NAN, false, format!("error: {e}")),
        };
        self.out.push(PropertyResult {
            name: name.to_string(),
            group,
            passed,
            measured,
            tolerance,
            detail,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
}

/// A smooth field: a sum of three Gaussians with random centers, widths
/// and amplitudes (signed when `signed`).
fn random_field(rng: &mut ChaCha8Rng, grid: Grid3, signed: bool) -> Field3 {
    let bumps: Vec<([f64; 3], f64, f64)> = (0..3)
        .map(|_| {
            let c = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            let w: f64 = rng.random_range(0.6..1.4);
            let a: f64 = rng.random_range(0.2..1.5);
            let sign = if signed && rng.random_bool(0.3) { -1.0 } else { 1.0 };
            (c, w, sign * a)
        })
        .collect();
    Field3::from_fn(grid, |p| {
        bumps
            .iter()
            .map(|(c, w, a)| {
                let r2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2);
                a * (-r2 / (w * w)).exp()
            })
            .sum()
    })
    .expect("finite Gaussians")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Weights shared by the Nehari and gradient checks: a repulsive term
/// before the pivot, an attractive one after it.
fn competing_constants() -> PotentialSet {
    PotentialSet::constants(1.0, &[(-0.5, 4.2), (2.0, 4.6)], 2, 0.1).expect("valid constants")
}

fn poisson(ctx: &mut Ctx) {
    ctx.record("poisson", "poisson_oracle", |ctx| {
        let grid = Grid3::new(64, 12.0)?;
        // u² = exp(-|x|²), whose potential is π^{3/2} erf(r)/r.
        let u = Field3::from_fn(grid, |p| (-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / 2.0).exp())?;
        let t = Instant::now();
        let phi = ctx.kernel(grid).potential(&u, None)?;
        let secs = t.elapsed().as_secs_f64();
        let mut worst: f64 = 0.0;
        for (p, v) in grid.points().zip(phi.values()) {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if r < 6.0 {
                let exact = if r == 0.0 { 2.0 * PI } else { PI.powf(1.5) * libm::erf(r) / r };
                worst = worst.max(rel(*v, exact));
            }
        }
        let ok = worst <= 1e-3 && secs < 5.0;
        Ok((worst, 1e-3, ok, format!("max relative error for r < L/2; kernel build and apply {secs:.2} s")))
    });
}

fn scalings(ctx: &mut Ctx) {
    let grid = Grid3::new(32, 6.0).expect("grid");
    let ts = [0.5, 2.0, 3.0];
    let fields = |_: &Ctx| {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        (0..10).map(|_| random_field(&mut rng, grid, true)).collect::<Vec<_>>()
    };
    ctx.record("scalings", "potential_quadratic_scaling", |ctx| {
        let k = ctx.kernel(grid);
        let mut worst: f64 = 0.0;
        for u in fields(ctx) {
            let phi = k.potential(&u, None)?;
            for t in ts {
                let phi_t = k.potential(&u.scaled(t), None)?;
                let num: f64 = phi_t.values().iter().zip(phi.values()).map(|(a, b)| (a - t * t * b).abs()).sum();
                let den: f64 = phi.values().iter().map(|b| (t * t * b).abs()).sum();
                worst = worst.max(num / den);
            }
        }
        Ok((worst, 1e-10, worst <= 1e-10, "Φ(tu) = t²Φ(u), relative l¹ defect".into()))
    });
    ctx.record("scalings", "coulomb_energy_quartic_scaling", |ctx| {
        let k = ctx.kernel(grid);
        let mut worst: f64 = 0.0;
        for u in fields(ctx) {
            let e = k.energy(&u, None)?;
            for t in ts {
                worst = worst.max(rel(k.energy(&u.scaled(t), None)?, t.powi(4) * e));
            }
        }
        Ok((worst, 1e-10, worst <= 1e-10, "∫φ_{tu}(tu)² = t⁴∫φ_u u²".into()))
    });
    ctx.record("scalings", "coulomb_sobolev_bound", |ctx| {
        let k = ctx.kernel(grid);
        let mut worst = f64::NEG_INFINITY;
        for u in fields(ctx) {
            let (lhs, rhs) = bound_sides(&k, &u)?;
            if lhs.is_nan() {
                return Ok((f64::NAN, 0.0, false, "negative Coulomb energy".into()));
            }
            worst = worst.max(lhs / rhs);
        }
        Ok((worst, 1.0, worst <= 1.0, "largest lhs/rhs of ‖φ‖_{D^{1,2}} <= S^{-1/2}|u|²_{12/5}".into()))
    });
}

fn nehari(ctx: &mut Ctx) {
    ctx.record("nehari", "nehari_agreement", |ctx| {
        let grid = Grid3::new(16, 6.0)?;
        let f = ctx.functional(&competing_constants(), grid, 1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
        let (mut agree, mut ray, mut resid) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..100 {
            let u = random_field(&mut rng, grid, true);
            let c = f.evaluate(&u)?.coefficients;
            let newton = c.project()?;
            let bisect = c.project_bisection()?;
            agree = agree.max(rel(newton.t, bisect.t));
            resid = resid.max(newton.nehari_residual);
            for lambda in [0.5, 2.0] {
                let scaled = f.project(&u.scaled(lambda))?;
                ray = ray.max(rel(lambda * scaled.t, newton.t));
            }
        }
        let ok = agree <= 1e-10 && ray <= 1e-9 && resid <= 1e-10;
        Ok((
            agree,
            1e-10,
            ok,
            format!("100 fields: Newton/bisection {agree:.2e}, ray invariance {ray:.2e} (tol 1e-9), residual {resid:.2e} (tol 1e-10)"),
        ))
    });
}

fn ray(ctx: &mut Ctx) {
    ctx.record("ray", "ray_maximum_at_ground_state", |_| {
        let p = PotentialSet::constants(1.0, &[(30.0, 4.2)], 1, 0.1)?;
        let grid = Grid3::new(64, 6.0)?;
        let solver = Solver::new(&p, grid, 1.0)?;
        let state = solver.minimize(&solver.seed([0.0; 3], 1.0), &SolverConfig::default())?;
        if !state.converged {
            return Ok((f64::NAN, 1e-6, false, format!("ground state did not converge ({:e})", state.el_residual)));
        }
        let c = solver.functional().evaluate(&state.u)?.coefficients;
        let t = c.ray_argmax(3.0, 30_000);
        let dev = (t - 1.0).abs();
        Ok((dev, 1e-6, dev <= 1e-6, format!("argmax_t I(t u*) = {t:.12} after {} iterations", state.iterations)))
    });
}

fn monotonicity(ctx: &mut Ctx) {
    ctx.record("monotonicity", "level_monotone_in_coefficients", |_| {
        let cfg = RadialConfig::default();
        let (a0, b0) = (1.0, 30.0);
        let lattice: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
        let t = Instant::now();
        let levels = lattice
            .par_iter()
            .map(|&(i, j)| {
                let a = a0 * (0.9 + 0.1 * i as f64);
                let b = b0 * (0.9 + 0.1 * j as f64);
                Ok(radial_ground_state(&Frozen::new(a, vec![b], vec![4.2], 0, 0.1, 1.0), &cfg)?.energy)
            })
            .collect::<Result<Vec<f64>>>()?;
        let secs = t.elapsed().as_secs_f64();
        let c = |i: usize, j: usize| levels[3 * i + j];
        let mut margin = f64::INFINITY;
        for k in 0..3 {
            for l in 0..2 {
                margin = margin.min(c(l + 1, k) - c(l, k));
                margin = margin.min(c(k, l) - c(k, l + 1));
            }
        }
        let ok = margin > 1e-6 && secs < 30.0;
        Ok((margin, 1e-6, ok, format!("smallest step of c_ab on the 3×3 lattice; 9 radial solves in {secs:.1} s")))
    });
}

fn critical(ctx: &mut Ctx) {
    let configs = ctx.opts.configs.clone();
    for (name, cfg) in &configs {
        ctx.record("critical", &format!("critical_margin_{name}"), |_| {
            let p = cfg.potential_set()?;
            let gmap = ground_energy_map(&p, cfg.gmap.extent, cfg.gmap.resolution, &cfg.radial)?;
            let check = critical_level_check(&gmap, &p)?;
            Ok((
                check.margin,
                0.0,
                check.holds,
                format!("c₀ = {:.8} against ⅓S^{{3/2}}K_∞^{{-1/2}} = {:.8}", check.c0, check.threshold),
            ))
        });
    }
}

fn bubbles(ctx: &mut Ctx) {
    let sigmas = [0.2, 0.1, 0.05, 0.025];
    ctx.record("bubbles", "sobolev_constant_talenti", |_| {
        let talenti = 0.75 * (2.0 * PI * PI).powf(2.0 / 3.0);
        let spread = [0.1, 1.0, 10.0].iter().map(|&s| rel(bubble_quotient(s), bubble_quotient(1.0))).fold(0.0, f64::max);
        let err = rel(sobolev_constant(), talenti);
        let ok = err <= 1e-6 && spread <= 1e-8;
        Ok((err, 1e-6, ok, format!("S = {:.10}; σ-invariance spread {spread:.2e} (tol 1e-8)", sobolev_constant())))
    });
    ctx.record("bubbles", "bubble_norm_slopes", |_| {
        let rows = bubble_estimates(&sigmas, [0.0; 3], DEFAULT_RADIUS)?;
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for (k, &t) in NORM_EXPONENTS.iter().enumerate() {
            if t == 3.0 {
                continue;
            }
            let y: Vec<f64> = rows.iter().map(|r| r.lt[k]).collect();
            let slope = loglog_slope(&sigmas, &y);
            worst = worst.max((slope - predicted_slope(t)).abs());
            parts.push(format!("t={t}: {slope:.4}"));
        }
        Ok((worst, 0.05, worst <= 0.05, parts.join(", ")))
    });
    ctx.record("bubbles", "bubble_critical_norm_order", |_| {
        let rows = bubble_estimates(&sigmas, [0.0; 3], DEFAULT_RADIUS)?;
        let s32 = sobolev_constant().powf(1.5);
        let errs: Vec<f64> = rows.iter().map(|r| (r.l6 - s32).abs()).collect();
        let order = errs.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);
        Ok((order, 2.5, order >= 2.5, format!(
            "|∫U⁶ - S^{{3/2}}| = {}",
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
        )))
    });
}

fn decay(ctx: &mut Ctx) {
    ctx.record("decay", "decay_synthetic_recovery", |_| {
        let grid = Grid3::new(32, 6.0)?;
        let mut worst: f64 = 0.0;
        for mu in [0.5, 1.0, 2.0, 4.0] {
            let center = [0.3, -0.2, 0.1];
            let u = Field3::from_fn(grid, |p| {
                let r = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) + (p[2] - center[2]).powi(2)).sqrt();
                2.0 * (-mu * r).exp()
            })?;
            let fit = fit_exponential(&u, center, 0.5, 5.0)?;
            worst = worst.max(rel(fit.mu, mu));
        }
        Ok((worst, 1e-3, worst <= 1e-3, "μ ∈ {0.5, 1, 2, 4} from C e^{-μ|x - x₀|}".into()))
    });
}

fn gradient(ctx: &mut Ctx) {
    ctx.record("gradient", "residual_matches_finite_differences", |ctx| {
        let grid = Grid3::new(16, 6.0)?;
        let p = competing_constants();
        let f = ctx.functional(&p, grid, 1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let u = random_field(&mut rng, grid, false);
            let v = random_field(&mut rng, grid, true);
            let r = f.residual(&u)?;
            let analytic = inner_product(&r, &v)?;
            let d = 1e-4;
            let plus = Field3::new(grid, u.values().iter().zip(v.values()).map(|(a, b)| a + d * b).collect())?;
            let minus = Field3::new(grid, u.values().iter().zip(v.values()).map(|(a, b)| a - d * b).collect())?;
            let fd = (f.energy(&plus)?.total - f.energy(&minus)?.total) / (2.0 * d);
            worst = worst.max(rel(fd, analytic));
        }
        Ok((worst, 1e-6, worst <= 1e-6, "⟨r(u), v⟩ against central differences of I, 20 directions".into()))
    });
}

/// Runs the selected properties in a fixed order.
pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let mut ctx = Ctx { opts, out: Vec::new() };
    let groups: [fn(&mut Ctx); 9] =
        [poisson, scalings, nehari, ray, monotonicity, critical, bubbles, decay, gradient];
    for run in groups {
        run(&mut ctx);
    }
    let mut hasher = Sha256::new();
    for (_, cfg) in &opts.configs {
        hasher.update(cfg.hash().as_bytes());
    }
    let properties = ctx.out;
    VerifyReport {
        passed: !properties.is_empty() && properties.iter().all(|p| p.passed),
        config_hash: hex::encode(hasher.finalize()),
        properties,
    }
}

/// Names of the property groups, in run order.
pub const GROUPS: [&str; 9] =
    ["poisson", "scalings", "nehari", "ray", "monotonicity", "critical", "bubbles", "decay", "gradient"];
