//! The ground-energy function `G(s)`: the least energy of the autonomous
//! problem with every weight frozen at `s`.

use crate::error::{Error, Result};
use crate::potentials::{lattice, Frozen, PotentialSet};
use crate::radial::{radial_ground_state, RadialConfig};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Mutex;

/// Samples within this relative distance of `c₀` form the argmin set `𝒢`.
pub const ARGMIN_TOL: f64 = 1e-4;

/// `c_∞` must exceed `c₀` by this relative margin for the existence verdict.
pub const VERDICT_TOL: f64 = 1e-8;

/// Memoized `G` keyed by the frozen coefficients, so that points related by
/// a symmetry of the weights share one radial solve.
#[derive(Debug)]
pub struct GroundEnergy {
    cfg: RadialConfig,
    cache: Mutex<HashMap<Vec<i64>, std::result::Result<f64, String>>>,
}

/// Frozen coefficients rounded to 12 significant digits, well below the
/// accuracy of a radial solve.
fn key(f: &Frozen) -> Vec<i64> {
    let round = |v: f64| {
        if v == 0.0 {
            return [0, 0];
        }
        let e = v.abs().log10().floor() as i32;
        [(v / 10f64.powi(e - 11)).round() as i64, e as i64]
    };
    let mut out = Vec::new();
    for v in [f.a, f.k, f.coulomb].iter().chain(&f.b).chain(&f.exponents) {
        out.extend(round(*v));
    }
    out.push(f.pivot as i64);
    out
}

impl GroundEnergy {
    pub fn new(cfg: RadialConfig) -> Self {
        Self { cfg, cache: Mutex::new(HashMap::new()) }
    }

    pub fn config(&self) -> &RadialConfig {
        &self.cfg
    }

    /// `c_ab` for frozen coefficients.
    pub fn level(&self, f: &Frozen) -> Result<f64> {
        let k = key(f);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&k) {
            return hit.clone().map_err(|reason| Error::DegenerateFrozen { point: None, reason });
        }
        let res = radial_ground_state(f, &self.cfg).map(|s| s.energy).map_err(|e| e.to_string());
        self.cache.lock().expect("cache lock").insert(k, res.clone());
        res.map_err(|reason| Error::DegenerateFrozen { point: None, reason })
    }

    /// `G(s)`.
    pub fn at(&self, p: &PotentialSet, s: [f64; 3]) -> Result<f64> {
        self.level(&p.frozen_at(s)).map_err(|e| match e {
            Error::DegenerateFrozen { reason, .. } => Error::DegenerateFrozen { point: Some(s), reason },
            other => other,
        })
    }

    /// Number of distinct radial solves performed so far.
    pub fn solves(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

/// `G(s)` with the weights of `p` frozen at `s`.
pub fn ground_energy(p: &PotentialSet, s: [f64; 3], cfg: &RadialConfig) -> Result<f64> {
    GroundEnergy::new(cfg.clone()).at(p, s)
}

/// `c_∞`, the level of the limiting problem.
pub fn limit_level(p: &PotentialSet, cfg: &RadialConfig) -> Result<f64> {
    radial_ground_state(&p.frozen_at_infinity(), cfg)
        .map(|s| s.energy)
        .map_err(|e| Error::DegenerateFrozen { point: None, reason: format!("limit problem: {e}") })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmapSample {
    pub s: [f64; 3],
    pub g: Option<f64>,
    /// Reason the frozen problem has no ground state, if any.
    pub degenerate: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundEnergyMap {
    pub samples: Vec<GmapSample>,
    pub c0: f64,
    /// Sampled points with `G(s) <= c₀ + ARGMIN_TOL |c₀|`.
    pub argmin: Vec<[f64; 3]>,
    /// `None` when the limiting problem is degenerate, i.e. its Nehari set
    /// is empty and `c_∞ = +∞`.
    pub c_inf: Option<f64>,
    pub existence_verdict: bool,
    /// Lattice spacing of the samples.
    pub spacing: f64,
}

impl GroundEnergyMap {
    /// Distance from `x` to the nearest point of `𝒢`.
    pub fn dist_to_argmin(&self, x: [f64; 3]) -> f64 {
        self.argmin
            .iter()
            .map(|s| ((s[0] - x[0]).powi(2) + (s[1] - x[1]).powi(2) + (s[2] - x[2]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// The `k` lowest nondegenerate samples, ties broken by input order.
    pub fn lowest(&self, k: usize) -> Vec<[f64; 3]> {
        let mut ok: Vec<(f64, usize)> =
            self.samples.iter().enumerate().filter_map(|(i, s)| s.g.map(|g| (g, i))).collect();
        ok.sort_by(|a, b| a.partial_cmp(b).expect("finite G"));
        ok.into_iter().take(k).map(|(_, i)| self.samples[i].s).collect()
    }

    /// `sx,sy,sz,G,degenerate_flag`; degenerate samples carry `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sx,sy,sz,G,degenerate_flag\n");
        for s in &self.samples {
            let g = s.g.map_or("nan".to_string(), |g| format!("{g:.12e}"));
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.s[0],
                s.s[1],
                s.s[2],
                g,
                u8::from(s.degenerate.is_some())
            ));
        }
        out
    }
}

/// Samples `G` on a `res³` lattice over `[-extent, extent]³`.
pub fn ground_energy_map(p: &PotentialSet, extent: f64, res: usize, cfg: &RadialConfig) -> Result<GroundEnergyMap> {
    ground_energy_map_with(p, extent, res, &GroundEnergy::new(cfg.clone()))
}

/// As [`ground_energy_map`], sharing the cache of `ge`.
pub fn ground_energy_map_with(
    p: &PotentialSet,
    extent: f64,
    res: usize,
    ge: &GroundEnergy,
) -> Result<GroundEnergyMap> {
    if !(extent > 0.0 && extent.is_finite()) || res == 0 {
        return Err(Error::InvalidArgument(format!("bad sampling box: extent {extent}, resolution {res}")));
    }
    let points = lattice(extent, res);
    // Distinct coefficient sets are solved in parallel; the rest hit the cache.
    let mut seen = HashMap::new();
    let distinct: Vec<Frozen> = points
        .iter()
        .map(|&s| p.frozen_at(s))
        .filter(|f| seen.insert(key(f), ()).is_none())
        .collect();
    distinct.par_iter().for_each(|f| {
        let _ = ge.level(f);
    });
    let samples: Vec<GmapSample> = points
        .iter()
        .map(|&s| match ge.at(p, s) {
            Ok(g) => GmapSample { s, g: Some(g), degenerate: None },
            Err(e) => GmapSample { s, g: None, degenerate: Some(e.to_string()) },
        })
        .collect();
    let c0 = samples.iter().filter_map(|s| s.g).fold(f64::INFINITY, f64::min);
    if !c0.is_finite() {
        return Err(Error::DegenerateFrozen { point: None, reason: "every sample is degenerate".into() });
    }
    let argmin = samples
        .iter()
        .filter(|s| s.g.is_some_and(|g| g <= c0 + ARGMIN_TOL * c0.abs()))
        .map(|s| s.s)
        .collect();
    let c_inf = limit_level(p, ge.config()).ok();
    let existence_verdict = c_inf.map_or(true, |ci| ci > c0 + VERDICT_TOL * c0.abs());
    let spacing = if res > 1 { 2.0 * extent / (res - 1) as f64 } else { 0.0 };
    Ok(GroundEnergyMap { samples, c0, argmin, c_inf, existence_verdict, spacing })
}
