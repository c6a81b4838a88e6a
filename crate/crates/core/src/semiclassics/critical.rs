//! The critical threshold `⅓ S^{3/2} |K|_∞^{-1/2}` and comparison floors for `c_ε`.

use super::bubble::sobolev_constant;
use super::gmap::{GroundEnergy, GroundEnergyMap};
use crate::error::{Error, Result};
use crate::potentials::{lattice, Frozen, PotentialSet};
use serde::Serialize;

/// `⅓ S^{3/2} |K|_∞^{-1/2}` with `|K|_∞ = K^∞`.
pub fn critical_threshold(p: &PotentialSet) -> Result<f64> {
    let k = p.limits().k;
    if k <= 0.0 {
        return Err(Error::ZeroCriticalWeight);
    }
    Ok(sobolev_constant().powf(1.5) / (3.0 * k.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalCheck {
    pub holds: bool,
    pub c0: f64,
    pub threshold: f64,
    /// `threshold - c₀`.
    pub margin: f64,
}

/// Whether `c₀` stays below the critical threshold.
pub fn critical_level_check(gmap: &GroundEnergyMap, p: &PotentialSet) -> Result<CriticalCheck> {
    let threshold = critical_threshold(p)?;
    let margin = threshold - gmap.c0;
    Ok(CriticalCheck { holds: margin > 0.0, c0: gmap.c0, threshold, margin })
}

/// Coefficients dominating every frozen problem sampled on the lattice and
/// at infinity: `inf V`, `sup Q_i`, `sup K` and `inf h²`. By monotonicity of
/// `c_ab` its level lies below every `G(s)` and every `c_ε`.
pub fn floor_coefficients(p: &PotentialSet, extent: f64, res: usize) -> Frozen {
    let mut f = p.frozen_at_infinity();
    for s in lattice(extent, res) {
        let g = p.frozen_at(s);
        f.a = f.a.min(g.a);
        for (b, gb) in f.b.iter_mut().zip(&g.b) {
            *b = b.max(*gb);
        }
        f.k = f.k.max(g.k);
        f.coulomb = f.coulomb.min(g.coulomb);
    }
    f
}

/// The level of [`floor_coefficients`].
pub fn floor_level(p: &PotentialSet, extent: f64, res: usize, ge: &GroundEnergy) -> Result<f64> {
    ge.level(&floor_coefficients(p, extent, res))
}
