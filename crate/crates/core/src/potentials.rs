//! The weights `V`, `Q_i`, `K`, `h` and their values at infinity.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{Field3, Grid3};
use serde::Serialize;

/// One subcritical term `Q(x)|u|^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTerm {
    pub weight: Expr,
    pub exponent: f64,
}

/// Declared values at infinity: `V_∞ = liminf V`, `Q_i^∞ = limsup Q_i`,
/// `K^∞ = limsup K`, `h_∞ = lim h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Limits {
    pub v: f64,
    pub q: Vec<f64>,
    pub k: f64,
    pub h: f64,
}

/// Coefficients of an autonomous problem
/// `-Δu + c (1/|x| * u²) u + a u = Σ b_i |u|^{q_i-2} u + k |u|⁴ u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frozen {
    pub a: f64,
    pub b: Vec<f64>,
    pub exponents: Vec<f64>,
    pub pivot: usize,
    pub k: f64,
    /// Weight of the Poisson term, `h²` at the frozen point.
    pub coulomb: f64,
}

impl Frozen {
    pub fn new(a: f64, b: Vec<f64>, exponents: Vec<f64>, pivot: usize, k: f64, coulomb: f64) -> Self {
        Self { a, b, exponents, pivot, k, coulomb }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSet {
    v: Expr,
    q: Vec<QTerm>,
    pivot: usize,
    k: Expr,
    h: Option<Expr>,
    limits: Limits,
    k_max_point: [f64; 3],
}

/// Radius at which the declared limits are compared with the expressions.
const FAR_RADIUS: f64 = 1.0e3;
const LIMIT_TOL: f64 = 1e-3;

impl PotentialSet {
    /// Builds a potential set; `pivot` is the 1-based index `i₀`.
    ///
    /// Only structural requirements are checked here. Pointwise hypotheses
    /// need samples; see [`PotentialSet::validate`].
    pub fn new(
        v: Expr,
        q: Vec<QTerm>,
        pivot: usize,
        k: Expr,
        h: Option<Expr>,
        limits: Limits,
        k_max_point: [f64; 3],
    ) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::Potential("at least one subcritical term Q_i is required".into()));
        }
        if pivot == 0 || pivot > q.len() {
            return Err(Error::Potential(format!("pivot i0 = {pivot} is outside 1..={}", q.len())));
        }
        for (i, term) in q.iter().enumerate() {
            if !(term.exponent > 4.0 && term.exponent < 6.0) {
                return Err(Error::Potential(format!("q_{} = {} is not in (4, 6)", i + 1, term.exponent)));
            }
            if i > 0 && term.exponent <= q[i - 1].exponent {
                return Err(Error::Potential("exponents q_i must be strictly increasing".into()));
            }
        }
        if limits.q.len() != q.len() {
            return Err(Error::Potential(format!(
                "{} limits Q_inf declared for {} terms",
                limits.q.len(),
                q.len()
            )));
        }
        let finite = [limits.v, limits.k, limits.h].iter().chain(&limits.q).all(|v| v.is_finite());
        if !finite {
            return Err(Error::Potential("limits must be finite".into()));
        }
        if limits.v <= 0.0 {
            return Err(Error::Potential(format!("V_inf must be positive, got {}", limits.v)));
        }
        if limits.k < 0.0 || limits.h < 0.0 {
            return Err(Error::Potential("K_inf and h_inf must be nonnegative".into()));
        }
        Ok(Self { v, q, pivot: pivot - 1, k, h, limits, k_max_point })
    }

    /// Spatially constant weights with matching limits; `h ≡ 1`.
    pub fn constants(v: f64, q: &[(f64, f64)], pivot: usize, k: f64) -> Result<Self> {
        Self::new(
            Expr::constant(v),
            q.iter().map(|&(w, e)| QTerm { weight: Expr::constant(w), exponent: e }).collect(),
            pivot,
            Expr::constant(k),
            None,
            Limits { v, q: q.iter().map(|t| t.0).collect(), k, h: 1.0 },
            [0.0; 3],
        )
    }

    pub fn v(&self) -> &Expr {
        &self.v
    }

    pub fn q_terms(&self) -> &[QTerm] {
        &self.q
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.q.iter().map(|t| t.exponent).collect()
    }

    /// 0-based index of the sign-changing term.
    pub fn pivot(&self) -> usize {
        self.pivot
    }

    pub fn k(&self) -> &Expr {
        &self.k
    }

    pub fn h(&self) -> Option<&Expr> {
        self.h.as_ref()
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    /// The point `x₀` where `K` attains `K^∞`.
    pub fn k_max_point(&self) -> [f64; 3] {
        self.k_max_point
    }

    /// True when no weight depends on position.
    pub fn is_constant(&self) -> bool {
        self.v.as_constant().is_some()
            && self.q.iter().all(|t| t.weight.as_constant().is_some())
            && self.k.as_constant().is_some()
            && self.h.as_ref().map_or(true, |h| h.as_constant().is_some())
    }

    pub fn h_at(&self, s: [f64; 3]) -> f64 {
        self.h.as_ref().map_or(1.0, |h| h.eval(s))
    }

    /// Coefficients frozen at the point `s`.
    pub fn frozen_at(&self, s: [f64; 3]) -> Frozen {
        Frozen {
            a: self.v.eval(s),
            b: self.q.iter().map(|t| t.weight.eval(s)).collect(),
            exponents: self.exponents(),
            pivot: self.pivot,
            k: self.k.eval(s),
            coulomb: self.h_at(s).powi(2),
        }
    }

    /// Coefficients of the limiting problem.
    pub fn frozen_at_infinity(&self) -> Frozen {
        Frozen {
            a: self.limits.v,
            b: self.limits.q.clone(),
            exponents: self.exponents(),
            pivot: self.pivot,
            k: self.limits.k,
            coulomb: self.limits.h.powi(2),
        }
    }

    /// Checks the pointwise hypotheses on a `res³` lattice over
    /// `[-extent, extent]³` and the declared limits on a far sphere.
    ///
    /// Violations are errors: `inf V > 0`, the sign pattern
    /// `(i - i₀) Q_i >= 0`, `0 <= K <= K^∞ = K(x₀)`, `h >= 0`, and each
    /// declared limit matching the far-field liminf/limsup.
    pub fn validate(&self, extent: f64) -> Result<()> {
        let samples = lattice(extent, 21);
        let kinf = self.limits.k;
        let tiny = 1e-12;
        for &s in &samples {
            let v = self.v.eval(s);
            if !(v > 0.0) {
                return Err(Error::Potential(format!("V({s:?}) = {v} is not positive")));
            }
            for (i, t) in self.q.iter().enumerate() {
                let w = t.weight.eval(s);
                if !w.is_finite() {
                    return Err(Error::Potential(format!("Q_{}({s:?}) is not finite", i + 1)));
                }
                let sign = i as f64 - self.pivot as f64;
                if sign * w < 0.0 {
                    return Err(Error::Potential(format!(
                        "sign pattern violated: (i - i0) Q_i < 0 for i = {} at {s:?} (Q = {w})",
                        i + 1
                    )));
                }
            }
            let k = self.k.eval(s);
            if !(k >= 0.0) || k > kinf * (1.0 + tiny) + tiny {
                return Err(Error::Potential(format!("K({s:?}) = {k} is outside [0, K_inf = {kinf}]")));
            }
            let h = self.h_at(s);
            if !(h >= 0.0) || !h.is_finite() {
                return Err(Error::Potential(format!("h({s:?}) = {h} is negative")));
            }
        }
        let k0 = self.k.eval(self.k_max_point);
        if (k0 - kinf).abs() > 1e-9 * kinf.max(1.0) {
            return Err(Error::Potential(format!(
                "K(x0) = {k0} at x0 = {:?} differs from K_inf = {kinf}",
                self.k_max_point
            )));
        }
        self.check_limits()
    }

    fn check_limits(&self) -> Result<()> {
        let far: Vec<[f64; 3]> = sphere(FAR_RADIUS, 400);
        let close = |name: &str, observed: f64, declared: f64| {
            if (observed - declared).abs() <= LIMIT_TOL * declared.abs().max(1.0) {
                Ok(())
            } else {
                Err(Error::Potential(format!(
                    "declared {name} = {declared} but the far field gives {observed}"
                )))
            }
        };
        let min_over = |e: &Expr| far.iter().map(|&p| e.eval(p)).fold(f64::INFINITY, f64::min);
        let max_over = |e: &Expr| far.iter().map(|&p| e.eval(p)).fold(f64::NEG_INFINITY, f64::max);
        close("V_inf", min_over(&self.v), self.limits.v)?;
        for (i, t) in self.q.iter().enumerate() {
            close(&format!("Q_inf[{i}]"), max_over(&t.weight), self.limits.q[i])?;
        }
        close("K_inf", max_over(&self.k), self.limits.k)?;
        let h_far = match &self.h {
            None => 1.0,
            Some(h) => {
                let (lo, hi) = (min_over(h), max_over(h));
                if hi - lo > LIMIT_TOL * hi.abs().max(1.0) {
                    return Err(Error::Potential(format!("h has no limit at infinity (ranges over [{lo}, {hi}])")));
                }
                hi
            }
        };
        close("h_inf", h_far, self.limits.h)
    }

    /// Checks the hypotheses under which no ground state exists:
    /// `V >= V_∞` with `inf V = V_∞`, `Q_i <= Q_i^∞`, and `h ≡ 1` or
    /// `h >= 0` vanishing at infinity.
    pub fn validate_nonexistence(&self, extent: f64) -> Result<()> {
        self.validate(extent)?;
        let samples = lattice(extent, 21);
        let tol = 1e-12 * self.limits.v.max(1.0);
        for &s in &samples {
            let v = self.v.eval(s);
            if v < self.limits.v - tol {
                return Err(Error::Potential(format!(
                    "V({s:?}) = {v} drops below V_inf = {}",
                    self.limits.v
                )));
            }
            for (i, t) in self.q.iter().enumerate() {
                let w = t.weight.eval(s);
                if w > self.limits.q[i] + 1e-12 * self.limits.q[i].abs().max(1.0) {
                    return Err(Error::Potential(format!(
                        "Q_{}({s:?}) = {w} exceeds Q_inf = {}",
                        i + 1,
                        self.limits.q[i]
                    )));
                }
            }
        }
        if let Some(h) = &self.h {
            let unit = h.as_constant() == Some(1.0);
            if !unit && self.limits.h != 0.0 {
                return Err(Error::Potential("h must be identically 1 or vanish at infinity".into()));
            }
        }
        Ok(())
    }

    /// Weights sampled at `εx + shift` on the rescaled grid.
    pub fn sample(&self, grid: &Grid3, eps: f64, shift: [f64; 3]) -> Result<Coefficients> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("ε must be positive, got {eps}")));
        }
        let at = |p: [f64; 3]| [eps * p[0] + shift[0], eps * p[1] + shift[1], eps * p[2] + shift[2]];
        let field = |e: &Expr| Field3::from_fn(*grid, |p| e.eval(at(p)));
        let v = field(&self.v)?;
        let vmin = v.min();
        if vmin <= 0.0 {
            return Err(Error::NonPositivePotential { min: vmin });
        }
        Ok(Coefficients {
            v,
            q: self.q.iter().map(|t| field(&t.weight)).collect::<Result<_>>()?,
            exponents: self.exponents(),
            pivot: self.pivot,
            k: field(&self.k)?,
            h: self.h.as_ref().map(field).transpose()?,
        })
    }
}

/// Weights on a grid, ready for energy evaluation.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub v: Field3,
    pub q: Vec<Field3>,
    pub exponents: Vec<f64>,
    pub pivot: usize,
    pub k: Field3,
    /// Pointwise Poisson weight; `None` stands for `h ≡ 1`.
    pub h: Option<Field3>,
}

impl Coefficients {
    /// Constant weights from frozen coefficients. A Poisson weight `c` is
    /// realised as `h ≡ √c`.
    pub fn from_frozen(grid: &Grid3, f: &Frozen) -> Self {
        Self {
            v: Field3::constant(*grid, f.a),
            q: f.b.iter().map(|&b| Field3::constant(*grid, b)).collect(),
            exponents: f.exponents.clone(),
            pivot: f.pivot,
            k: Field3::constant(*grid, f.k),
            h: (f.coulomb != 1.0).then(|| Field3::constant(*grid, f.coulomb.sqrt())),
        }
    }

    pub fn grid(&self) -> &Grid3 {
        self.v.grid()
    }

    pub fn v_mean(&self) -> f64 {
        self.v.values().iter().sum::<f64>() / self.v.values().len() as f64
    }
}

/// `res³` lattice on `[-extent, extent]³`; a single point at the origin for `res = 1`.
pub fn lattice(extent: f64, res: usize) -> Vec<[f64; 3]> {
    let coord = |i: usize| if res == 1 { 0.0 } else { -extent + 2.0 * extent * i as f64 / (res - 1) as f64 };
    let mut out = Vec::with_capacity(res.pow(3));
    for i in 0..res {
        for j in 0..res {
            for k in 0..res {
                out.push([coord(i), coord(j), coord(k)]);
            }
        }
    }
    out
}

/// Roughly uniform points on a sphere (Fibonacci spiral) plus the six axis points.
fn sphere(radius: f64, count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut pts: Vec<[f64; 3]> = (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            [radius * rho * th.cos(), radius * rho * th.sin(), radius * z]
        })
        .collect();
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            let mut p = [0.0; 3];
            p[axis] = sign * radius;
            pts.push(p);
        }
    }
    pts
}
