//! Run configuration, read from TOML.
//!
//! ```toml
//! [grid]
//! n = 64
//! L = 6.0
//!
//! [potentials]
//! V = "2 - exp(-(x^2 + y^2 + z^2))"
//! Q = [{ expr = "30", q = 4.2 }]
//! i0 = 1
//! K = "0.1"
//! limits = { V_inf = 2.0, Q_inf = [30.0], K_inf = 0.1, h_inf = 1.0 }
//! ```
//!
//! Every other section is optional. Parse errors carry the line and column;
//! semantic errors name the offending field.

use crate::descent::SolverConfig;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{Grid3, RadialGrid};
use crate::potentials::{Limits, PotentialSet, QTerm};
use crate::radial::RadialConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// An expression given either as a string or as a bare number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExprSpec {
    Number(f64),
    Text(String),
}

impl ExprSpec {
    fn parse(&self, field: &str) -> Result<Expr> {
        match self {
            ExprSpec::Number(v) => Ok(Expr::constant(*v)),
            ExprSpec::Text(s) => s.parse().map_err(|e: Error| config_err(field, e.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QSpec {
    pub expr: ExprSpec,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSection {
    #[serde(rename = "V_inf")]
    pub v_inf: f64,
    #[serde(rename = "Q_inf")]
    pub q_inf: Vec<f64>,
    #[serde(rename = "K_inf")]
    pub k_inf: f64,
    #[serde(rename = "h_inf", default = "one")]
    pub h_inf: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialsSection {
    #[serde(rename = "V")]
    pub v: ExprSpec,
    #[serde(rename = "Q")]
    pub q: Vec<QSpec>,
    pub i0: usize,
    #[serde(rename = "K")]
    pub k: ExprSpec,
    /// Omitted means `h ≡ 1`.
    #[serde(default)]
    pub h: Option<ExprSpec>,
    /// A point `x₀` with `K(x₀) = K_inf`.
    #[serde(rename = "K_max_point", default)]
    pub x0: [f64; 3],
    pub limits: LimitsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub eps_list: Vec<f64>,
    /// Width of the Gaussian multistart seeds in rescaled units.
    pub seed_width: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self { eps_list: vec![1.0, 0.5, 0.25, 0.125], seed_width: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmapSection {
    /// Half-width of the sampling box `[-box, box]³`.
    #[serde(rename = "box")]
    pub extent: f64,
    pub resolution: usize,
}

impl Default for GmapSection {
    fn default() -> Self {
        Self { extent: 2.0, resolution: 9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonexistSection {
    pub eps: f64,
    /// Seed center in original coordinates, away from any symmetry center.
    pub seed: [f64; 3],
}

impl Default for NonexistSection {
    fn default() -> Self {
        Self { eps: 1.0, seed: [1.0, 0.5, 0.25] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    #[serde(default)]
    pub radial: RadialConfig,
    pub potentials: PotentialsSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub gmap: GmapSection,
    #[serde(default)]
    pub nonexist: NonexistSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn config_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config { field: field.into(), msg: msg.into() }
}

impl RunConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let field = e.span().map_or("<document>".to_string(), |s| {
                let line = text[..s.start].matches('\n').count() + 1;
                let col = s.start - text[..s.start].rfind('\n').map_or(0, |i| i + 1) + 1;
                format!("line {line}, column {col}")
            });
            config_err(&field, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn grid(&self) -> Result<Grid3> {
        Grid3::new(self.grid.n, self.grid.half_width).map_err(|e| config_err("grid", e.to_string()))
    }

    pub fn potential_set(&self) -> Result<PotentialSet> {
        let p = &self.potentials;
        let q = p
            .q
            .iter()
            .enumerate()
            .map(|(i, t)| Ok(QTerm { weight: t.expr.parse(&format!("potentials.Q[{i}].expr"))?, exponent: t.q }))
            .collect::<Result<Vec<_>>>()?;
        let h = p.h.as_ref().map(|h| h.parse("potentials.h")).transpose()?;
        let limits = Limits { v: p.limits.v_inf, q: p.limits.q_inf.clone(), k: p.limits.k_inf, h: p.limits.h_inf };
        PotentialSet::new(p.v.parse("potentials.V")?, q, p.i0, p.k.parse("potentials.K")?, h, limits, p.x0)
            .map_err(|e| config_err("potentials", e.to_string()))
    }

    /// Re-checks every invariant the modules rely on.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        RadialGrid::new(self.radial.n_r, self.radial.r_max).map_err(|e| config_err("radial", e.to_string()))?;
        if self.radial.widths.is_empty() || self.radial.widths.iter().any(|w| !(*w > 0.0)) {
            return Err(config_err("radial.widths", "must be a nonempty list of positive widths"));
        }
        if !(self.radial.tol > 0.0) || self.radial.max_iters == 0 {
            return Err(config_err("radial", "tol must be positive and max_iters at least 1"));
        }
        for (i, t) in self.potentials.q.iter().enumerate() {
            if !(t.q > 4.0 && t.q < 6.0) {
                return Err(config_err(&format!("potentials.Q[{i}].q"), format!("exponent {} is not in (4, 6)", t.q)));
            }
        }
        if self.potentials.q.is_empty() {
            return Err(config_err("potentials.Q", "at least one term is required"));
        }
        if self.potentials.i0 == 0 || self.potentials.i0 > self.potentials.q.len() {
            return Err(config_err("potentials.i0", format!("must lie in 1..={}", self.potentials.q.len())));
        }
        if self.potentials.limits.q_inf.len() != self.potentials.q.len() {
            return Err(config_err("potentials.limits.Q_inf", "needs one entry per Q term"));
        }
        self.solver.validate()?;
        if self.scan.eps_list.is_empty() {
            return Err(config_err("scan.eps_list", "must not be empty"));
        }
        if self.scan.eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(config_err("scan.eps_list", "entries must be positive"));
        }
        if self.scan.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(config_err("scan.eps_list", "must be strictly decreasing"));
        }
        if !(self.scan.seed_width > 0.0) {
            return Err(config_err("scan.seed_width", "must be positive"));
        }
        if !(self.gmap.extent > 0.0) || self.gmap.resolution == 0 {
            return Err(config_err("gmap", "box must be positive and resolution at least 1"));
        }
        if !(self.nonexist.eps > 0.0) {
            return Err(config_err("nonexist.eps", "must be positive"));
        }
        let p = self.potential_set()?;
        p.validate(self.gmap.extent.max(1.0)).map_err(|e| config_err("potentials", e.to_string()))?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, so formatting and comments do
    /// not change it.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}
