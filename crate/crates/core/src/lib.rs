//! Ground states of the semiclassical critical Schrödinger–Poisson system
//!
//! ```text
//! -ε²Δv + V(x)v + h(x)φ v = Σ Q_i(x)|v|^{q_i-2}v + K(x)|v|⁴v,   -ε²Δφ = h(x)v²
//! ```
//!
//! in the rescaled form `u(x) = v(εx)`, on which every solver here operates.

pub mod config;
pub mod coulomb;
mod descent;
pub mod error;
pub mod expr;
mod fft;
pub mod field;
pub mod functional;
pub mod io;
pub mod nehari;
pub mod potentials;
mod quad;
pub mod radial;
pub mod semiclassics;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use descent::{LogRow, Preconditioner, SolverConfig};
pub use expr::Expr;
pub use field::{Field3, Grid3, RadialField, RadialGrid};
pub use functional::{EnergyBreakdown, Functional};
pub use nehari::{NehariCoefficients, NehariPoint};
pub use potentials::{Frozen, Limits, PotentialSet, QTerm};
pub use radial::{radial_ground_state, RadialConfig, RadialSolution};
pub use solver::{minimize_nehari, GroundState, Solver};

// The book's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/coulomb.md")]
    mod coulomb {}
    #[doc = include_str!("../../../book/src/nehari.md")]
    mod nehari {}
    #[doc = include_str!("../../../book/src/radial.md")]
    mod radial {}
    #[doc = include_str!("../../../book/src/bubbles.md")]
    mod bubbles {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
