//! Semiclassical diagnostics: the ground-energy landscape, bubbles, ε-scans,
//! decay fits and the nonexistence probe.

pub mod bubble;
pub mod critical;
pub mod decay;
pub mod gmap;
pub mod nonexist;
pub mod scan;

pub use bubble::{bubble_estimates, sobolev_constant, Bubble, BubbleRow};
pub use gmap::{ground_energy, ground_energy_map, limit_level, GroundEnergy, GroundEnergyMap};
pub use critical::{critical_level_check, critical_threshold, CriticalCheck};
pub use decay::{decay_fit, fit_exponential, DecayFit};
pub use scan::{epsilon_scan, ConcentrationReport, ScanEntry, ScanSetup};
pub use nonexist::{nonexistence_probe, runaway_probe, NonexistenceReport};
