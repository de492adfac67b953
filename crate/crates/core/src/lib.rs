//! Around-the-corner mmWave coverage: ambient propagation mechanisms
//! (corner diffraction, street-pole scatter) versus a reflective
//! intelligent surface, ideal and degraded by channel angle spread.
//!
//! The crate provides
//! - a plan-view street-intersection scenario with resolved per-mechanism
//!   geometry ([`scenario`], [`geometry`]),
//! - closed-form path gains with validity guards ([`ambient`], [`ris`]),
//! - a Monte Carlo oracle that synthesizes spatially correlated complex
//!   Gaussian fields on the aperture and checks the analytic
//!   `A_RIS * A_eff` power law ([`oracle`]),
//! - distance sweeps with CSV output ([`sweep`]).
//!
//! All randomness is seeded and reduced deterministically: identical
//! inputs give bit-identical results at any worker count.

pub mod ambient;
pub mod error;
pub mod gain;
pub mod geometry;
pub mod oracle;
mod quad;
pub mod ris;
pub mod scenario;
pub mod sweep;

pub use error::{Error, Result};
pub use gain::PathGain;
pub use scenario::{AngleSpreadSpec, Polarization, Scenario, ScatteredSegments};
