//! Decoherence of matter-wave superpositions by electromagnetic and
//! gravitational bremsstrahlung.
//!
//! A clump of mass m is split into two paths separated by L, which reach a
//! relative speed βc and recombine after τ. Radiation emitted along the
//! paths records which-path information and suppresses the interference
//! visibility by the decoherence factor Γ:
//!
//! * EM dipole bremsstrahlung: ln Γ_E ≈ −(2α_E/π)·C·β²
//! * gravitational quadrupole bremsstrahlung: ln Γ_G ≈ −(Gm²/ħc)·C″·β⁴
//!
//! The crate evaluates these exponents, checks the semi-classical validity
//! conditions, simulates detection events on a screen, and recovers ħ and
//! the power-law exponents from synthetic visibility data.

pub mod constants;
pub mod decoherence;
pub mod density;
pub mod error;
pub mod inference;
pub mod io;
pub mod regime;
pub mod simulator;
pub mod sweep;
pub mod units;

pub use constants::{ConstantSet, PhysicalConstants};
pub use decoherence::{Channel, DecoherenceResult, ExperimentConfig, ModelConstants, Regime};
pub use density::TwoPathDensityMatrix;
pub use error::{Error, Result};
