//! Target output controllability analysis and controller synthesis for
//! continuous-time LTI systems.
//!
//! Given a plant `x' = A x + B u` (optionally with measurements `y = C x`)
//! and a full-row-rank target map `z = F x`, this crate decides whether the
//! target functionals `z` can be steered independently of full state
//! controllability, checks the existence conditions for feedback laws
//! `u = -Z F x` that regulate `z -> 0` with prescribed subsystem poles,
//! synthesizes the gains (including the augmented design that places more
//! poles when the target rows are not invariant under `A`), and verifies and
//! simulates the resulting closed loops.
//!
//! Modules:
//! - [`matops`]: tolerance-based rank, pseudoinverse, nullspace bases,
//!   controllability matrices, eigenvalues.
//! - [`analysis`]: the controllability / observability rank tests.
//! - [`synthesis`]: pole placement, the controller constructions and the
//!   design algorithm driver.
//! - [`verify`]: independent post-design verification and closed-loop
//!   simulation.

pub mod analysis;
pub mod error;
pub mod matops;
pub mod synthesis;
pub mod verify;

#[cfg(test)]
pub(crate) mod fixtures;

pub use analysis::{LinearSystem, ObservabilityIndices, TargetMap, TocVerdict};
pub use error::{Error, Result};
pub use matops::{RankReport, ToleranceConfig};
pub use synthesis::{AlgorithmOutcome, AlgorithmStop, DesignMode, DesignResult, PoleSet};
pub use verify::{Trajectory, VerificationReport};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
