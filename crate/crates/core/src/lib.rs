//! Simulation and verification toolkit for interacting-particle diffusions
//! ("radial" or Dyson-type processes) on Weyl chambers of types A and B.
//!
//! The crate has three layers:
//!
//! - deterministic building blocks: elementary symmetric polynomials
//!   ([`symfun`]), Hermite/Laguerre evaluation and zeros ([`orthopoly`]),
//!   and the chamber geometry, drifts, weights, and frozen (noise-free)
//!   flows ([`model`]);
//! - dynamics: singularity-safe Euler-Maruyama integration of the particle
//!   SDEs and a Runge-Kutta integrator for the infinite-coupling ODE
//!   ([`sde`]), plus every closed-form expectation the processes satisfy
//!   ([`expectations`]);
//! - verification: a deterministic Monte-Carlo harness with
//!   martingale-flatness and characteristic-polynomial checks
//!   ([`montecarlo`]) and an SDE-free importance-sampling oracle
//!   ([`oracle`]).
//!
//! All randomized code derives per-path/per-batch streams from a master
//! seed and aggregates with fixed reduction trees, so every result is
//! bit-identical across runs, worker counts, and the `parallel` feature.

pub mod error;
pub mod expectations;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod orthopoly;
pub mod par;
pub mod sde;
pub mod symfun;

pub use error::{Error, Result};
pub use model::{Beta, ChamberPoint, ModelSpec, System};
pub use montecarlo::{EstimateWithError, FlatnessReport};
pub use sde::{SimConfig, Start, Trajectory};
