//! Postselected weak-measurement amplification of a movable mirror in an
//! optomechanical Mach–Zehnder interferometer.
//!
//! Two independent routes compute the same quantities:
//!
//! * [`analytic`] evaluates the closed forms for the conditional mirror
//!   displacement, its small-time expansions and the detection statistics;
//! * [`fock`] and [`protocol`] build the interferometer on a truncated
//!   Fock space and evolve it by brute force, with a truncation-doubling
//!   convergence gate.
//!
//! [`dissipation`] integrates the damped dynamics, [`stats`] holds the
//! photon-arrival and feasibility arithmetic, and [`appendix`] is the
//! ground-state-pointer weak-measurement baseline.

// negated comparisons are how NaN inputs fail the range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod appendix;
pub mod dissipation;
pub mod error;
pub mod fock;
pub mod params;
pub mod protocol;
pub mod quadrature;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use params::{CoherentParams, SqueezeParams, SystemParams};
