//! Stationary scattering states of one-dimensional single- and multi-surface
//! quantum systems, computed with the bipolar counter-propagating wave method.
//!
//! Each surface wavefunction is split into a right-moving and a left-moving
//! component carried on classical trajectory grids; relaxing the coupled
//! component equations in time drives the system to the stationary scattering
//! state, from which reflection and transmission probabilities are read off
//! at the grid edges. An independent dense-grid coupled-channel solver
//! ([`oracle`]) and closed-form barrier transmissions ([`potential::analytic`])
//! provide reference values.

pub mod error;
pub mod grid;
pub mod observables;
pub mod oracle;
pub mod polar;
pub mod potential;
pub mod propagate;
pub mod quad;
pub mod report;
pub mod spline;
pub mod units;

pub use error::{Error, Result};
pub use potential::{Benchmark, Curve, DiabaticModel, ScatteringProblem};
