//! Simulation and design toolkit for single-photon Raman passage in a
//! whispering-gallery resonator: a multilevel atom coupled to two
//! counterpropagating modes, driven by a cascaded single-photon source.
//!
//! The library models one excitation end to end. [`scheme`] declares the
//! atomic level structure and mode couplings, [`generator`] assembles the
//! non-Hermitian evolution matrix, [`pulse`] turns target photon envelopes
//! into source decay schedules, [`dynamics`] propagates the pulse and
//! integrates every output channel, [`steady`] solves the monochromatic
//! limit, [`analytic`] carries the closed-form transmission/reflection
//! expressions and design rules, [`classify`] folds trajectories into
//! outcome statistics, and [`ensemble`] averages those statistics over
//! experimental coupling-strength and position spreads.

pub mod analytic;
pub mod angular;
pub mod classify;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod expm;
pub mod generator;
pub mod nelder;
pub mod ode;
pub mod params;
pub mod pulse;
pub mod scheme;
pub mod steady;

pub use error::{Error, Result};
pub use params::SystemParams;
pub use scheme::{Ground, LevelScheme, Mode, SchemeKind};
