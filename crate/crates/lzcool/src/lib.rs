//! Stationary-population simulator for microwave sideband cooling of a
//! four-level, two-well flux qubit.
//!
//! A strong low-frequency flux drive sweeps the device repeatedly through its
//! interwell avoided crossings. Each crossing becomes a ladder of photon
//! resonances whose strengths are Bessel-weighted Lorentzians; the resulting
//! transition rates feed a four-state rate equation whose stationary solution
//! gives the pumped ground-state population.
//!
//! Modules, bottom up:
//! - [`model`]: device parameters, drive settings, transition channels, units.
//! - [`specfun`]: Bessel J_n tables with caching, Airy Ai.
//! - [`rates`]: single-passage Landau-Zener, driven multiphoton rates, thermal
//!   interwell rates, assembly of the 4x4 rate generator.
//! - [`dynamics`]: stationary solution, transient integration, effective
//!   temperature, closed-form population estimates.
//! - [`sweep`]: parallel parameter scans, optimum extraction, amplitude-law
//!   fits, sideband-peak analysis.
//! - [`config`] / [`output`] / [`presets`]: TOML run descriptions, CSV/JSON
//!   writers, and canned scans behind the `lzcool` binary.

// Reference values in tests are frozen from extended-precision computations
// at more digits than f64 holds; negated comparisons are deliberate so NaN
// fails closed.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod output;
pub mod presets;
pub mod rates;
pub mod specfun;
pub mod sweep;

pub use error::Error;
