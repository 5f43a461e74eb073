//! Experiment driver for the torus-map laboratory: TOML-configured sweeps
//! over the family parameter, a witness search for a positive central
//! exponent, a confidence-aware bisection for the radius where it crosses
//! zero, and deterministic CSV/JSON/plot emission.
//!
//! The `phlab` binary is a thin shell over these modules; everything it can
//! do is callable as a library.

pub mod config;
pub mod emit;
pub mod sweep;
