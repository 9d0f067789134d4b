//! Simulation of a two-arm thermal-light interferometer that records the real
//! and imaginary parts of an object's Fourier transform as intensity
//! differences behind a beam splitter.
//!
//! The pipeline, bottom-up:
//!
//! - [`field`]: grids, sampled complex fields, the arm geometry.
//! - [`propagation`]: Fresnel transfer matrices.
//! - [`source`]: seeded circular-Gaussian source realizations.
//! - [`elements`]: BS2, the J and P′ plates, object transmittance.
//! - [`object`]: the test object and its closed-form transform.
//! - [`experiment`]: Monte Carlo registration, the coherent-mode oracle,
//!   complex assembly and inversion.
//! - [`analysis`]: scale-fitted comparisons.
//! - [`config`], [`output`], [`cli`]: configuration documents, CSV output and
//!   the command-line front end.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod elements;
pub mod error;
pub mod experiment;
pub mod field;
pub mod object;
pub mod output;
pub mod propagation;
pub mod source;

pub use error::{ConfigCode, Error, Result};
