//! Asymptotics of linear q-difference and ε-difference equations.
//!
//! The crate parses q-difference operators, tracks the eigenvalues of their
//! characteristic polynomials around the unit circle, computes S-entropy
//! growth rates and Mahler measures, builds WKB jets for regular
//! ε-difference equations, and checks the predictions against overflow-safe
//! simulations of the recursions.

pub mod builtins;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod operator;
pub mod quad;
pub mod series;
pub mod simulator;
pub mod spectral;
pub mod wkb;

pub use error::{Error, Result};
