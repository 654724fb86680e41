//! Entanglement entropies of permutation-symmetric spin states.
//!
//! A permutation-symmetric state of `N → ∞` spins `s` is described by a
//! probability measure on `CP^D`, `D = 2s`. The Rényi moment of a block of `m`
//! spins is the `n`-copy integral of the cyclic overlap product
//! `Π_α (v_α† v_{α+1})^m`. This crate evaluates that moment for discrete, torus,
//! density and self-similar (IFS) measures, compares it with finite-`N` exact
//! spectra and with closed-form large-`m` asymptotics, and extracts the
//! logarithmic scaling dimension from entropy curves.

// `!(x > 0.0)` style checks reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod geometry;
pub mod measures;
pub mod moments;
pub mod numeric;
pub mod oracles;
pub mod quadrature;
pub mod renyi;
pub mod scaling;

pub use error::{Error, Result};
pub use geometry::{ProjectivePoint, SphericalChart};
pub use measures::{DensityMeasure, DiscreteMeasure, IfsMeasure, SpinMeasure, TorusMeasure};
pub use moments::{MomentEstimate, RenyiQuery};
pub use oracles::DickeOccupation;
pub use renyi::RenyiOrder;

/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
