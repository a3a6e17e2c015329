//! Transient tunneling through a rectangular barrier from quantum-shutter
//! initial conditions: the cutoff plane wave and its Lorentzian wave-packet
//! generalization.
//!
//! The transmitted wave function is assembled exactly from Moshinsky
//! functions and the complex poles and residues of the transmission
//! amplitude. Independent brute-force oracles (spectral quadrature, contour
//! quadrature of the Moshinsky integral, and a Crank-Nicolson solver) live
//! in [`oracles`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod barrier;
pub mod diagnostics;
pub mod error;
pub mod faddeeva;
pub mod numerics;
pub mod oracles;
pub mod propagator;
pub mod units;

pub use error::{Error, Result};
pub use faddeeva::ComplexAmplitude;
