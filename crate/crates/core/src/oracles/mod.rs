//! Brute-force validators that share no numerics with the pole expansion:
//! direct quadrature of the spectral and M-function integrals, and a
//! Crank-Nicolson grid solver for the wave packet.

mod crank_nicolson;
mod spectral;

pub use crank_nicolson::{contamination_estimate, crank_nicolson_density, CrankNicolson, GridConfig, GridState};
pub use spectral::{m_quadrature, spectral_integrand, spectral_psi};
