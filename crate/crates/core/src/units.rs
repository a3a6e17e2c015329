//! Constants and conversions for the semiconductor unit system used
//! throughout the crate: energies in eV, lengths in nm, times in fs, and
//! effective masses as a ratio to the bare electron mass.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant in eV·fs.
    pub hbar: f64,
    /// ħ²/2mₑ in eV·nm².
    pub hbar2_over_2me: f64,
}

/// The canonical constant set.
pub const CONSTANTS: PhysicalConstants = PhysicalConstants { hbar: 0.658_211_956_9, hbar2_over_2me: 0.038_099_8 };

fn check_mass(m_ratio: f64) -> Result<()> {
    if !(m_ratio > 0.0 && m_ratio.is_finite()) {
        return Err(Error::domain(format!("mass ratio must be positive, got {m_ratio}")));
    }
    Ok(())
}

/// k = sqrt(E m / ħ²) in nm⁻¹.
pub fn wavenumber_from_energy(energy: f64, m_ratio: f64) -> Result<f64> {
    check_mass(m_ratio)?;
    if !(energy >= 0.0 && energy.is_finite()) {
        return Err(Error::domain(format!("energy must be non-negative, got {energy}")));
    }
    Ok((energy * m_ratio / CONSTANTS.hbar2_over_2me).sqrt())
}

/// E = ħ²k²/2m in eV.
pub fn energy_from_wavenumber(k: f64, m_ratio: f64) -> Result<f64> {
    check_mass(m_ratio)?;
    if !k.is_finite() {
        return Err(Error::domain(format!("wavenumber must be finite, got {k}")));
    }
    Ok(CONSTANTS.hbar2_over_2me * k * k / m_ratio)
}

/// ħ/m in nm²/fs.
pub fn hbar_over_m(m_ratio: f64) -> f64 {
    2.0 * CONSTANTS.hbar2_over_2me / (CONSTANTS.hbar * m_ratio)
}

/// Group velocity ħk/m in nm/fs.
pub fn velocity(k: f64, m_ratio: f64) -> f64 {
    hbar_over_m(m_ratio) * k
}

/// Classical traversal time t_f = m d / ħk₀ in fs.
pub fn free_passage_time(d: f64, k0: f64, m_ratio: f64) -> Result<f64> {
    check_mass(m_ratio)?;
    if !(d > 0.0) || !(k0 > 0.0) {
        return Err(Error::domain(format!("free passage time needs d > 0 and k0 > 0, got d = {d}, k0 = {k0}")));
    }
    Ok(d * m_ratio * CONSTANTS.hbar / (2.0 * CONSTANTS.hbar2_over_2me * k0))
}

/// ω = E/ħ in fs⁻¹.
pub fn angular_frequency(energy: f64) -> f64 {
    energy / CONSTANTS.hbar
}
