//! Moshinsky functions and the transmitted wave built from them.
//!
//! Every term of the transmitted wave is a constant times M(x, q; t), so the
//! wave is stored as a list of (coefficient, q) pairs and evaluated, together
//! with its analytic time derivative, at any point x ≥ d, t > 0.

use std::f64::consts::{FRAC_2_SQRT_PI, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::barrier::{transmission_amplitude, BarrierParams, Pole, PoleTable};
use crate::error::{Error, Result};
use crate::faddeeva::{wofz_scaled, ComplexAmplitude};
use crate::numerics::CompensatedSum;
use crate::units;

/// Relative size of a pole-term denominator below which the term is
/// reported as ill-conditioned.
const CONDITION_WARNING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Plane wave e^(ik0x) switched on at t = 0 (Δ = 0).
    Cutoff,
    /// Lorentzian wave packet of spectral width Δ > 0.
    Packet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    k0: f64,
    delta: f64,
}

impl PacketParams {
    pub fn new(k0: f64, delta: f64) -> Result<Self> {
        if !(k0.is_finite() && k0 > 0.0) {
            return Err(Error::domain(format!("k0 must be positive and finite, got {k0}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::domain(format!("delta must be non-negative and finite, got {delta}")));
        }
        Ok(Self { k0, delta })
    }

    pub fn cutoff(k0: f64) -> Result<Self> {
        Self::new(k0, 0.0)
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mode(&self) -> Mode {
        if self.delta > 0.0 {
            Mode::Packet
        } else {
            Mode::Cutoff
        }
    }

    /// A = sqrt(Δ(1 + (Δ/k0)²))/(2π), in nm^(-1/2); defined only for Δ > 0.
    pub fn amplitude(&self) -> Option<f64> {
        (self.delta > 0.0).then(|| self.spectral_weight() / (2.0 * PI))
    }

    /// sqrt(Δ(1 + (Δ/k0)²)).
    fn spectral_weight(&self) -> f64 {
        (self.delta * (1.0 + (self.delta / self.k0).powi(2))).sqrt()
    }

    fn require_packet(&self) -> Result<f64> {
        self.amplitude().ok_or_else(|| Error::domain("operation requires a wave packet (delta > 0)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationPoint {
    /// Position in nm.
    pub x: f64,
    /// Time in fs.
    pub t: f64,
}

impl EvaluationPoint {
    pub fn new(x: f64, t: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::domain(format!("position must be finite, got {x}")));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::domain(format!("time must be positive and finite, got {t}")));
        }
        Ok(Self { x, t })
    }
}

struct MParts {
    value: Complex64,
    /// ∂M/∂t = iφ' M + ½ e^(iφ) w'(Z) Z'.
    dt: Complex64,
}

fn m_parts(x: f64, q: Complex64, t: f64, m_ratio: f64, with_derivative: bool) -> Result<MParts> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::domain(format!("M-function needs t > 0, got {t}")));
    }
    if !(m_ratio.is_finite() && m_ratio > 0.0) {
        return Err(Error::domain(format!("mass ratio must be positive, got {m_ratio}")));
    }
    let hm = units::hbar_over_m(m_ratio);
    let s = 1.0 / (2.0 * hm * t).sqrt();
    let rot = Complex64::from_polar(1.0, FRAC_PI_4);
    let z = rot * s * (x - hm * q * t);
    let phase = x * x / (2.0 * hm * t);
    let scaled =
        wofz_scaled(z, Complex64::new(0.0, phase)).map_err(|e| Error::MFunction { x, q, t, source: Box::new(e) })?;
    let value = 0.5 * scaled;
    let dt = if with_derivative {
        let dz = -0.5 * rot * s * (x / t + hm * q);
        // e^(iφ) w'(Z) = -2Z e^(iφ) w(Z) + (2i/√π) e^(iφ)
        let carrier = Complex64::from_polar(1.0, phase);
        let scaled_dw = -2.0 * z * scaled + Complex64::new(0.0, FRAC_2_SQRT_PI) * carrier;
        let dphase = -phase / t;
        Complex64::i() * dphase * value + 0.5 * scaled_dw * dz
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(MParts { value, dt })
}

/// M(x, q; t) = ½ e^(ix²m/2ħt) w(i y_q), y_q = e^(-iπ/4) sqrt(m/2ħt) (x - ħqt/m),
/// with x in nm, q in nm⁻¹ and t in fs.
pub fn m_function(x: f64, q: Complex64, t: f64, m_ratio: f64) -> Result<ComplexAmplitude> {
    Ok(m_parts(x, q, t, m_ratio, false)?.value)
}

/// M(x, q; t) and ∂M/∂t (fs⁻¹), the latter from w'(z) = -2z w(z) + 2i/√π.
pub fn m_function_with_time_derivative(
    x: f64,
    q: Complex64,
    t: f64,
    m_ratio: f64,
) -> Result<(ComplexAmplitude, ComplexAmplitude)> {
    let parts = m_parts(x, q, t, m_ratio, true)?;
    Ok((parts.value, parts.dt))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coefficient: Complex64,
    q: Complex64,
}

/// The transmitted wave Ψ(x, t), x ≥ d, as a sum of M-function terms.
#[derive(Debug, Clone)]
pub struct TransmittedWave {
    params: BarrierParams,
    packet: PacketParams,
    direct: [Term; 2],
    /// Pole terms (n, -n), ascending n.
    pairs: Vec<[Term; 2]>,
    axis: Vec<Term>,
}

impl TransmittedWave {
    /// Cutoff mode (Δ = 0):
    ///   Ψ = T(k0)M(k0) - T(-k0)M(-k0) - 2k0 Σ_n r_n/(k0² - k_n²) M(k_n).
    /// Packet mode (Δ > 0), with κ± = ±k0 - iΔ:
    ///   Ψ = -i sqrt(Δ(1+(Δ/k0)²)) [T(κ+)M(κ+) - T(κ-)M(κ-)
    ///        - 2k0 Σ_n r_n/(k0² - (k_n + iΔ)²) M(k_n)].
    pub fn new(params: &BarrierParams, packet: &PacketParams, table: &PoleTable) -> Result<Self> {
        if table.params() != params {
            return Err(Error::domain("pole table was computed for a different barrier"));
        }
        if table.is_empty() {
            return Err(Error::domain("pole table is empty"));
        }
        let k0 = packet.k0();
        let delta = packet.delta();
        let prefactor = match packet.mode() {
            Mode::Cutoff => Complex64::new(1.0, 0.0),
            Mode::Packet => Complex64::new(0.0, -packet.spectral_weight()),
        };
        let plus = Complex64::new(k0, -delta);
        let minus = Complex64::new(-k0, -delta);
        let direct = [
            Term { coefficient: prefactor * transmission_amplitude(plus, params)?, q: plus },
            Term { coefficient: -prefactor * transmission_amplitude(minus, params)?, q: minus },
        ];
        let pole_term = |pole: &Pole| -> Result<Term> {
            let shifted = pole.k + Complex64::new(0.0, delta);
            let denominator = k0 * k0 - shifted * shifted;
            let size = denominator.norm();
            if size == 0.0 {
                return Err(Error::IllConditioned { n: pole.n, denominator: size });
            }
            if delta == 0.0 && (k0 - pole.k.re).abs() <= CONDITION_WARNING * k0 {
                log::warn!("k0 coincides with Re k_n for n = {}", pole.n);
            }
            if size < CONDITION_WARNING * k0 * k0 {
                log::warn!("pole term n = {} is ill-conditioned: |k0² - (k_n + iΔ)²| = {size:e}", pole.n);
            }
            Ok(Term { coefficient: -2.0 * k0 * prefactor * pole.residue / denominator, q: pole.k })
        };
        let pairs = table.pairs().map(|(p, m)| Ok([pole_term(p)?, pole_term(m)?])).collect::<Result<Vec<_>>>()?;
        let axis = table.axis().iter().map(pole_term).collect::<Result<Vec<_>>>()?;
        Ok(Self { params: *params, packet: *packet, direct, pairs, axis })
    }

    pub fn params(&self) -> &BarrierParams {
        &self.params
    }

    pub fn packet(&self) -> &PacketParams {
        &self.packet
    }

    pub fn mode(&self) -> Mode {
        self.packet.mode()
    }

    pub fn pole_pairs(&self) -> usize {
        self.pairs.len()
    }

    fn check_point(&self, point: &EvaluationPoint) -> Result<()> {
        EvaluationPoint::new(point.x, point.t)?;
        if point.x < self.params.d() {
            return Err(Error::domain(format!(
                "x = {} nm lies before the barrier edge d = {} nm",
                point.x,
                self.params.d()
            )));
        }
        Ok(())
    }

    fn accumulate(&self, point: &EvaluationPoint, with_derivative: bool) -> Result<(Complex64, Complex64)> {
        self.check_point(point)?;
        let m = self.params.m_ratio();
        let eval = |term: &Term| -> Result<(Complex64, Complex64)> {
            let parts = m_parts(point.x, term.q, point.t, m, with_derivative)?;
            Ok((term.coefficient * parts.value, term.coefficient * parts.dt))
        };
        let mut value = CompensatedSum::new();
        let mut dt = CompensatedSum::new();
        for term in &self.direct {
            let (v, d) = eval(term)?;
            value.add(v);
            dt.add(d);
        }
        for [p, n] in &self.pairs {
            let (vp, dp) = eval(p)?;
            let (vn, dn) = eval(n)?;
            value.add(vp + vn);
            dt.add(dp + dn);
        }
        for term in &self.axis {
            let (v, d) = eval(term)?;
            value.add(v);
            dt.add(d);
        }
        Ok((value.value(), dt.value()))
    }

    pub fn psi(&self, point: &EvaluationPoint) -> Result<ComplexAmplitude> {
        Ok(self.accumulate(point, false)?.0)
    }

    /// Ψ and ∂Ψ/∂t (fs⁻¹) at the same point.
    pub fn psi_and_time_derivative(&self, point: &EvaluationPoint) -> Result<(ComplexAmplitude, ComplexAmplitude)> {
        self.accumulate(point, true)
    }
}

/// Ψ(x, t) for the cutoff plane wave of wavenumber k0.
pub fn psi_cutoff(
    point: &EvaluationPoint,
    params: &BarrierParams,
    k0: f64,
    table: &PoleTable,
) -> Result<ComplexAmplitude> {
    TransmittedWave::new(params, &PacketParams::cutoff(k0)?, table)?.psi(point)
}

/// Ψ(x, t) for the Lorentzian packet.
pub fn psi_packet(
    point: &EvaluationPoint,
    params: &BarrierParams,
    packet: &PacketParams,
    table: &PoleTable,
) -> Result<ComplexAmplitude> {
    packet.require_packet()?;
    TransmittedWave::new(params, packet, table)?.psi(point)
}

/// Ψ(x, 0) = 4πA e^(Δx) sin(k0 x) for x < 0, and 0 for x ≥ 0.
pub fn initial_packet(x: f64, packet: &PacketParams) -> Result<ComplexAmplitude> {
    let a = packet.require_packet()?;
    if x >= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(Complex64::new(4.0 * PI * a * (packet.delta() * x).exp() * (packet.k0() * x).sin(), 0.0))
}

/// φ(k) = sqrt(2π) A [1/(k - k0 + iΔ) - 1/(k + k0 + iΔ)].
pub fn phi_k(k: f64, packet: &PacketParams) -> Result<ComplexAmplitude> {
    let a = packet.require_packet()?;
    let i_delta = Complex64::new(0.0, packet.delta());
    let k0 = packet.k0();
    Ok((2.0 * PI).sqrt() * a * (1.0 / (k - k0 + i_delta) - 1.0 / (k + k0 + i_delta)))
}

/// ((i/√Δ) Ψ_packet, Ψ_cutoff) at the same point; the two coincide as Δ → 0.
pub fn delta_limit_check(
    point: &EvaluationPoint,
    params: &BarrierParams,
    k0: f64,
    table: &PoleTable,
    delta_small: f64,
) -> Result<(ComplexAmplitude, ComplexAmplitude)> {
    if !(delta_small.is_finite() && delta_small > 0.0) {
        return Err(Error::domain(format!("delta must be positive, got {delta_small}")));
    }
    let packet = PacketParams::new(k0, delta_small)?;
    let rescaled = Complex64::i() / delta_small.sqrt() * psi_packet(point, params, &packet, table)?;
    Ok((rescaled, psi_cutoff(point, params, k0, table)?))
}
