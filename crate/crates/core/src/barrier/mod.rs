//! Exact scattering by a rectangular barrier of height V0 on [0, d]:
//! the transmission amplitude, the entire function g(k) = e^(-ikd)/T(k),
//! its complex zeros (the poles of T) with their residues, and the pole
//! expansion of T.

mod contour;
mod expansion;
mod poles;
mod residue;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units;

pub use contour::{winding_number, Rectangle};
pub use expansion::mittag_leffler_t;
pub use poles::{find_poles, Certificate, Pole, PoleTable};
pub use residue::{residue_eigenfunction, residue_explicit, ResonantEigenfunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    v0: f64,
    d: f64,
    m_ratio: f64,
    k_v: f64,
}

impl BarrierParams {
    pub fn new(v0: f64, d: f64, m_ratio: f64) -> Result<Self> {
        if !(v0 > 0.0 && v0.is_finite()) {
            return Err(Error::domain(format!("barrier height must be positive, got {v0} eV")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::domain(format!("barrier width must be positive, got {d} nm")));
        }
        let k_v = units::wavenumber_from_energy(v0, m_ratio)?;
        Ok(Self { v0, d, m_ratio, k_v })
    }

    /// Barrier height in eV.
    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// Barrier width in nm.
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn m_ratio(&self) -> f64 {
        self.m_ratio
    }

    /// k_V = sqrt(2 m V0)/ħ in nm⁻¹.
    pub fn k_v(&self) -> f64 {
        self.k_v
    }

    /// q² = k² - k_V², factored to stay accurate near k = ±k_V.
    pub fn q_squared(&self, k: Complex64) -> Complex64 {
        (k - self.k_v) * (k + self.k_v)
    }

    /// The root q of q² = k² - k_V² on the same side as k, so that
    /// |k + q| ≥ |k - q| and k - q = k_V²/(k + q) can be formed without
    /// cancellation.
    pub fn q(&self, k: Complex64) -> Complex64 {
        let q = self.q_squared(k).sqrt();
        if (q * k.conj()).re < 0.0 {
            -q
        } else {
            q
        }
    }
}

// Below this |q d| the even-in-q power series are used.
const SERIES_RADIUS: f64 = 1.0;

/// cos(qd), sin(qd)/q and (d cos(qd) - sin(qd)/q)/q² as power series in
/// u = (qd)², valid for |u| < 1.
fn even_series(u: Complex64, d: f64) -> (Complex64, Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let (mut cos, mut sinc, mut dsinc) = (zero, zero, zero);
    let mut power = Complex64::new(1.0, 0.0); // (-u)^j
    let mut prev = zero; // (-u)^(j-1)
    let mut fact = 1.0; // (2j)!
    for j in 0..30 {
        let fj = j as f64;
        if j > 0 {
            fact *= (2.0 * fj - 1.0) * (2.0 * fj);
        }
        let odd_fact = fact * (2.0 * fj + 1.0);
        cos += power / fact;
        sinc += power / odd_fact;
        dsinc -= prev * (2.0 * fj / odd_fact);
        if power.norm() < 1e-18 * fact {
            break;
        }
        prev = power;
        power *= -u;
    }
    (cos, sinc * d, dsinc * (d * d * d))
}

/// g(k) and its derivative with respect to k.
///
/// Away from q = 0, g is formed as [(k+q)² e^(-iqd) - (k-q)² e^(iqd)]/(4kq);
/// the trigonometric form cos(qd) - i(k²+q²)/(2kq) sin(qd) loses all
/// accuracy near the deep zeros, where both terms are ~e^|Im qd|.
pub fn g_and_derivative(k: Complex64, params: &BarrierParams) -> Result<(Complex64, Complex64)> {
    if k.norm() == 0.0 {
        return Err(Error::domain("g(k) diverges at k = 0"));
    }
    if !(k.re.is_finite() && k.im.is_finite()) {
        return Err(Error::domain(format!("g(k) needs a finite wavenumber, got {k}")));
    }
    let d = params.d;
    let kv2 = params.k_v * params.k_v;
    let q2 = params.q_squared(k);
    let u = q2 * d * d;
    let (g, dg) = if u.norm() < SERIES_RADIUS * SERIES_RADIUS {
        let (cos, sinc, dsinc) = even_series(u, d);
        // F = (k² + q²)/(2k)
        let f = k - kv2 / (2.0 * k);
        let df = 1.0 + kv2 / (2.0 * k * k);
        let g = cos - Complex64::i() * f * sinc;
        let dg = -k * d * sinc - Complex64::i() * (df * sinc + f * k * dsinc);
        (g, dg)
    } else {
        let q = params.q(k);
        let kp = k + q;
        let km = kv2 / kp;
        let iqd = Complex64::i() * q * d;
        let p = kp * kp * (-iqd).exp();
        let m = km * km * iqd.exp();
        let g = (p - m) / (4.0 * k * q);
        let dg = (p + m) * (2.0 - Complex64::i() * d * k) / (4.0 * k * q2) - g * (k * k + q2) / (k * q2);
        (g, dg)
    };
    if !(g.re.is_finite() && g.im.is_finite() && dg.re.is_finite() && dg.im.is_finite()) {
        return Err(Error::domain(format!("g(k) is not representable at k = {k}")));
    }
    Ok((g, dg))
}

pub fn g_function(k: Complex64, params: &BarrierParams) -> Result<Complex64> {
    Ok(g_and_derivative(k, params)?.0)
}

/// T(k) = e^(-ikd)/g(k).
pub fn transmission_amplitude(k: Complex64, params: &BarrierParams) -> Result<Complex64> {
    let g = g_function(k, params)?;
    Ok((-Complex64::i() * k * params.d).exp() / g)
}
