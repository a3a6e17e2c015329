//! Residues of T(k) at its poles, by the closed form and through the
//! normalized resonant eigenfunction.

use num_complex::Complex64;

use super::BarrierParams;
use crate::error::{Error, Result};

/// r_n = 4k²(k² - k_V²)^(3/2) e^(-ikd) / [k_V⁴ (kd + 2i) sin(d·sqrt(k² - k_V²))].
///
/// The same root q enters q³ and sin(qd), so the ratio is independent of
/// the branch.
pub fn residue_explicit(k: Complex64, params: &BarrierParams) -> Result<Complex64> {
    let d = params.d();
    let q = params.q(k);
    let s = (q * d).sin();
    if s.norm() == 0.0 {
        return Err(Error::DegeneratePole { k, reason: "sin(qd) vanishes" });
    }
    let kv4 = params.k_v().powi(4);
    let i = Complex64::i();
    Ok(4.0 * k * k * q * q * q * (-i * k * d).exp() / (kv4 * (k * d + 2.0 * i) * s))
}

/// (e^(iθ) - 1)/(iθ), accurate for small θ.
fn exp_ratio(theta: Complex64) -> Complex64 {
    if theta.norm() < 1e-3 {
        let it = Complex64::i() * theta;
        1.0 + it / 2.0 + it * it / 6.0 + it * it * it / 24.0
    } else {
        ((Complex64::i() * theta).exp() - 1.0) / (Complex64::i() * theta)
    }
}

/// The resonant state u(x) = C [e^(iqx) + D e^(-iqx)] on 0 ≤ x ≤ d, with
/// D = (q+k)/(q-k) enforcing the outgoing condition at x = 0 and C fixed by
/// ∫₀^d u² dx + i (u(0)² + u(d)²)/(2k) = 1.
#[derive(Debug, Clone, Copy)]
pub struct ResonantEigenfunction {
    pub k: Complex64,
    pub q: Complex64,
    pub amplitude: Complex64,
    pub mixing: Complex64,
}

impl ResonantEigenfunction {
    pub fn new(k: Complex64, params: &BarrierParams) -> Result<Self> {
        let d = params.d();
        let kv2 = params.k_v() * params.k_v();
        let q = params.q(k);
        let kp = q + k;
        if kp.norm() == 0.0 {
            return Err(Error::DegeneratePole { k, reason: "q = -k" });
        }
        // q - k = -k_V²/(q + k) on the chosen branch.
        let qm = -kv2 / kp;
        if qm.norm() == 0.0 {
            return Err(Error::DegeneratePole { k, reason: "q = k makes D diverge" });
        }
        let mixing = kp / qm;
        let i = Complex64::i();
        let e_plus = (i * q * d).exp();
        let e_minus = (-i * q * d).exp();
        // ∫₀^d (e^(iqx) + D e^(-iqx))² dx
        let integral = d * exp_ratio(2.0 * q * d) + 2.0 * mixing * d + mixing * mixing * d * exp_ratio(-2.0 * q * d);
        let v0 = 1.0 + mixing;
        let vd = e_plus + mixing * e_minus;
        let norm = integral + i * (v0 * v0 + vd * vd) / (2.0 * k);
        if norm.norm() == 0.0 || !(norm.re.is_finite() && norm.im.is_finite()) {
            return Err(Error::Normalization(k));
        }
        let amplitude = (1.0 / norm).sqrt();
        Ok(Self { k, q, amplitude, mixing })
    }

    pub fn value(&self, x: f64) -> Complex64 {
        let iqx = Complex64::i() * self.q * x;
        self.amplitude * (iqx.exp() + self.mixing * (-iqx).exp())
    }

    pub fn derivative(&self, x: f64) -> Complex64 {
        let iqx = Complex64::i() * self.q * x;
        self.amplitude * Complex64::i() * self.q * (iqx.exp() - self.mixing * (-iqx).exp())
    }

    pub fn second_derivative(&self, x: f64) -> Complex64 {
        -self.q * self.q * self.value(x)
    }
}

/// r_n = i u_n(0) u_n(d) e^(-ik_n d) from the normalized resonant state.
pub fn residue_eigenfunction(k: Complex64, params: &BarrierParams) -> Result<Complex64> {
    let u = ResonantEigenfunction::new(k, params)?;
    let d = params.d();
    Ok(Complex64::i() * u.value(0.0) * u.value(d) * (-Complex64::i() * k * d).exp())
}
