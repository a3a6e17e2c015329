use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::barrier::{transmission_amplitude, BarrierParams};
use crate::error::{Error, Result};
use crate::numerics::{integrate_with_breaks, QuadOptions, QuadResult};
use crate::propagator::{phi_k, PacketParams};
use crate::units;

/// Largest phase change allowed across one initial quadrature panel.
const PANEL_PHASE: f64 = 6.0;

/// φ(k) T(k) / sqrt(2π), the spectral weight of the transmitted wave.
pub fn spectral_integrand(k: f64, packet: &PacketParams, params: &BarrierParams) -> Result<Complex64> {
    let phi = phi_k(k, packet)?;
    if k == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let t = transmission_amplitude(Complex64::new(k, 0.0), params)?;
    Ok(phi * t / (2.0 * PI).sqrt())
}

/// Ψ(x, t) = ∫ dk/sqrt(2π) φ(k) T(k) e^(ikx - iħk²t/2m) by adaptive
/// quadrature over |k| ≤ k0 + 400Δ (extended past the stationary point if
/// needed), plus the leading integration-by-parts term of each tail.
/// `error` bounds the quadrature error and the neglected tail terms.
pub fn spectral_psi(x: f64, t: f64, packet: &PacketParams, params: &BarrierParams) -> Result<QuadResult> {
    let delta = packet.delta();
    if delta <= 0.0 {
        return Err(Error::domain("spectral oracle requires a wave packet (delta > 0)"));
    }
    if x < params.d() {
        return Err(Error::domain(format!("x = {x} nm lies before the barrier edge")));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    let k0 = packet.k0();
    let alpha = 0.5 * units::hbar_over_m(params.m_ratio()) * t;
    let stationary = x / (2.0 * alpha);
    let k_max = (k0 + 400.0 * delta).max(2.0 * stationary + 10.0 * k0);

    let phase = |k: f64| k * x - alpha * k * k;
    let slope = |k: f64| x - 2.0 * alpha * k;
    let weight = |k: f64| spectral_integrand(k, packet, params);
    let integrand = |k: f64| match weight(k) {
        Ok(w) => w * Complex64::from_polar(1.0, phase(k)),
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    };

    // Features: the Lorentzian peaks at ±k0 (width Δ), the threshold ±k_V,
    // k = 0 and the stationary point.
    let mut points = vec![-k_max, 0.0, k_max, stationary, params.k_v(), -params.k_v()];
    for sign in [-1.0, 1.0] {
        points.push(sign * k0);
        let mut w = 0.25 * delta;
        while w < k_max {
            points.push(sign * k0 + w);
            points.push(sign * k0 - w);
            w *= 2.0;
        }
    }
    points.retain(|p| p.abs() <= k_max);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let dphase_max = x.abs() + params.d() + 2.0 * alpha * k_max;
    let mut breaks = Vec::with_capacity(4096);
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let steepest = slope(a).abs().max(slope(b).abs()) + params.d();
        let mut pieces = ((b - a) * steepest.min(dphase_max) / PANEL_PHASE).ceil().max(1.0) as usize;
        // Resolve the Lorentzian scale near the peaks.
        let near_peak = (a.abs() - k0).abs().min((b.abs() - k0).abs()) < 4.0 * delta;
        if near_peak {
            pieces = pieces.max(((b - a) / (0.25 * delta)).ceil() as usize);
        }
        for i in 0..pieces {
            breaks.push(a + (b - a) * i as f64 / pieces as f64);
        }
    }
    breaks.push(k_max);

    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-11, max_subdivisions: 4_000_000 };
    let body = integrate_with_breaks(integrand, &breaks, opts)?;

    // ∫_K^∞ F e^(iψ) dk ≈ -F(K) e^(iψ(K)) / (iψ'(K)), and likewise at -K.
    let mut tail = Complex64::new(0.0, 0.0);
    let mut tail_error = 0.0;
    for (edge, sign) in [(k_max, -1.0), (-k_max, 1.0)] {
        let f = weight(edge)?;
        let s = slope(edge);
        tail += sign * f * Complex64::from_polar(1.0, phase(edge)) / (Complex64::i() * s);
        // Next term: F'/ψ'² with |F'| ≲ |F| (2/K + d).
        tail_error += f.norm() * (2.0 / k_max + params.d()) / (s * s);
    }
    Ok(QuadResult { value: body.value + tail, error: body.error + tail_error, evaluations: body.evaluations })
}

/// M(x, q; t) = (i/2π) ∫ dk e^(ikx - iħk²t/2m) / (k - q), integrated along
/// the steepest-descent line through the stationary point k_s, with the
/// residue e^(iqx - iħq²t/2m) added when the rotation sweeps across q.
pub fn m_quadrature(x: f64, q: Complex64, t: f64, m_ratio: f64) -> Result<QuadResult> {
    if q.im == 0.0 {
        return Err(Error::domain("the M integral needs a pole off the real axis"));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if !(m_ratio.is_finite() && m_ratio > 0.0) {
        return Err(Error::domain(format!("mass ratio must be positive, got {m_ratio}")));
    }
    let alpha = 0.5 * units::hbar_over_m(m_ratio) * t;
    let ks = x / (2.0 * alpha);
    let rot = Complex64::from_polar(1.0, -FRAC_PI_4);
    let carrier = Complex64::from_polar(1.0, x * x / (4.0 * alpha));
    // Position of q in coordinates along (u) and across (v) the line.
    let rel = (q - ks) * rot.conj();
    let (u_q, v_q) = (rel.re, rel.im);
    if v_q == 0.0 {
        return Err(Error::domain("pole lies on the integration line"));
    }
    let integrand = |u: f64| carrier * (-alpha * u * u).exp() * rot / (ks + u * rot - q);

    let reach = (40.0 / alpha).sqrt();
    let mut breaks = vec![-reach, reach];
    for offset in [0.0, 1.0, -1.0, 4.0, -4.0, 16.0, -16.0] {
        let p = u_q + offset * v_q.abs();
        if p.abs() < reach {
            breaks.push(p);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_subdivisions: 100_000 };
    let line = integrate_with_breaks(integrand, &breaks, opts)?;

    let dr = q.re - ks;
    let residue = || (Complex64::i() * q * x - Complex64::i() * alpha * q * q).exp();
    let correction = if dr > 0.0 && q.im < 0.0 && q.im > -dr {
        -2.0 * PI * Complex64::i() * residue()
    } else if dr < 0.0 && q.im > 0.0 && q.im < -dr {
        2.0 * PI * Complex64::i() * residue()
    } else {
        Complex64::new(0.0, 0.0)
    };
    let value = Complex64::i() / (2.0 * PI) * (line.value + correction);
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Integration { estimate: value, error: f64::INFINITY });
    }
    Ok(QuadResult { value, error: line.error / (2.0 * PI), evaluations: line.evaluations })
}
