//! The Faddeeva function w(z) = e^(-z²) erfc(-iz).
//!
//! The closed upper half-plane is evaluated with Gautschi's scheme as
//! refined by Poppe and Wijers: a truncated Taylor series of erf inside a
//! small ellipse around the origin, the Laplace continued fraction
//! accelerated by a Taylor shift `h` in the intermediate region, and the
//! plain continued fraction (degenerating to the leading asymptotic term
//! i/(√π z)) far from the origin. Observed relative error is a few ulp.
//!
//! The lower half-plane goes through the reflection
//! w(z) = 2 e^(-z²) - w(-z); `e^(-z²)` overflows once y² - x² exceeds the
//! exponent range, which is reported rather than returned as infinity.

use std::f64::consts::FRAC_2_SQRT_PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex amplitudes are plain complex doubles.
pub type ComplexAmplitude = Complex64;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_286_948_079_451_560_772_6;

/// Largest argument of `exp` that stays finite.
pub const MAX_EXP_ARG: f64 = 709.782_712_893_384;

// Beyond this modulus, w(z) = i/(√π z) to full precision.
const ASYMPTOTIC_MODULUS: f64 = 1e8;

/// w(z) over the whole complex plane.
pub fn wofz(z: Complex64) -> Result<Complex64> {
    wofz_scaled(z, Complex64::new(0.0, 0.0))
}

/// e^(log_prefactor) · w(z), combining the prefactor with the reflection
/// exponential before exponentiating so that large-but-cancelling factors
/// never overflow separately.
pub fn wofz_scaled(z: Complex64, log_prefactor: Complex64) -> Result<Complex64> {
    if z.re.is_nan() || z.im.is_nan() {
        return Err(Error::domain("w(z) of a NaN argument"));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain(format!("w(z) needs a finite argument, got {z}")));
    }
    if z.im >= 0.0 {
        return Ok(log_prefactor.exp() * w_upper(z));
    }
    let minus_z2 = Complex64::new((z.im - z.re) * (z.im + z.re), -2.0 * z.re * z.im);
    let exponent = minus_z2 + log_prefactor;
    if exponent.re > MAX_EXP_ARG - std::f64::consts::LN_2 {
        return Err(Error::Overflow { exponent: exponent.re });
    }
    Ok(2.0 * exponent.exp() - log_prefactor.exp() * w_upper(-z))
}

/// w'(z) = -2z w(z) + 2i/√π, given w(z).
pub fn wofz_derivative(z: Complex64, w: Complex64) -> Complex64 {
    -2.0 * z * w + Complex64::new(0.0, FRAC_2_SQRT_PI)
}

/// w(z) for Im z ≥ 0.
fn w_upper(z: Complex64) -> Complex64 {
    debug_assert!(z.im >= 0.0);
    let xabs = z.re.abs();
    let y = z.im;

    let w = if xabs.hypot(y) > ASYMPTOTIC_MODULUS {
        let zf = Complex64::new(xabs, y);
        Complex64::new(0.0, FRAC_1_SQRT_PI) / zf
    } else {
        let sx = xabs / 6.3;
        let sy = y / 4.4;
        let rho2 = sx * sx + sy * sy;
        if rho2 < 0.085_264 {
            small_series(xabs, y, sy, rho2)
        } else {
            continued_fraction(xabs, y, sy, rho2)
        }
    };
    if z.re < 0.0 {
        // w(-x + iy) = conj(w(x + iy))
        w.conj()
    } else {
        w
    }
}

/// Taylor series of erf around the origin, for the first quadrant.
fn small_series(x: f64, y: f64, sy: f64, rho2: f64) -> Complex64 {
    let rho = (1.0 - 0.85 * sy) * rho2.sqrt();
    let n = (6.0 + 72.0 * rho).round() as usize;
    let z2 = Complex64::new((x - y) * (x + y), 2.0 * x * y);
    let mut j = 2 * n + 1;
    let mut sum = Complex64::new(1.0 / j as f64, 0.0);
    for i in (1..=n).rev() {
        j -= 2;
        sum = sum * z2 / i as f64 + 1.0 / j as f64;
    }
    // erf(-iz) via its series: erfc(-iz) = 1 + (2/√π) i z Σ (z²)^k / (k!(2k+1)).
    let iz = Complex64::new(-y, x);
    let erfc_miz = 1.0 + FRAC_2_SQRT_PI * iz * sum;
    let minus_z2 = -z2;
    minus_z2.exp() * erfc_miz
}

/// Laplace continued fraction, optionally combined with a Taylor shift.
fn continued_fraction(x: f64, y: f64, sy: f64, rho2: f64) -> Complex64 {
    let (h, kapn, nu) = if rho2 > 1.0 {
        let rho = rho2.sqrt();
        (0.0, 0usize, (3.0 + 1442.0 / (26.0 * rho + 77.0)) as usize)
    } else {
        let rho = (1.0 - sy) * (1.0 - rho2).sqrt();
        (1.88 * rho, (7.0 + 34.0 * rho).round() as usize, (16.0 + 26.0 * rho).round() as usize)
    };
    let shifted = h > 0.0;
    let h2 = 2.0 * h;
    let mut lambda = if shifted { h2.powi(kapn as i32) } else { 0.0 };
    let mut r = Complex64::new(0.0, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    for n in (0..=nu).rev() {
        let np1 = (n + 1) as f64;
        let tx = y + h + np1 * r.re;
        let ty = x - np1 * r.im;
        let c = 0.5 / (tx * tx + ty * ty);
        r = Complex64::new(c * tx, c * ty);
        if shifted && n <= kapn {
            s = r * (lambda + s);
            lambda /= h2;
        }
    }
    let mut w = if shifted { s * FRAC_2_SQRT_PI } else { r * FRAC_2_SQRT_PI };
    if y == 0.0 {
        w.re = (-x * x).exp();
    }
    w
}
