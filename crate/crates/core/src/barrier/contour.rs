//! Zero counting by the argument principle, tracking the continuous change
//! of arg f along the boundary of a rectangle.

use std::f64::consts::{FRAC_PI_4, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.re_min && z.re < self.re_max && z.im > self.im_min && z.im < self.im_max
    }

    /// Corners in counter-clockwise order starting bottom-left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

const MAX_DEPTH: u32 = 48;
const MAX_SAMPLES: f64 = 2e7;

/// Phase increment of f from a to b, bisecting until every piece turns by
/// less than π/4.
fn phase_increment<F>(f: &F, a: Complex64, fa: Complex64, b: Complex64, fb: Complex64, depth: u32) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if fa.norm() == 0.0 || fb.norm() == 0.0 {
        return Err(Error::domain(format!("argument principle: f vanishes on the contour near {a}")));
    }
    let step = (fb / fa).arg();
    if step.abs() < FRAC_PI_4 {
        return Ok(step);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::domain(format!(
            "argument principle: cannot resolve the phase of f between {a} and {b}; a zero lies on the contour"
        )));
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid)?;
    Ok(phase_increment(f, a, fa, mid, fm, depth + 1)? + phase_increment(f, mid, fm, b, fb, depth + 1)?)
}

/// Number of zeros minus poles of f inside `rect`.
///
/// Each edge is first sampled with spacing at most `max_step`, which must be
/// small compared with the distance from the contour to the nearest zero so
/// that no full turn of the phase can hide between samples.
pub fn winding_number<F>(f: F, rect: &Rectangle, max_step: f64) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if !(rect.re_max > rect.re_min && rect.im_max > rect.im_min) || !(max_step > 0.0) {
        return Err(Error::domain(format!("degenerate contour {rect:?}")));
    }
    let perimeter = 2.0 * ((rect.re_max - rect.re_min) + (rect.im_max - rect.im_min));
    if perimeter / max_step > MAX_SAMPLES {
        return Err(Error::domain(format!(
            "argument principle: contour {rect:?} needs {:.1e} samples at spacing {max_step}",
            perimeter / max_step
        )));
    }
    let corners = rect.corners();
    let mut total = 0.0;
    for i in 0..4 {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        let steps = ((b - a).norm() / max_step).ceil().max(1.0) as usize;
        let mut z0 = a;
        let mut f0 = f(z0)?;
        for s in 1..=steps {
            let z1 = a + (b - a) * (s as f64 / steps as f64);
            let f1 = f(z1)?;
            total += phase_increment(&f, z0, f0, z1, f1, 0)?;
            z0 = z1;
            f0 = f1;
        }
    }
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 1e-6 {
        return Err(Error::domain(format!("argument principle: non-integer winding {turns}")));
    }
    Ok(rounded as i64)
}
