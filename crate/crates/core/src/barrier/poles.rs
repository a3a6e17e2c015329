//! Zeros of g(k) in the lower half-plane (the poles of T), certified
//! complete by the argument principle.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::contour::{winding_number, Rectangle};
use super::{g_and_derivative, g_function, residue_explicit, BarrierParams};
use crate::error::{Error, Result};

const NEWTON_TOLERANCE: f64 = 1e-13;
const MAX_NEWTON: usize = 60;
const MAX_FIXED_POINT: usize = 200;
const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    /// Signed index; sign(n) = sign(Re k). Poles on the imaginary axis have n = 0.
    pub n: i64,
    /// Pole position in nm⁻¹, Im k < 0.
    pub k: Complex64,
    /// Residue of T at k, in nm⁻¹.
    pub residue: Complex64,
    /// |g(k)| after refinement.
    pub g_residual: f64,
}

/// Result of the argument-principle completeness check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    /// Zeros of g inside `contour`, which encloses every stored pole with Re k > 0.
    pub winding_number: i64,
    pub contour: Rectangle,
    /// Zeros of g in a thin strip around the negative imaginary axis
    /// reaching down to `contour.im_min`.
    pub axis_zero_count: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleTable {
    params: BarrierParams,
    count_per_quadrant: usize,
    /// n = 1, 2, ..., sorted by Re k.
    positive: Vec<Pole>,
    /// n = -1, -2, ..., mirror images k_{-n} = -conj(k_n).
    negative: Vec<Pole>,
    /// Zeros on the negative imaginary axis (n = 0), if any.
    axis: Vec<Pole>,
    certificate: Option<Certificate>,
}

fn newton(seed: Complex64, params: &BarrierParams, n: i64) -> Result<Complex64> {
    let mut k = seed;
    for _ in 0..MAX_NEWTON {
        let (g, dg) = g_and_derivative(k, params)?;
        let step = g / dg;
        k -= step;
        if !(k.re.is_finite() && k.im.is_finite()) {
            break;
        }
        if step.norm() <= NEWTON_TOLERANCE * k.norm() {
            return Ok(k);
        }
    }
    Err(Error::SeedFailure { n, iterations: MAX_NEWTON })
}

/// Seed for the n-th fourth-quadrant zero from the fixed point of
/// q d = nπ - i Log((k+q)/(k-q)), k = sqrt(q² + k_V²), which is an exact
/// rewriting of g = 0 and contracts whenever |k d| > 2.
fn asymptotic_seed(n: usize, params: &BarrierParams) -> Complex64 {
    let d = params.d();
    let kv = params.k_v();
    let npi = n as f64 * PI;
    let mut q = Complex64::new(npi, -(1.0 + (2.0 * npi / (kv * d)).powi(2)).ln()) / d;
    for _ in 0..MAX_FIXED_POINT {
        let k = (q * q + kv * kv).sqrt();
        // Log((k+q)/(k-q)) = 2 Log(k+q) - 2 ln k_V, with no branch wrap.
        let log = 2.0 * (k + q).ln() - 2.0 * kv.ln();
        let next = (npi - Complex64::i() * log) / d;
        let done = (next - q).norm() <= 1e-15 * q.norm();
        q = next;
        if done || !(q.re.is_finite() && q.im.is_finite()) {
            break;
        }
    }
    (q * q + kv * kv).sqrt()
}

/// Half-width of the strip around the imaginary axis whose zeros are
/// handled as axis zeros rather than quadrant zeros.
fn axis_edge(params: &BarrierParams) -> f64 {
    1e-6 * params.k_v().min(1.0 / params.d())
}

fn refine_in_quadrant(seed: Complex64, params: &BarrierParams, n: i64) -> Option<Complex64> {
    let edge = axis_edge(params);
    newton(seed, params, n).ok().filter(|k| k.re > edge && k.im < 0.0)
}

/// Inserts `k` unless an equal zero is already present; keeps Re order.
fn insert_distinct(zeros: &mut Vec<Complex64>, k: Complex64) -> bool {
    if zeros.iter().any(|z| (z - k).norm() <= 1e-8 * k.norm()) {
        return false;
    }
    let at = zeros.partition_point(|z| z.re < k.re);
    zeros.insert(at, k);
    true
}

/// At least `count` distinct zeros of g with Re k > 0, Im k < 0, sorted by
/// Re k. Seed n usually lands on the n-th zero, but for weak barriers the
/// lowest pairs migrate onto the imaginary axis, so the caller must certify
/// that the list has no gaps.
fn fourth_quadrant_zeros(params: &BarrierParams, count: usize) -> Vec<Complex64> {
    let mut zeros = Vec::with_capacity(count + 2);
    let mut next_seed = 1;
    while zeros.len() < count && next_seed <= 4 * count + 8 {
        let upto = next_seed + (count - zeros.len()) + 1;
        let found: Vec<Option<Complex64>> = (next_seed..upto)
            .into_par_iter()
            .map(|n| refine_in_quadrant(asymptotic_seed(n, params), params, n as i64))
            .collect();
        for k in found.into_iter().flatten() {
            insert_distinct(&mut zeros, k);
        }
        next_seed = upto;
    }
    zeros
}

/// Continuation seeds for zeros that the asymptotic seeds skipped: midpoints
/// of gaps and a linear step below the lowest known zero.
fn recover_missing(zeros: &mut Vec<Complex64>, params: &BarrierParams, limit: usize) -> bool {
    let spacing = PI / params.d();
    let mut seeds = Vec::new();
    if let [a, b, ..] = zeros[..] {
        seeds.push(a - (b - a));
        seeds.push(a - spacing);
    }
    for w in zeros[..limit.min(zeros.len())].windows(2) {
        seeds.push(0.5 * (w[0] + w[1]));
    }
    let mut added = false;
    for seed in seeds {
        if let Some(k) = refine_in_quadrant(seed, params, 0) {
            added |= insert_distinct(zeros, k);
        }
    }
    added
}

/// Zeros of the real function g(-iκ) for κ in [kappa_min, kappa_max].
fn axis_zeros(params: &BarrierParams, kappa_min: f64, kappa_max: f64) -> Result<Vec<Complex64>> {
    let on_axis = |kappa: f64| -> Result<f64> { Ok(g_function(Complex64::new(0.0, -kappa), params)?.re) };
    let samples = 20_000;
    let ratio = (kappa_max / kappa_min).powf(1.0 / samples as f64);
    let mut found = Vec::new();
    let mut a = kappa_min;
    let mut fa = on_axis(a)?;
    for _ in 0..samples {
        let b = a * ratio;
        let fb = on_axis(b)?;
        if fa == 0.0 {
            found.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = on_axis(mid)?;
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            found.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    Ok(found.into_iter().map(|kappa| Complex64::new(0.0, -kappa)).collect())
}

fn make_pole(n: i64, k: Complex64, params: &BarrierParams) -> Result<Pole> {
    let residue = residue_explicit(k, params)?;
    let g_residual = g_function(k, params)?.norm();
    Ok(Pole { n, k, residue, g_residual })
}

/// Locates `count_per_quadrant` poles with Re k > 0 together with their
/// mirror partners k_{-n} = -conj(k_n), each refined independently, and
/// certifies by the argument principle that no zero of g was skipped.
pub fn find_poles(params: &BarrierParams, count_per_quadrant: usize) -> Result<PoleTable> {
    if count_per_quadrant == 0 {
        return Err(Error::domain("count_per_quadrant must be at least 1"));
    }
    let d = params.d();
    let step = (0.1 / d).min(0.05);
    let edge = axis_edge(params);
    let g = |k: Complex64| g_function(k, params);

    // One extra zero fixes the right edge of the certifying contour.
    let mut zeros = fourth_quadrant_zeros(params, count_per_quadrant + 1);
    let mut recovery_rounds = 0;
    let (contour, winding) = loop {
        if zeros.len() <= count_per_quadrant {
            return Err(Error::Completeness { expected: count_per_quadrant, found: zeros.len() as i64 });
        }
        let deepest = zeros[..=count_per_quadrant].iter().map(|k| k.im).fold(0.0, f64::min);
        let margin = (0.25 * deepest.abs()).max(1.0 / d);
        let contour = Rectangle {
            re_min: edge,
            re_max: 0.5 * (zeros[count_per_quadrant - 1].re + zeros[count_per_quadrant].re),
            im_min: deepest - margin,
            // g has no zeros above the real axis (no bound states), and a
            // raised top edge stays clear of near-real resonances.
            im_max: 1.0 / d,
        };
        let winding = winding_number(g, &contour, step)?;
        if winding == count_per_quadrant as i64 {
            break (contour, winding);
        }
        if winding < count_per_quadrant as i64 || recovery_rounds == 3 {
            return Err(Error::Completeness { expected: count_per_quadrant, found: winding });
        }
        log::debug!("argument principle counts {winding} zeros, expected {count_per_quadrant}; recovering");
        recovery_rounds += 1;
        if !recover_missing(&mut zeros, params, count_per_quadrant + 1) {
            return Err(Error::Completeness { expected: count_per_quadrant, found: winding });
        }
    };
    let stored = &zeros[..count_per_quadrant];

    let strip = Rectangle { re_min: -edge, re_max: edge, im_min: contour.im_min, im_max: -edge };
    let axis_zero_count = winding_number(g, &strip, step)?;
    let axis_k = if axis_zero_count > 0 {
        let found = axis_zeros(params, edge, -contour.im_min)?;
        if found.len() as i64 != axis_zero_count {
            return Err(Error::Completeness { expected: axis_zero_count as usize, found: found.len() as i64 });
        }
        found
    } else {
        Vec::new()
    };

    let pairs: Vec<Result<(Pole, Pole)>> = stored
        .par_iter()
        .enumerate()
        .map(|(i, &k)| {
            let n = i as i64 + 1;
            let mirror = newton(-k.conj(), params, -n)?;
            Ok((make_pole(n, k, params)?, make_pole(-n, mirror, params)?))
        })
        .collect();
    let mut positive = Vec::with_capacity(count_per_quadrant);
    let mut negative = Vec::with_capacity(count_per_quadrant);
    for pair in pairs {
        let (p, m) = pair?;
        positive.push(p);
        negative.push(m);
    }
    let axis = axis_k
        .into_iter()
        .map(|k| newton(k, params, 0).and_then(|k| make_pole(0, k, params)))
        .collect::<Result<Vec<_>>>()?;

    let table = PoleTable {
        params: *params,
        count_per_quadrant,
        positive,
        negative,
        axis,
        certificate: Some(Certificate { winding_number: winding, contour, axis_zero_count }),
    };
    table.check_symmetry()?;
    Ok(table)
}

fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

impl PoleTable {
    pub fn params(&self) -> &BarrierParams {
        &self.params
    }

    pub fn count_per_quadrant(&self) -> usize {
        self.count_per_quadrant
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub fn positive(&self) -> &[Pole] {
        &self.positive
    }

    pub fn negative(&self) -> &[Pole] {
        &self.negative
    }

    pub fn axis(&self) -> &[Pole] {
        &self.axis
    }

    /// (k_n, k_{-n}) for n = 1, 2, ...
    pub fn pairs(&self) -> impl Iterator<Item = (&Pole, &Pole)> {
        self.positive.iter().zip(&self.negative)
    }

    /// Every stored pole: the pairs in ascending n, then the axis poles.
    pub fn iter(&self) -> impl Iterator<Item = &Pole> {
        self.pairs().flat_map(|(p, m)| [p, m]).chain(&self.axis)
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len() + self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The first `pairs` symmetric pairs plus the axis poles. The result
    /// carries no completeness certificate.
    pub fn truncated(&self, pairs: usize) -> PoleTable {
        let n = pairs.min(self.count_per_quadrant);
        PoleTable {
            params: self.params,
            count_per_quadrant: n,
            positive: self.positive[..n].to_vec(),
            negative: self.negative[..n].to_vec(),
            axis: self.axis.clone(),
            certificate: None,
        }
    }

    pub fn matches(&self, params: &BarrierParams, count_per_quadrant: usize) -> bool {
        self.params == *params && self.count_per_quadrant == count_per_quadrant
    }

    fn check_symmetry(&self) -> Result<()> {
        for (p, m) in self.pairs() {
            if rel_diff(m.k, -p.k.conj()) > SYMMETRY_TOLERANCE
                || rel_diff(m.residue, -p.residue.conj()) > SYMMETRY_TOLERANCE
            {
                return Err(Error::domain(format!(
                    "pole pair {} breaks the mirror symmetry: k = {}, {}; r = {}, {}",
                    p.n, p.k, m.k, p.residue, m.residue
                )));
            }
        }
        Ok(())
    }

    /// JSON document `{"header": {...}, "poles": [...]}` with poles in
    /// ascending n and floats written with 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n  \"header\": {");
        let _ = write!(
            out,
            "\"V0_eV\": {}, \"d_nm\": {}, \"m_ratio\": {}, \"count_per_quadrant\": {}",
            fmt17(self.params.v0()),
            fmt17(self.params.d()),
            fmt17(self.params.m_ratio()),
            self.count_per_quadrant
        );
        if let Some(c) = &self.certificate {
            let _ = write!(
                out,
                ", \"certificate\": {{\"winding_number\": {}, \"axis_zero_count\": {}, \"contour\": \
                 {{\"re_min\": {}, \"re_max\": {}, \"im_min\": {}, \"im_max\": {}}}}}",
                c.winding_number,
                c.axis_zero_count,
                fmt17(c.contour.re_min),
                fmt17(c.contour.re_max),
                fmt17(c.contour.im_min),
                fmt17(c.contour.im_max)
            );
        }
        out.push_str("},\n  \"poles\": [");
        let ordered = self.negative.iter().rev().chain(&self.axis).chain(&self.positive);
        for (i, p) in ordered.enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(
                out,
                "\n    {{\"n\": {}, \"k_re\": {}, \"k_im\": {}, \"r_re\": {}, \"r_im\": {}, \"g_residual\": {}}}",
                p.n,
                fmt17(p.k.re),
                fmt17(p.k.im),
                fmt17(p.residue.re),
                fmt17(p.residue.im),
                fmt17(p.g_residual)
            );
        }
        out.push_str("\n  ]\n}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<PoleTable> {
        let doc: TableDocument =
            serde_json::from_str(text).map_err(|e| Error::domain(format!("pole table JSON: {e}")))?;
        let h = doc.header;
        let params = BarrierParams::new(h.v0_ev, h.d_nm, h.m_ratio)?;
        let count = h.count_per_quadrant;
        let mut positive = vec![None; count];
        let mut negative = vec![None; count];
        let mut axis = Vec::new();
        for r in doc.poles {
            let pole = Pole {
                n: r.n,
                k: Complex64::new(r.k_re, r.k_im),
                residue: Complex64::new(r.r_re, r.r_im),
                g_residual: r.g_residual,
            };
            if !(pole.k.im < 0.0) {
                return Err(Error::domain(format!("pole {} is not in the lower half-plane", r.n)));
            }
            let idx = r.n.unsigned_abs() as usize;
            let slot = match r.n.signum() {
                0 => {
                    axis.push(pole);
                    continue;
                }
                1 => positive.get_mut(idx.wrapping_sub(1)),
                _ => negative.get_mut(idx.wrapping_sub(1)),
            };
            match slot {
                Some(s @ None) => *s = Some(pole),
                _ => return Err(Error::domain(format!("pole index {} duplicated or out of range", r.n))),
            }
        }
        let collect = |v: Vec<Option<Pole>>| -> Result<Vec<Pole>> {
            v.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| Error::domain("pole table is missing entries"))
        };
        let table = PoleTable {
            params,
            count_per_quadrant: count,
            positive: collect(positive)?,
            negative: collect(negative)?,
            axis,
            certificate: h.certificate,
        };
        if let Some(c) = &table.certificate {
            if c.winding_number != count as i64 || c.axis_zero_count != table.axis.len() as i64 {
                return Err(Error::Completeness { expected: count, found: c.winding_number });
            }
        }
        table.check_symmetry()?;
        Ok(table)
    }
}

/// Shortest exponent form with 17 significant digits.
pub(crate) fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableHeader {
    #[serde(rename = "V0_eV")]
    v0_ev: f64,
    d_nm: f64,
    m_ratio: f64,
    count_per_quadrant: usize,
    #[serde(default)]
    certificate: Option<Certificate>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PoleRecord {
    n: i64,
    k_re: f64,
    k_im: f64,
    r_re: f64,
    r_im: f64,
    g_residual: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDocument {
    header: TableHeader,
    poles: Vec<PoleRecord>,
}
