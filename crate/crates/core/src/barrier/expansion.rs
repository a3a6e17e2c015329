//! Pole expansion of the transmission amplitude.

use num_complex::Complex64;

use super::poles::{Pole, PoleTable};
use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

/// r/(k - k_n) + r/k_n, written so the constant term does not cancel at small k.
fn term(k: f64, pole: &Pole) -> Complex64 {
    pole.residue * k / (pole.k * (k - pole.k))
}

/// Symmetric partial sum of T(k) = Σ_n [r_n/(k-k_n) + r_n/k_n] over all
/// poles in `table`. Mirror pairs (n, -n) are combined before accumulation.
pub fn mittag_leffler_t(k: f64, table: &PoleTable) -> Result<Complex64> {
    if table.is_empty() {
        return Err(Error::domain("pole table is empty"));
    }
    if !k.is_finite() {
        return Err(Error::domain(format!("wavenumber must be finite, got {k}")));
    }
    let mut sum = CompensatedSum::new();
    for (p, m) in table.pairs() {
        sum.add(term(k, p) + term(k, m));
    }
    for a in table.axis() {
        sum.add(term(k, a));
    }
    let value = sum.value();
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { exponent: f64::INFINITY })
    }
}
