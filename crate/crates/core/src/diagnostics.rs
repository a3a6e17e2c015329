//! Observables of the transmitted wave: density time series, the
//! time-domain resonance peak, under/over-barrier transmission, local
//! average frequency and instantaneous bandwidth.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::barrier::{transmission_amplitude, BarrierParams};
use crate::error::{Error, Result};
use crate::numerics::{integrate_real, QuadOptions};
use crate::propagator::{phi_k, EvaluationPoint, Mode, PacketParams, TransmittedWave};
use crate::units;

/// Default coarse grid: 2000 points over [0.01, 5] t_f.
pub const DEFAULT_GRID: (f64, f64, usize) = (0.01, 5.0, 2000);

/// Final golden-section bracket, in units of t_f.
const PEAK_WIDTH: f64 = 1e-6;

/// Bound on the neglected spectral tail relative to P_over. Doubling K_max
/// adds up to 7/8 of the bound, so it must sit well below 1e-8.
const TAIL_TOLERANCE: f64 = 1e-9;

/// Below this |Ψ| the phase of Ψ, and hence ω_av and σ, is meaningless.
const UNDERFLOW: f64 = 1e-150;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityTimeSeries {
    /// Observation point in nm.
    pub x: f64,
    pub mode: Mode,
    /// Free passage time in fs, the unit of `t_over_tf`.
    pub t_f: f64,
    /// Strictly increasing times in fs.
    pub times: Vec<f64>,
    pub psi: Vec<Complex64>,
    /// |Ψ|²: relative (dimensionless) for the cutoff wave, nm⁻¹ for a packet.
    pub density: Vec<f64>,
}

impl DensityTimeSeries {
    pub fn new(x: f64, mode: Mode, t_f: f64, times: Vec<f64>, psi: Vec<Complex64>) -> Result<Self> {
        if times.len() != psi.len() {
            return Err(Error::domain("times and amplitudes differ in length"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("times must be strictly increasing"));
        }
        let density = psi.iter().map(|p| p.norm_sqr()).collect();
        Ok(Self { x, mode, t_f, times, psi, density })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_over_tf(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.iter().map(move |t| t / self.t_f)
    }
}

/// `steps` equally spaced times from t_min to t_max (both in units of t_f),
/// returned in fs.
pub fn time_grid(t_min_over_tf: f64, t_max_over_tf: f64, steps: usize, t_f: f64) -> Result<Vec<f64>> {
    if !(t_min_over_tf > 0.0 && t_max_over_tf > t_min_over_tf && t_max_over_tf.is_finite()) {
        return Err(Error::domain(format!(
            "time window must satisfy 0 < t_min < t_max, got [{t_min_over_tf}, {t_max_over_tf}]"
        )));
    }
    if steps < 2 {
        return Err(Error::domain(format!("a time grid needs at least 2 points, got {steps}")));
    }
    let span = t_max_over_tf - t_min_over_tf;
    Ok((0..steps).map(|i| t_f * (t_min_over_tf + span * i as f64 / (steps - 1) as f64)).collect())
}

/// Ψ(x, t) and |Ψ|² on the grid, evaluated in parallel and kept in grid order.
pub fn density_series(wave: &TransmittedWave, x: f64, times: &[f64], t_f: f64) -> Result<DensityTimeSeries> {
    let psi = times.par_iter().map(|&t| wave.psi(&EvaluationPoint::new(x, t)?)).collect::<Result<Vec<_>>>()?;
    DensityTimeSeries::new(x, wave.mode(), t_f, times.to_vec(), psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonancePeak {
    pub t_p: f64,
    pub t_p_over_tf: f64,
    pub peak_density: f64,
    /// Width of the final bracket in fs.
    pub refinement_width: f64,
    pub bracket: (f64, f64),
}

/// Locates the largest grid value of the series, then refines it by
/// golden-section search on the analytic density.
pub fn find_peak(wave: &TransmittedWave, series: &DensityTimeSeries) -> Result<ResonancePeak> {
    let len = series.len();
    let index = series
        .density
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or(Error::NoInteriorPeak { index: 0, len })?;
    if index == 0 || index + 1 == len {
        return Err(Error::NoInteriorPeak { index, len });
    }
    let density = |t: f64| -> Result<f64> { Ok(wave.psi(&EvaluationPoint::new(series.x, t)?)?.norm_sqr()) };
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (series.times[index - 1], series.times[index + 1]);
    let mut c = b - golden * (b - a);
    let mut e = a + golden * (b - a);
    let (mut fc, mut fe) = (density(c)?, density(e)?);
    while b - a > PEAK_WIDTH * series.t_f {
        if fc >= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - golden * (b - a);
            fc = density(c)?;
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + golden * (b - a);
            fe = density(e)?;
        }
    }
    let (t_p, peak_density) = if fc >= fe { (c, fc) } else { (e, fe) };
    Ok(ResonancePeak { t_p, t_p_over_tf: t_p / series.t_f, peak_density, refinement_width: b - a, bracket: (a, b) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransmissionSplit {
    pub p_under: f64,
    pub p_over: f64,
    /// Upper limit of the over-barrier integral, nm⁻¹.
    pub k_max: f64,
    /// Bound on the neglected ∫_{k_max}^∞ |T|²|φ|² dk.
    pub tail_bound: f64,
}

/// P_under = ∫_0^{k_V} |T|²|φ|² dk and P_over = ∫_{k_V}^{K} |T|²|φ|² dk, with
/// K doubled until the Lorentzian bound on the remainder, using |T| ≤ 1,
/// falls below 1e-9 of P_over.
pub fn transmission_split(packet: &PacketParams, params: &BarrierParams) -> Result<TransmissionSplit> {
    let a = packet.amplitude().ok_or_else(|| Error::domain("transmission split requires a wave packet (delta > 0)"))?;
    let k0 = packet.k0();
    let delta = packet.delta();
    let kv = params.k_v();
    let integrand = |k: f64| -> f64 {
        let t = transmission_amplitude(Complex64::new(k, 0.0), params).map_or(f64::NAN, |t| t.norm_sqr());
        let phi = phi_k(k, packet).map_or(f64::NAN, |p| p.norm_sqr());
        t * phi
    };
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-11, max_subdivisions: 200_000 };
    // Break points at the Lorentzian peak and its half-widths, and at the
    // over-barrier resonances q d = nπ.
    let breaks_in = |lo: f64, hi: f64| -> Vec<f64> {
        let mut pts = vec![lo, hi];
        for p in [k0 - delta, k0, k0 + delta] {
            if p > lo && p < hi {
                pts.push(p);
            }
        }
        let d = params.d();
        let mut n = 1.0;
        loop {
            let k = ((n * PI / d).powi(2) + kv * kv).sqrt();
            if k >= hi || pts.len() > 4000 {
                break;
            }
            if k > lo {
                pts.push(k);
            }
            n += 1.0;
        }
        pts.sort_by(f64::total_cmp);
        pts
    };
    let tail = |k_max: f64| 2.0 * PI * a * a * 4.0 * k0 * k0 / (3.0 * (k_max - k0).powi(3));

    let (p_under, _) = integrate_real(integrand, &breaks_in(0.0, kv), opts)?;
    let mut k_max = (2.0 * kv).max(k0 + 50.0 * delta);
    let (mut p_over, _) = integrate_real(integrand, &breaks_in(kv, k_max), opts)?;
    while tail(k_max) >= TAIL_TOLERANCE * p_over {
        let (extra, _) = integrate_real(integrand, &breaks_in(k_max, 2.0 * k_max), opts)?;
        p_over += extra;
        k_max *= 2.0;
    }
    Ok(TransmissionSplit { p_under, p_over, k_max, tail_bound: tail(k_max) })
}

/// (1/Ψ) ∂Ψ/∂t in fs⁻¹.
pub fn log_derivative(wave: &TransmittedWave, point: &EvaluationPoint) -> Result<Complex64> {
    let (psi, dpsi) = wave.psi_and_time_derivative(point)?;
    if !(psi.norm() > UNDERFLOW) {
        return Err(Error::UndefinedFrequency(psi.norm()));
    }
    Ok(dpsi / psi)
}

/// ω_av = -Im[(1/Ψ) ∂Ψ/∂t], fs⁻¹.
pub fn local_frequency(wave: &TransmittedWave, point: &EvaluationPoint) -> Result<f64> {
    Ok(-log_derivative(wave, point)?.im)
}

/// σ = |Re[(1/Ψ) ∂Ψ/∂t]|, fs⁻¹.
pub fn bandwidth(wave: &TransmittedWave, point: &EvaluationPoint) -> Result<f64> {
    Ok(log_derivative(wave, point)?.re.abs())
}

/// ⟨E⟩ = (1 + (Δ/k0)²) E0 in eV.
pub fn mean_energy(packet: &PacketParams, m_ratio: f64) -> Result<f64> {
    let e0 = units::energy_from_wavenumber(packet.k0(), m_ratio)?;
    Ok((1.0 + (packet.delta() / packet.k0()).powi(2)) * e0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::tests::{baseline_barrier, baseline_table};
    use crate::propagator::tests::{baseline_k0, baseline_tf, M_RATIO};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn wave(ratio: f64) -> TransmittedWave {
        let packet = PacketParams::new(baseline_k0(), ratio * baseline_k0()).unwrap();
        TransmittedWave::new(&baseline_barrier(), &packet, baseline_table()).unwrap()
    }

    fn series(w: &TransmittedWave, steps: usize) -> DensityTimeSeries {
        let tf = baseline_tf();
        let times = time_grid(DEFAULT_GRID.0, DEFAULT_GRID.1, steps, tf).unwrap();
        density_series(w, 4.0, &times, tf).unwrap()
    }

    /// Peaks for Δ/k0 = 0, 0.75 and 4, from the default grid.
    fn peaks() -> &'static [(f64, ResonancePeak); 3] {
        static PEAKS: OnceLock<[(f64, ResonancePeak); 3]> = OnceLock::new();
        PEAKS.get_or_init(|| {
            [0.0, 0.75, 4.0].map(|r| {
                let w = wave(r);
                (r, find_peak(&w, &series(&w, DEFAULT_GRID.2)).unwrap())
            })
        })
    }

    #[test]
    fn grid_and_series_validation() {
        assert!(time_grid(0.0, 1.0, 10, 1.0).is_err());
        assert!(time_grid(1.0, 0.5, 10, 1.0).is_err());
        assert!(time_grid(0.1, 1.0, 1, 1.0).is_err());
        let g = time_grid(0.1, 1.0, 2, 2.0).unwrap();
        assert_eq!(g, vec![0.2, 2.0]);
        let z = Complex64::new(1.0, 0.0);
        assert!(DensityTimeSeries::new(4.0, Mode::Cutoff, 1.0, vec![1.0, 1.0], vec![z, z]).is_err());
        assert!(DensityTimeSeries::new(4.0, Mode::Cutoff, 1.0, vec![1.0], vec![z, z]).is_err());
    }

    #[test]
    fn cutoff_series_has_a_single_early_peak() {
        let w = wave(0.0);
        let s = series(&w, 400);
        assert!(s.density.iter().all(|&d| d >= 0.0));
        let peak = find_peak(&w, &s).unwrap();
        // Density rises to the peak and then never returns to that height.
        let ip = s.times.iter().position(|&t| t > peak.t_p).unwrap();
        assert!(s.density[..ip].windows(2).all(|w| w[1] >= w[0]));
        assert!(s.density[ip..].iter().all(|&d| d < peak.peak_density));
    }

    #[test]
    fn resonance_peak_times() {
        for ((ratio, peak), expected) in peaks().iter().zip([0.303, 0.288, 0.221]) {
            assert!((peak.t_p_over_tf - expected).abs() <= 0.005, "Δ/k0 = {ratio}: {}", peak.t_p_over_tf);
            assert!(peak.refinement_width <= 1e-4 * baseline_tf());
            let w = wave(*ratio);
            let at = |t: f64| w.psi(&EvaluationPoint::new(4.0, t).unwrap()).unwrap().norm_sqr();
            assert!(peak.peak_density >= at(peak.bracket.0) && peak.peak_density >= at(peak.bracket.1));
        }
        let shift = |i: usize| 1.0 - peaks()[i].1.t_p / peaks()[0].1.t_p;
        assert!((shift(1) - 0.05).abs() < 0.01, "{}", shift(1));
        assert!((shift(2) - 0.27).abs() < 0.01, "{}", shift(2));
    }

    #[test]
    fn peak_is_stable_under_grid_refinement() {
        for (ratio, fine) in peaks() {
            let w = wave(*ratio);
            let coarse = find_peak(&w, &series(&w, DEFAULT_GRID.2 / 2)).unwrap();
            assert!((coarse.t_p - fine.t_p).abs() <= 2.0 * fine.refinement_width.max(coarse.refinement_width));
        }
    }

    #[test]
    fn density_slope_changes_sign_at_the_peak() {
        for (ratio, peak) in peaks() {
            let w = wave(*ratio);
            let slope = |t: f64| {
                let h = 1e-3 * baseline_tf();
                let at = |s: f64| w.psi(&EvaluationPoint::new(4.0, s).unwrap()).unwrap().norm_sqr();
                at(t + h) - at(t - h)
            };
            let offset = 0.01 * baseline_tf();
            assert!(slope(peak.t_p - offset) > 0.0 && slope(peak.t_p + offset) < 0.0);
            let ld = |t: f64| log_derivative(&w, &EvaluationPoint::new(4.0, t).unwrap()).unwrap().re;
            assert!(ld(peak.t_p - offset) > 0.0 && ld(peak.t_p + offset) < 0.0);
        }
    }

    #[test]
    fn no_interior_peak_is_reported() {
        let w = wave(0.0);
        let tf = baseline_tf();
        let times = time_grid(0.01, 0.2, 20, tf).unwrap();
        let s = density_series(&w, 4.0, &times, tf).unwrap();
        assert!(matches!(find_peak(&w, &s), Err(Error::NoInteriorPeak { index: 19, len: 20 })));
    }

    #[test]
    fn packet_tail_decays_below_one_percent() {
        let w = wave(0.75);
        let peak = peaks()[1].1;
        let late = w.psi(&EvaluationPoint::new(4.0, 10.0 * baseline_tf()).unwrap()).unwrap().norm_sqr();
        assert!(late < 0.01 * peak.peak_density, "{late:e} vs {:e}", peak.peak_density);
    }

    #[test]
    fn frequency_at_the_peak() {
        let omega_v0 = units::angular_frequency(0.3);
        for ((ratio, peak), expected) in peaks().iter().zip([0.792, 0.944, 1.583]) {
            let w = wave(*ratio);
            let at = EvaluationPoint::new(4.0, peak.t_p).unwrap();
            let omega = local_frequency(&w, &at).unwrap();
            let ratio_found = omega / omega_v0;
            assert!((ratio_found / expected - 1.0).abs() <= 0.02, "Δ/k0 = {ratio}: {ratio_found}");
            let sigma = bandwidth(&w, &at).unwrap();
            assert!(sigma <= 1e-3 * omega, "Δ/k0 = {ratio}: σ = {sigma:e}");
        }
    }

    #[test]
    fn analytic_frequency_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let waves = [wave(0.0), wave(0.75), wave(4.0)];
        let tf = baseline_tf();
        for i in 0..50 {
            let w = &waves[i % 3];
            let x = rng.gen_range(4.0..12.0);
            let t = rng.gen_range(0.1..3.0) * tf;
            let at = |s: f64| w.psi(&EvaluationPoint::new(x, s).unwrap()).unwrap();
            let h = 1e-4;
            let fd = (at(t + h) - at(t - h)) / (2.0 * h) / at(t);
            let ld = log_derivative(w, &EvaluationPoint::new(x, t).unwrap()).unwrap();
            assert!((fd - ld).norm() <= 1e-6 * ld.norm(), "x={x} t={t}: {fd} vs {ld}");
            // ω and σ reassemble the log-derivative.
            let omega = local_frequency(w, &EvaluationPoint::new(x, t).unwrap()).unwrap();
            let sigma = bandwidth(w, &EvaluationPoint::new(x, t).unwrap()).unwrap();
            let rebuilt = Complex64::new(sigma.copysign(ld.re), -omega);
            assert!((rebuilt - ld).norm() <= 1e-12 * ld.norm());
            assert!(sigma >= 0.0);
        }
    }

    #[test]
    fn transmission_split_values() {
        let p = baseline_barrier();
        let k0 = baseline_k0();
        for (ratio, under, over) in [(0.75, 0.00161, 0.00117), (4.0, 0.0111, 0.0426)] {
            let packet = PacketParams::new(k0, ratio * k0).unwrap();
            let s = transmission_split(&packet, &p).unwrap();
            assert!((s.p_under / under - 1.0).abs() <= 0.05, "Δ/k0 = {ratio}: {}", s.p_under);
            assert!((s.p_over / over - 1.0).abs() <= 0.05, "Δ/k0 = {ratio}: {}", s.p_over);
            assert!(s.p_under >= 0.0 && s.p_over >= 0.0 && s.p_under + s.p_over <= 1.0);
            assert!(s.tail_bound < 1e-9 * s.p_over);
        }
        assert!(transmission_split(&PacketParams::cutoff(k0).unwrap(), &p).is_err());
    }

    #[test]
    fn transmission_split_is_stable_when_extending_the_range() {
        let p = baseline_barrier();
        let k0 = baseline_k0();
        for ratio in [0.75, 4.0] {
            let packet = PacketParams::new(k0, ratio * k0).unwrap();
            let s = transmission_split(&packet, &p).unwrap();
            let integrand = |k: f64| {
                transmission_amplitude(Complex64::new(k, 0.0), &p).unwrap().norm_sqr()
                    * phi_k(k, &packet).unwrap().norm_sqr()
            };
            let opts = QuadOptions { abs_tol: 1e-16, rel_tol: 1e-11, ..Default::default() };
            let breaks: Vec<f64> = (0..=200).map(|i| s.k_max * (1.0 + i as f64 / 200.0)).collect();
            let (extra, _) = integrate_real(integrand, &breaks, opts).unwrap();
            assert!(extra / s.p_over < 1e-8, "Δ/k0 = {ratio}: {:e}", extra / s.p_over);
            assert!(extra <= s.tail_bound);
        }
    }

    #[test]
    fn mean_energies() {
        let k0 = baseline_k0();
        let e = |ratio: f64| mean_energy(&PacketParams::new(k0, ratio * k0).unwrap(), M_RATIO).unwrap();
        assert!((e(0.0) - 0.01).abs() < 1e-15);
        assert!((e(0.75) - 0.015625).abs() < 1e-14);
        assert!((e(0.75) - 0.016).abs() < 0.0005);
        assert!((e(4.0) - 0.17).abs() < 1e-14);
    }
}
