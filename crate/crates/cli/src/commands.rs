use std::path::Path;

use log::warn;
use num_complex::Complex64;
use qshutter::barrier::{find_poles, transmission_amplitude, PoleTable};
use qshutter::diagnostics::{
    bandwidth, density_series, find_peak, local_frequency, mean_energy, transmission_split, DensityTimeSeries,
};
use qshutter::propagator::{EvaluationPoint, Mode, TransmittedWave};
use qshutter::units;
use serde::Serialize;

use crate::config::{Format, Setup};
use crate::CliError;

/// Loads the table from `cache` when its header matches the configuration,
/// otherwise computes it and, if a cache path is given, stores it there.
pub fn pole_table(setup: &Setup, cache: Option<&Path>) -> Result<PoleTable, CliError> {
    if let Some(path) = cache {
        if let Ok(text) = std::fs::read_to_string(path) {
            match PoleTable::from_json(&text) {
                Ok(table) if table.matches(&setup.params, setup.count_per_quadrant) => {
                    eprintln!("cache hit: {}", path.display());
                    return Ok(table);
                }
                Ok(_) => warn!("pole cache {} does not match the configuration; recomputing", path.display()),
                Err(e) => warn!("pole cache {} is unreadable ({e}); recomputing", path.display()),
            }
        }
    }
    let table = find_poles(&setup.params, setup.count_per_quadrant)?;
    if let Some(path) = cache {
        std::fs::write(path, table.to_json()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(table)
}

pub fn poles(setup: &Setup, cache: Option<&Path>, format: Format) -> Result<String, CliError> {
    if format != Format::Json {
        return Err(CliError::Config("the pole table is written as JSON only".into()));
    }
    Ok(pole_table(setup, cache)?.to_json())
}

/// Evaluates the density over the scan grid. On failure the first offending
/// time is located and reported.
pub fn series(setup: &Setup, wave: &TransmittedWave) -> Result<DensityTimeSeries, CliError> {
    density_series(wave, setup.x_obs, &setup.times, setup.t_f).map_err(|e| {
        let offending =
            setup.times.iter().find(|&&t| EvaluationPoint::new(setup.x_obs, t).and_then(|p| wave.psi(&p)).is_err());
        match offending {
            Some(t) => CliError::Numeric(format!("at t = {t} fs: {e}")),
            None => CliError::from(e),
        }
    })
}

#[derive(Serialize)]
struct Row {
    t_fs: f64,
    t_over_tf: f64,
    psi_re: f64,
    psi_im: f64,
    density: f64,
}

pub fn density(setup: &Setup, cache: Option<&Path>, format: Format) -> Result<String, CliError> {
    let table = pole_table(setup, cache)?;
    let wave = TransmittedWave::new(&setup.params, &setup.packet, &table)?;
    let s = series(setup, &wave)?;
    let rows = (0..s.len()).map(|i| Row {
        t_fs: s.times[i],
        t_over_tf: s.times[i] / s.t_f,
        psi_re: s.psi[i].re,
        psi_im: s.psi[i].im,
        density: s.density[i],
    });
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("t_fs,t_over_tf,psi_re,psi_im,density\n");
            for r in rows {
                out.push_str(&format!(
                    "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
                    r.t_fs, r.t_over_tf, r.psi_re, r.psi_im, r.density
                ));
            }
            out
        }
        Format::Json => serde_json::to_string_pretty(&rows.collect::<Vec<_>>()).expect("rows serialize") + "\n",
    })
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub mode: Mode,
    pub x_obs_nm: f64,
    pub t_f_fs: f64,
    pub t_p_fs: f64,
    pub t_p_over_tf: f64,
    pub peak_density: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_under: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_over: Option<f64>,
    pub omega_av_at_tp: f64,
    pub omega_v0: f64,
    pub omega_ratio: f64,
    pub sigma_at_tp: f64,
    #[serde(rename = "mean_energy_eV")]
    pub mean_energy_ev: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptotic_density: Option<f64>,
    pub regime: &'static str,
}

pub fn report(setup: &Setup, table: &PoleTable) -> Result<Report, CliError> {
    let wave = TransmittedWave::new(&setup.params, &setup.packet, table)?;
    let s = series(setup, &wave)?;
    let peak = find_peak(&wave, &s)?;
    let at_peak = EvaluationPoint::new(setup.x_obs, peak.t_p)?;
    let omega = local_frequency(&wave, &at_peak)?;
    let omega_v0 = units::angular_frequency(setup.params.v0());
    let (p_under, p_over) = match setup.packet.mode() {
        Mode::Packet => {
            let split = transmission_split(&setup.packet, &setup.params)?;
            (Some(split.p_under), Some(split.p_over))
        }
        Mode::Cutoff => (None, None),
    };
    let asymptotic_density = match setup.packet.mode() {
        Mode::Cutoff => Some(transmission_amplitude(Complex64::new(setup.packet.k0(), 0.0), &setup.params)?.norm_sqr()),
        Mode::Packet => None,
    };
    let ratio = omega / omega_v0;
    Ok(Report {
        mode: setup.packet.mode(),
        x_obs_nm: setup.x_obs,
        t_f_fs: setup.t_f,
        t_p_fs: peak.t_p,
        t_p_over_tf: peak.t_p_over_tf,
        peak_density: peak.peak_density,
        p_under,
        p_over,
        omega_av_at_tp: omega,
        omega_v0,
        omega_ratio: ratio,
        sigma_at_tp: bandwidth(&wave, &at_peak)?,
        mean_energy_ev: mean_energy(&setup.packet, setup.params.m_ratio())?,
        asymptotic_density,
        regime: if ratio > 1.0 { "non-tunneling regime" } else { "tunneling" },
    })
}

pub fn diagnose(setup: &Setup, cache: Option<&Path>, format: Format) -> Result<String, CliError> {
    if format != Format::Json {
        return Err(CliError::Config("the diagnostics report is written as JSON only".into()));
    }
    let table = pole_table(setup, cache)?;
    let r = report(setup, &table)?;
    Ok(serde_json::to_string_pretty(&r).expect("report serializes") + "\n")
}
