use num_complex::Complex64;
use qshutter::barrier::{mittag_leffler_t, residue_eigenfunction, residue_explicit, transmission_amplitude, PoleTable};
use qshutter::oracles::{crank_nicolson_density, m_quadrature, spectral_psi, GridConfig};
use qshutter::propagator::{delta_limit_check, m_function, psi_packet, EvaluationPoint, Mode, PacketParams};

use crate::config::Setup;
use crate::CliError;

/// Outcome of one check: the achieved figure against the required one.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub achieved: f64,
    pub required: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn bound(name: &'static str, achieved: f64, required: f64, detail: String) -> Self {
        Self { name, achieved, required, passed: achieved <= required, detail }
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "{verdict} {}: achieved {:.3e}, required <= {:.1e}{}",
            self.name, self.achieved, self.required, self.detail
        )
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn run(setup: &Setup, table: &PoleTable) -> Result<Vec<Check>, CliError> {
    let p = &setup.params;
    let k0 = setup.packet.k0();
    let x = setup.x_obs;
    let mut checks = Vec::new();

    if let Some(cert) = table.certificate() {
        let miss = (cert.winding_number - table.count_per_quadrant() as i64).abs() as f64;
        checks.push(Check::bound(
            "argument-principle pole count",
            miss,
            0.0,
            format!(" (winding number {}, table {})", cert.winding_number, table.count_per_quadrant()),
        ));
    }

    let mut worst = 0.0f64;
    for pole in table.positive().iter().take(20) {
        worst = worst.max(rel(residue_explicit(pole.k, p)?, residue_eigenfunction(pole.k, p)?));
    }
    checks.push(Check::bound("residue routes agree", worst, 1e-8, String::new()));

    let exact = transmission_amplitude(Complex64::new(k0, 0.0), p)?;
    let partial = mittag_leffler_t(k0, table)?;
    checks.push(Check::bound(
        "Mittag-Leffler sum at k0",
        (partial - exact).norm(),
        1e-4,
        format!(" (relative {:.3e}, {} pole pairs)", rel(partial, exact), table.count_per_quadrant()),
    ));

    let t_probe = 0.3 * setup.t_f;
    let mut worst = 0.0f64;
    for pole in table.positive().iter().take(20) {
        let quad = m_quadrature(x, pole.k, t_probe, p.m_ratio())?;
        worst = worst.max(rel(quad.value, m_function(x, pole.k, t_probe, p.m_ratio())?));
    }
    checks.push(Check::bound("M integral vs closed form", worst, 1e-8, String::new()));

    let point = EvaluationPoint::new(x, t_probe)?;
    let (rescaled, cutoff) = delta_limit_check(&point, p, k0, table, 1e-4 * k0)?;
    checks.push(Check::bound("delta -> 0 limit", rel(rescaled, cutoff), 1e-3, String::new()));

    if setup.packet.mode() == Mode::Packet {
        checks.push(spectral_check(setup, table)?);
        checks.push(grid_check(setup, table)?);
    }
    Ok(checks)
}

fn spectral_check(setup: &Setup, table: &PoleTable) -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    for ratio in [0.1, 0.3, 0.6, 1.0, 2.0] {
        let t = ratio * setup.t_f;
        let oracle = spectral_psi(setup.x_obs, t, &setup.packet, &setup.params)?;
        let analytic = psi_packet(&EvaluationPoint::new(setup.x_obs, t)?, &setup.params, &setup.packet, table)?;
        worst = worst.max(rel(analytic, oracle.value));
    }
    Ok(Check::bound("pole expansion vs spectral integral", worst, 1e-6, String::new()))
}

fn grid_check(setup: &Setup, table: &PoleTable) -> Result<Check, CliError> {
    let t_max = 2.0 * setup.t_f;
    let times: Vec<f64> = (0..=39).map(|i| (0.05 + 0.05 * i as f64) * setup.t_f).collect();
    let config = GridConfig::production(&setup.packet, &setup.params, t_max)?;
    let grid = crank_nicolson_density(setup.x_obs, &times, &setup.packet, &setup.params, &config)?;
    let packet: &PacketParams = &setup.packet;
    let analytic = times
        .iter()
        .map(|&t| Ok(psi_packet(&EvaluationPoint::new(setup.x_obs, t)?, &setup.params, packet, table)?.norm_sqr()))
        .collect::<Result<Vec<f64>, CliError>>()?;
    let peak = analytic.iter().copied().fold(0.0, f64::max);
    let worst = grid.density.iter().zip(&analytic).map(|(g, a)| (g - a).abs()).fold(0.0, f64::max);
    Ok(Check::bound(
        "grid solver vs pole expansion",
        worst / peak,
        0.03,
        format!(" (relative to peak, dx {} nm, dt {} fs)", config.dx, config.dt),
    ))
}
