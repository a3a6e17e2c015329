use std::path::{Path, PathBuf};

use qshutter::barrier::BarrierParams;
use qshutter::diagnostics::DEFAULT_GRID;
use qshutter::propagator::PacketParams;
use qshutter::units;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub barrier: BarrierSection,
    pub packet: PacketSection,
    #[serde(default)]
    pub poles: PolesSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierSection {
    #[serde(rename = "V0_eV")]
    pub v0_ev: f64,
    pub d_nm: f64,
    pub m_ratio: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSection {
    #[serde(rename = "E0_eV")]
    pub e0_ev: Option<f64>,
    pub k0_per_nm: Option<f64>,
    pub delta_over_k0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolesSection {
    pub count_per_quadrant: usize,
}

impl Default for PolesSection {
    fn default() -> Self {
        Self { count_per_quadrant: 1000 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub t_min_over_tf: f64,
    pub t_max_over_tf: f64,
    pub steps: usize,
    /// Defaults to the barrier exit d.
    pub x_obs_nm: Option<f64>,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self { t_min_over_tf: DEFAULT_GRID.0, t_max_over_tf: DEFAULT_GRID.1, steps: DEFAULT_GRID.2, x_obs_nm: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

/// A validated configuration with derived quantities.
#[derive(Debug, Clone)]
pub struct Setup {
    pub params: BarrierParams,
    pub packet: PacketParams,
    pub t_f: f64,
    pub count_per_quadrant: usize,
    pub times: Vec<f64>,
    pub x_obs: f64,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<Setup, CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let b = &self.barrier;
        if !(b.v0_ev.is_finite() && b.v0_ev > 0.0) {
            return bad(format!("barrier.V0_eV must be positive, got {}", b.v0_ev));
        }
        let params = BarrierParams::new(b.v0_ev, b.d_nm, b.m_ratio).map_err(|e| CliError::Config(e.to_string()))?;
        let k0 = match (self.packet.e0_ev, self.packet.k0_per_nm) {
            (Some(e), None) => {
                units::wavenumber_from_energy(e, b.m_ratio).map_err(|e| CliError::Config(e.to_string()))?
            }
            (None, Some(k)) => k,
            _ => return bad("packet needs exactly one of E0_eV and k0_per_nm".into()),
        };
        if !(k0.is_finite() && k0 > 0.0) {
            return bad(format!("incident wavenumber must be positive, got {k0}"));
        }
        let ratio = self.packet.delta_over_k0;
        if !(ratio.is_finite() && ratio >= 0.0) {
            return bad(format!("packet.delta_over_k0 must be non-negative, got {ratio}"));
        }
        let packet = if ratio == 0.0 { PacketParams::cutoff(k0) } else { PacketParams::new(k0, ratio * k0) }
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.poles.count_per_quadrant == 0 {
            return bad("poles.count_per_quadrant must be at least 1".into());
        }
        let s = &self.scan;
        if s.steps < 2 {
            return bad(format!("scan.steps must be at least 2, got {}", s.steps));
        }
        if !(s.t_min_over_tf.is_finite() && s.t_min_over_tf > 0.0) {
            return bad(format!("scan.t_min_over_tf must be positive, got {}", s.t_min_over_tf));
        }
        if !(s.t_max_over_tf.is_finite() && s.t_max_over_tf > s.t_min_over_tf) {
            return bad("scan.t_max_over_tf must exceed scan.t_min_over_tf".into());
        }
        let x_obs = s.x_obs_nm.unwrap_or(b.d_nm);
        if !(x_obs.is_finite() && x_obs >= b.d_nm) {
            return bad(format!("scan.x_obs_nm must lie in the transmitted region x >= {}, got {x_obs}", b.d_nm));
        }
        let t_f = units::free_passage_time(b.d_nm, k0, b.m_ratio).map_err(|e| CliError::Config(e.to_string()))?;
        let times = qshutter::diagnostics::time_grid(s.t_min_over_tf, s.t_max_over_tf, s.steps, t_f)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Setup {
            params,
            packet,
            t_f,
            count_per_quadrant: self.poles.count_per_quadrant,
            times,
            x_obs,
            output: self.output.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASELINE: &str = r#"{
        "barrier": {"V0_eV": 0.3, "d_nm": 4.0, "m_ratio": 0.067},
        "packet": {"E0_eV": 0.01, "delta_over_k0": 0.75},
        "poles": {"count_per_quadrant": 1000},
        "scan": {"t_min_over_tf": 0.01, "t_max_over_tf": 5.0, "steps": 2000, "x_obs_nm": 4.0},
        "output": {"format": "csv"}
    }"#;

    #[test]
    fn baseline_config_validates() {
        let setup = RunConfig::parse(BASELINE).unwrap().validate().unwrap();
        assert!((setup.packet.k0() - 0.1326).abs() < 1e-3);
        assert!((setup.t_f - 17.457).abs() < 1e-2);
        assert_eq!(setup.times.len(), 2000);
        assert_eq!(setup.output.format, Some(Format::Csv));
    }

    #[test]
    fn sections_default() {
        let text = r#"{"barrier": {"V0_eV": 0.3, "d_nm": 4.0, "m_ratio": 0.067},
                       "packet": {"k0_per_nm": 0.13, "delta_over_k0": 0.0}}"#;
        let setup = RunConfig::parse(text).unwrap().validate().unwrap();
        assert_eq!(setup.count_per_quadrant, 1000);
        assert_eq!(setup.x_obs, 4.0);
        assert_eq!(setup.times.len(), DEFAULT_GRID.2);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cases = [
            BASELINE.replace("\"m_ratio\": 0.067}", "\"m_ratio\": 0.067, \"extra\": 1}"),
            BASELINE.replace("\"E0_eV\": 0.01,", "\"E0_eV\": 0.01, \"k0_per_nm\": 0.13,"),
            BASELINE.replace("\"E0_eV\": 0.01,", ""),
            BASELINE.replace("\"V0_eV\": 0.3", "\"V0_eV\": 0.0"),
            BASELINE.replace("\"delta_over_k0\": 0.75", "\"delta_over_k0\": -0.1"),
            BASELINE.replace("\"steps\": 2000", "\"steps\": 1"),
            BASELINE.replace("\"t_min_over_tf\": 0.01", "\"t_min_over_tf\": 0.0"),
            BASELINE.replace("\"x_obs_nm\": 4.0", "\"x_obs_nm\": 2.0"),
            BASELINE.replace("\"count_per_quadrant\": 1000", "\"count_per_quadrant\": 0"),
            BASELINE.replace("\"csv\"", "\"xml\""),
        ];
        for text in cases {
            let result = RunConfig::parse(&text).and_then(|c| c.validate());
            assert!(matches!(result, Err(CliError::Config(_))), "{text}");
        }
    }
}
