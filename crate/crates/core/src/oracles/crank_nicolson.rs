use std::f64::consts::PI;

use num_complex::Complex64;

use crate::barrier::BarrierParams;
use crate::diagnostics::DensityTimeSeries;
use crate::error::{Error, Result};
use crate::propagator::{initial_packet, PacketParams};
use crate::units;

/// Box and step sizes for the grid solver, all in nm and fs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dt: f64,
    /// Largest acceptable probability carried by momenta fast enough to
    /// reach a box edge and return to the observation point.
    pub max_contamination: f64,
}

impl GridConfig {
    /// Production grid for the packet: dx = 0.02 nm, dt = 0.01 fs, the left
    /// edge where |Ψ(x, 0)| < 1e-12, and both edges far enough that the
    /// reflected weight stays below 1e-7.
    pub fn production(packet: &PacketParams, params: &BarrierParams, t_max: f64) -> Result<Self> {
        let a = packet.amplitude().ok_or_else(|| Error::domain("the grid solver needs a wave packet (delta > 0)"))?;
        let max_contamination = 1e-7;
        let x_tail = (1e-12 / (4.0 * PI * a)).ln() / packet.delta();
        let mut half_width = x_tail.abs().max(2.0 * params.d());
        let mut config = Self { x_min: -half_width, x_max: half_width, dx: 0.02, dt: 0.01, max_contamination };
        while contamination_estimate(&config, packet, params.d(), t_max, params.m_ratio()) > max_contamination {
            half_width *= 1.25;
            config.x_min = -half_width;
            config.x_max = half_width;
        }
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.dx, self.dt].iter().all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.dx <= 0.0 || self.dt <= 0.0 {
            return Err(Error::domain(format!("invalid grid configuration {self:?}")));
        }
        if (self.x_max - self.x_min) / self.dx < 4.0 {
            return Err(Error::domain("grid needs at least four intervals"));
        }
        Ok(())
    }
}

/// Upper bound on the probability in momenta |k| > k_c, where k_c is the
/// slowest wavenumber that can travel from the barrier to a box edge and
/// back to x = d within `t_max`. Uses ∫_{k_c}^∞ |φ|² dk ≤ 2πA²·4k0²/(3(k_c - k0)³).
pub fn contamination_estimate(config: &GridConfig, packet: &PacketParams, d: f64, t_max: f64, m_ratio: f64) -> f64 {
    let Some(a) = packet.amplitude() else { return f64::INFINITY };
    let speed = units::hbar_over_m(m_ratio);
    let k0 = packet.k0();
    let bound = |distance: f64| {
        let kc = distance / (speed * t_max);
        if kc <= 2.0 * k0 {
            return f64::INFINITY;
        }
        2.0 * PI * a * a * 4.0 * k0 * k0 / (3.0 * (kc - k0).powi(3))
    };
    bound(2.0 * config.x_max - d) + bound(2.0 * config.x_min.abs() + d)
}

/// Wave function on the nodes x_j = x_min + j dx with ψ = 0 beyond both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dx: f64,
    pub dt: f64,
    pub psi: Vec<Complex64>,
}

impl GridState {
    /// Nodes are aligned to integer multiples of dx so that x = 0 is a node.
    pub fn new(config: &GridConfig, initial: impl Fn(f64) -> Complex64) -> Result<Self> {
        config.validate()?;
        let first = (config.x_min / config.dx).ceil() as i64;
        let last = (config.x_max / config.dx).floor() as i64;
        let n_points = (last - first + 1) as usize;
        let x_min = first as f64 * config.dx;
        let psi = (0..n_points).map(|j| initial(x_min + j as f64 * config.dx)).collect();
        Ok(Self { x_min, x_max: last as f64 * config.dx, n_points, dx: config.dx, dt: config.dt, psi })
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    /// Trapezoidal ∫|ψ|² dx (the end values vanish by construction).
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|p| p.norm_sqr()).sum::<f64>() * self.dx
    }

    /// ψ at an arbitrary x inside the box, by linear interpolation.
    pub fn value_at(&self, x: f64) -> Result<Complex64> {
        let s = (x - self.x_min) / self.dx;
        if !(s >= 0.0 && s <= (self.n_points - 1) as f64) {
            return Err(Error::domain(format!("x = {x} lies outside the box")));
        }
        let j = (s.floor() as usize).min(self.n_points - 2);
        let f = s - j as f64;
        Ok(self.psi[j] * (1.0 - f) + self.psi[j + 1] * f)
    }
}

/// Unitary Crank-Nicolson propagation of iħ ∂ψ/∂t = [-(ħ²/2m) ∂² + V] ψ with
/// a three-point Laplacian and Dirichlet walls.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    state: GridState,
    time: f64,
    hm: f64,
    /// V(x_j)/ħ in fs⁻¹.
    potential: Vec<f64>,
    step: f64,
    /// Thomas factors of the implicit matrix for `step`.
    upper: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl CrankNicolson {
    /// `potential` is in eV.
    pub fn new(state: GridState, potential: impl Fn(f64) -> f64, m_ratio: f64) -> Self {
        let potential = (0..state.n_points).map(|j| potential(state.x(j)) / units::CONSTANTS.hbar).collect();
        let n = state.n_points;
        let mut solver = Self {
            hm: units::hbar_over_m(m_ratio),
            potential,
            step: f64::NAN,
            upper: vec![Complex64::new(0.0, 0.0); n],
            inv_pivot: vec![Complex64::new(0.0, 0.0); n],
            scratch: vec![Complex64::new(0.0, 0.0); n],
            time: 0.0,
            state,
        };
        solver.factor(solver.state.dt);
        solver
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    fn off_diagonal(&self, dt: f64) -> Complex64 {
        Complex64::new(0.0, -0.5 * dt * self.hm / (2.0 * self.state.dx * self.state.dx))
    }

    fn diagonal(&self, dt: f64, j: usize) -> Complex64 {
        Complex64::new(1.0, 0.5 * dt * (self.hm / (self.state.dx * self.state.dx) + self.potential[j]))
    }

    fn factor(&mut self, dt: f64) {
        let off = self.off_diagonal(dt);
        let mut previous_upper = Complex64::new(0.0, 0.0);
        for j in 0..self.state.n_points {
            let pivot = self.diagonal(dt, j) - off * previous_upper;
            self.inv_pivot[j] = 1.0 / pivot;
            self.upper[j] = off * self.inv_pivot[j];
            previous_upper = self.upper[j];
        }
        self.step = dt;
    }

    fn advance(&mut self) {
        let n = self.state.n_points;
        let dt = self.step;
        let off = self.off_diagonal(dt);
        let psi = &mut self.state.psi;
        // rhs = (1 - i dt H/2ħ) ψ, whose off-diagonal is -off.
        let zero = Complex64::new(0.0, 0.0);
        let mut forward = zero;
        for j in 0..n {
            let left = if j > 0 { psi[j - 1] } else { zero };
            let right = if j + 1 < n { psi[j + 1] } else { zero };
            let explicit_diag =
                Complex64::new(1.0, -0.5 * dt * (self.hm / (self.state.dx * self.state.dx) + self.potential[j]));
            let rhs = explicit_diag * psi[j] - off * (left + right);
            forward = flush((rhs - off * forward) * self.inv_pivot[j]);
            self.scratch[j] = forward;
        }
        let mut next = zero;
        for j in (0..n).rev() {
            next = flush(self.scratch[j] - self.upper[j] * next);
            psi[j] = next;
        }
        self.time += dt;
    }

    /// Steps to time `t` using equal steps no longer than the configured dt.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let span = t - self.time;
        if span < 0.0 {
            return Err(Error::domain(format!("cannot step backwards from {} to {t}", self.time)));
        }
        if span == 0.0 {
            return Ok(());
        }
        let steps = (span / self.state.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        if (dt - self.step).abs() > 1e-14 * dt {
            self.factor(dt);
        }
        for _ in 0..steps {
            self.advance();
        }
        self.time = t;
        Ok(())
    }
}

/// Values this small would decay into subnormals, whose arithmetic is two
/// orders of magnitude slower; they are set to zero instead.
#[inline]
fn flush(z: Complex64) -> Complex64 {
    const TINY: f64 = 1e-200;
    if z.re.abs() < TINY && z.im.abs() < TINY {
        Complex64::new(0.0, 0.0)
    } else {
        z
    }
}

/// |Ψ(x_obs, t)|² for the Lorentzian packet by direct time stepping on a grid.
/// The barrier occupies [0, d]; nodes at its edges carry V0/2.
pub fn crank_nicolson_density(
    x_obs: f64,
    t_grid: &[f64],
    packet: &PacketParams,
    params: &BarrierParams,
    config: &GridConfig,
) -> Result<DensityTimeSeries> {
    packet.amplitude().ok_or_else(|| Error::domain("the grid solver needs a wave packet (delta > 0)"))?;
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let estimate = contamination_estimate(config, packet, params.d(), t_max, params.m_ratio());
    if estimate > config.max_contamination {
        return Err(Error::BoxTooSmall { estimate, limit: config.max_contamination });
    }
    let state = GridState::new(config, |x| initial_packet(x, packet).unwrap_or_default())?;
    let (v0, d) = (params.v0(), params.d());
    let edge = 1e-9 * config.dx;
    let potential = move |x: f64| {
        if (x.abs() < edge) || ((x - d).abs() < edge) {
            0.5 * v0
        } else if x > 0.0 && x < d {
            v0
        } else {
            0.0
        }
    };
    let mut solver = CrankNicolson::new(state, potential, params.m_ratio());
    let mut psi = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        solver.advance_to(t)?;
        psi.push(solver.state().value_at(x_obs)?);
    }
    let t_f = units::free_passage_time(d, packet.k0(), params.m_ratio())?;
    DensityTimeSeries::new(x_obs, crate::propagator::Mode::Packet, t_f, t_grid.to_vec(), psi)
}
