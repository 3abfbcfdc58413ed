//! Periodic pseudo-spectral solver for the full viscous QHD system.
//!
//! Perturbations `(ρ, m)` of a constant state are advanced with a second-order
//! exponential integrator: each Fourier mode follows the exact linear flow and
//! the remainder `∂_x(0, N₂)` enters explicitly with an ETD2RK correction.

use num_complex::Complex64;

use crate::error::{domain, QhdError, Result};
use crate::matfun::{assemble, pair_coefficients, phi, phi_derivative, CMatrix2, CVector2};
use crate::model::{pressure, pressure_excess_ratio, EquilibriumState, Regime};
use crate::spectral::Grid1D;
use crate::symbol::{dispersion_roots, generator};

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Grid1D,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub t: f64,
}

/// `amplitude·exp(−(x−center)²/(2·width²))`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
}

impl GaussianPulse {
    pub fn value(&self, x: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * (-0.5 * ((x - self.center) / self.width).powi(2)).exp()
    }
}

impl FieldState {
    pub fn new(grid: Grid1D, rho: Vec<f64>, m: Vec<f64>, t: f64) -> Result<Self> {
        if rho.len() != grid.len() || m.len() != grid.len() {
            return domain("field arrays must match the grid size");
        }
        if rho.iter().chain(&m).any(|v| !v.is_finite()) {
            return domain("field arrays must be finite");
        }
        Ok(Self { grid, rho, m, t })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        let n = grid.len();
        Self {
            grid,
            rho: vec![0.0; n],
            m: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn gaussian(grid: Grid1D, rho: GaussianPulse, m: GaussianPulse) -> Result<Self> {
        for p in [rho, m] {
            if p.amplitude != 0.0 && !(p.width > 0.0) {
                return domain("pulse width must be positive");
            }
        }
        let xs = grid.points();
        let r = xs.iter().map(|&x| rho.value(x)).collect();
        let mm = xs.iter().map(|&x| m.value(x)).collect();
        Self::new(grid, r, mm, 0.0)
    }

    pub fn mass(&self) -> f64 {
        self.grid.integral(&self.rho)
    }

    pub fn momentum(&self) -> f64 {
        self.grid.integral(&self.m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    /// Defaults to `1e-6·ρ*` when unset.
    pub rho_floor: Option<f64>,
    pub s: u32,
    pub output_stride: usize,
    pub allow_supersonic: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            dealias: true,
            rho_floor: None,
            s: 3,
            output_stride: 1,
            allow_supersonic: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return domain(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if self.s < 3 {
            return domain(format!("Sobolev index must be at least 3, got {}", self.s));
        }
        if self.output_stride == 0 {
            return domain("output_stride must be at least 1");
        }
        if let Some(f) = self.rho_floor {
            if !(f > 0.0) {
                return domain("rho_floor must be positive");
            }
        }
        Ok(())
    }

    pub fn floor(&self, eq: &EquilibriumState) -> f64 {
        self.rho_floor.unwrap_or(1e-6 * eq.rho_star)
    }
}

fn check_fields(eq: &EquilibriumState, rho: &[f64], m: &[f64], grid: &Grid1D, floor: f64, t: f64) -> Result<()> {
    for (j, (&r, &mm)) in rho.iter().zip(m).enumerate() {
        if !r.is_finite() {
            return Err(QhdError::NonFinite { t, field: "rho".into() });
        }
        if !mm.is_finite() {
            return Err(QhdError::NonFinite { t, field: "m".into() });
        }
        let total = eq.rho_star + r;
        if total < floor {
            return Err(QhdError::Positivity {
                t,
                x: grid.x(j),
                density: total,
                floor,
            });
        }
    }
    Ok(())
}

fn masked(grid: &Grid1D, field: &[f64]) -> Vec<f64> {
    let mut spec = grid.forward(field);
    apply_mask(grid, &mut spec);
    grid.inverse(&spec)
}

fn apply_mask(grid: &Grid1D, spec: &mut [Complex64]) {
    for (c, keep) in spec.iter_mut().zip(grid.dealias_mask()) {
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Time derivatives of the perturbation from the full conservative system.
pub fn rhs_conservative(eq: &EquilibriumState, state: &FieldState, dealias: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = &state.grid;
    check_fields(eq, &state.rho, &state.m, grid, f64::MIN_POSITIVE, state.t)?;
    let (rho, m) = if dealias {
        (masked(grid, &state.rho), masked(grid, &state.m))
    } else {
        (state.rho.clone(), state.m.clone())
    };
    let (rs, ms) = (eq.rho_star, eq.m_star);
    let k2 = eq.k() * eq.k();

    let drho = grid.spectral_derivative(&m, 1).iter().map(|v| -v).collect();

    let mut flux = Vec::with_capacity(rho.len());
    let mut log_ratio = Vec::with_capacity(rho.len());
    for (&r, &mm) in rho.iter().zip(&m) {
        let total = rs + r;
        flux.push((ms + mm).powi(2) / total + pressure(&eq.params, total)?);
        log_ratio.push((r / rs).ln_1p());
    }
    let log_xx = grid.spectral_derivative(&log_ratio, 2);
    let bohm: Vec<f64> = rho.iter().zip(&log_xx).map(|(r, l)| (rs + r) * l).collect();
    let flux_x = grid.spectral_derivative(&flux, 1);
    let m_xx = grid.spectral_derivative(&m, 2);
    let bohm_x = grid.spectral_derivative(&bohm, 1);
    let dm = (0..rho.len())
        .map(|j| -flux_x[j] + eq.mu() * m_xx[j] + 0.5 * k2 * bohm_x[j])
        .collect();
    Ok((drho, dm))
}

/// Linearised right-hand side, applied mode by mode.
pub fn linear_rhs(eq: &EquilibriumState, state: &FieldState) -> (Vec<f64>, Vec<f64>) {
    let grid = &state.grid;
    let (rh, mh) = (grid.forward(&state.rho), grid.forward(&state.m));
    let mut out_r = vec![Complex64::new(0.0, 0.0); grid.modes()];
    let mut out_m = out_r.clone();
    for k in 0..grid.modes() {
        let v = generator(eq, grid.wavenumber(k)) * CVector2::new(rh[k], mh[k]);
        out_r[k] = v[0];
        out_m[k] = v[1];
    }
    if grid.len() / 2 < grid.modes() {
        let nyq = grid.len() / 2;
        out_r[nyq] = Complex64::new(0.0, 0.0);
        out_m[nyq] = Complex64::new(0.0, 0.0);
    }
    (grid.inverse(&out_r), grid.inverse(&out_m))
}

/// `N₂ = −(m − u*ρ)²/(ρ*+ρ) − [p(ρ*+ρ) − p(ρ*) − p'(ρ*)ρ] − ½k²ρ_x²/(ρ*+ρ)`.
pub fn nonlinear_remainder_n2(eq: &EquilibriumState, state: &FieldState) -> Result<Vec<f64>> {
    check_fields(eq, &state.rho, &state.m, &state.grid, f64::MIN_POSITIVE, state.t)?;
    let rho_x = state.grid.spectral_derivative(&state.rho, 1);
    Ok(n2_pointwise(eq, &state.rho, &state.m, &rho_x))
}

fn n2_pointwise(eq: &EquilibriumState, rho: &[f64], m: &[f64], rho_x: &[f64]) -> Vec<f64> {
    let (rs, u, gamma) = (eq.rho_star, eq.velocity(), eq.gamma());
    let half_k2 = 0.5 * eq.k() * eq.k();
    let p_scale = rs.powf(gamma);
    rho.iter()
        .zip(m)
        .zip(rho_x)
        .map(|((&r, &mm), &rx)| {
            let total = rs + r;
            let w = mm - u * r;
            -(w * w) / total - p_scale * pressure_excess_ratio(gamma, r / rs) - half_k2 * rx * rx / total
        })
        .collect()
}

/// Per-mode ETD2RK matrices.
#[derive(Debug, Clone, Copy)]
struct ModeCoefficients {
    e: CMatrix2,
    p1: CMatrix2,
    p2: CMatrix2,
}

/// Half-spectrum state `(ρ̂_k, m̂_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub rho: Vec<Complex64>,
    pub m: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct Stepper {
    eq: EquilibriumState,
    grid: Grid1D,
    dt: f64,
    dealias: bool,
    floor: f64,
    coefficients: Vec<ModeCoefficients>,
}

impl Stepper {
    pub fn new(eq: &EquilibriumState, grid: &Grid1D, dt: f64, dealias: bool, floor: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain("dt must be positive");
        }
        let nyq = grid.len() / 2;
        let coefficients = (0..grid.modes())
            .map(|k| {
                if k == nyq {
                    let z = CMatrix2::zeros();
                    return ModeCoefficients { e: z, p1: z, p2: z };
                }
                let xi = grid.wavenumber(k);
                let roots = dispersion_roots(eq, xi);
                let (zp, zm) = (roots.plus * dt, roots.minus * dt);
                let a = generator(eq, xi) * Complex64::new(dt, 0.0);
                let h = Complex64::new(dt, 0.0);
                let func = |j: usize| {
                    let (f0, f1) = pair_coefficients(zp, zm, |z| phi(j, z), |z| phi_derivative(j, z));
                    assemble(&a, zp, zm, f0, f1)
                };
                ModeCoefficients {
                    e: func(0),
                    p1: func(1) * h,
                    p2: func(2) * h,
                }
            })
            .collect();
        Ok(Self {
            eq: *eq,
            grid: grid.clone(),
            dt,
            dealias,
            floor,
            coefficients,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn to_spectral(&self, state: &FieldState) -> SpectralState {
        let nyq = self.grid.len() / 2;
        let mut rho = self.grid.forward(&state.rho);
        let mut m = self.grid.forward(&state.m);
        rho[nyq] = Complex64::new(0.0, 0.0);
        m[nyq] = Complex64::new(0.0, 0.0);
        SpectralState { rho, m }
    }

    pub fn to_physical(&self, spec: &SpectralState) -> (Vec<f64>, Vec<f64>) {
        (self.grid.inverse(&spec.rho), self.grid.inverse(&spec.m))
    }

    /// Spectrum of `∂_x N₂`, the explicit forcing of the momentum equation.
    fn forcing(&self, spec: &SpectralState, t: f64) -> Result<Vec<Complex64>> {
        let grid = &self.grid;
        let (mut rho_s, mut m_s) = (spec.rho.clone(), spec.m.clone());
        if self.dealias {
            apply_mask(grid, &mut rho_s);
            apply_mask(grid, &mut m_s);
        }
        let rho = grid.inverse(&rho_s);
        let m = grid.inverse(&m_s);
        check_fields(&self.eq, &rho, &m, grid, self.floor, t)?;
        let mut rx = rho_s;
        grid.differentiate_spectrum(&mut rx, 1);
        let rho_x = grid.inverse(&rx);
        let mut n2 = grid.forward(&n2_pointwise(&self.eq, &rho, &m, &rho_x));
        grid.differentiate_spectrum(&mut n2, 1);
        if self.dealias {
            apply_mask(grid, &mut n2);
        }
        Ok(n2)
    }

    /// One ETD2RK step of length `dt` from time `t`.
    pub fn advance(&self, spec: &SpectralState, t: f64) -> Result<SpectralState> {
        let n0 = self.forcing(spec, t)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut a = spec.clone();
        for (k, c) in self.coefficients.iter().enumerate() {
            let v = c.e * CVector2::new(spec.rho[k], spec.m[k]) + c.p1 * CVector2::new(zero, n0[k]);
            a.rho[k] = v[0];
            a.m[k] = v[1];
        }
        let n1 = self.forcing(&a, t + self.dt)?;
        let mut out = a.clone();
        for (k, c) in self.coefficients.iter().enumerate() {
            let v = c.p2 * CVector2::new(zero, n1[k] - n0[k]);
            out.rho[k] += v[0];
            out.m[k] += v[1];
        }
        Ok(out)
    }
}

/// Single step of the exponential integrator on a physical-space state.
pub fn step(eq: &EquilibriumState, state: &FieldState, config: &SolverConfig) -> Result<FieldState> {
    config.validate()?;
    let stepper = Stepper::new(eq, &state.grid, config.dt, config.dealias, config.floor(eq))?;
    let spec = stepper.advance(&stepper.to_spectral(state), state.t)?;
    let (rho, m) = stepper.to_physical(&spec);
    let t = state.t + config.dt;
    check_fields(eq, &rho, &m, &state.grid, config.floor(eq), t)?;
    Ok(FieldState {
        grid: state.grid.clone(),
        rho,
        m,
        t,
    })
}

/// Largest step allowed for the explicit part: `0.5·h/max(|u|+√p'(ρ))`,
/// capped by `0.1/μ`.
pub fn max_stable_dt(eq: &EquilibriumState, state: &FieldState) -> Result<f64> {
    let mut speed = 0.0f64;
    for (&r, &m) in state.rho.iter().zip(&state.m) {
        let total = eq.rho_star + r;
        let c = crate::model::pressure_derivative(&eq.params, total)?.sqrt();
        speed = speed.max(((eq.m_star + m) / total).abs() + c);
    }
    Ok((0.5 * state.grid.spacing() / speed).min(0.1 / eq.mu()))
}

/// Exact linear evolution of every grid mode to time `t`.
pub fn linear_reference(eq: &EquilibriumState, initial: &FieldState, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = &initial.grid;
    let nyq = grid.len() / 2;
    let (mut rh, mut mh) = (grid.forward(&initial.rho), grid.forward(&initial.m));
    for k in 0..grid.modes() {
        if k == nyq {
            rh[k] = Complex64::new(0.0, 0.0);
            mh[k] = Complex64::new(0.0, 0.0);
            continue;
        }
        let p = crate::linear::mode_propagator(eq, grid.wavenumber(k), t)?;
        let v = p.apply(&CVector2::new(rh[k], mh[k]));
        rh[k] = v[0];
        mh[k] = v[1];
    }
    Ok((grid.inverse(&rh), grid.inverse(&mh)))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyHistory {
    pub times: Vec<f64>,
    /// `‖ρ‖_{s+1}`
    pub sobolev_rho: Vec<f64>,
    /// `‖m‖_s`
    pub sobolev_m: Vec<f64>,
    pub e_s: Vec<f64>,
    pub f_s: Vec<f64>,
    pub q_s: Vec<f64>,
    pub g_s: Vec<f64>,
    /// `‖ρ‖_s + ‖m‖_{s−1}`
    pub decay_norm: Vec<f64>,
    pub mass_defect: Vec<f64>,
    pub momentum_defect: Vec<f64>,
}

impl EnergyHistory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_abs_defect(&self) -> (f64, f64) {
        let m = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        (m(&self.mass_defect), m(&self.momentum_defect))
    }

    /// `G_s` at the last recorded time not exceeding `t`.
    pub fn g_at(&self, t: f64) -> Option<f64> {
        self.times.iter().rposition(|&x| x <= t + 1e-12).map(|i| self.g_s[i])
    }
}

struct Recorder {
    s: f64,
    mass0: f64,
    momentum0: f64,
    last_dissipation: f64,
    history: EnergyHistory,
}

impl Recorder {
    fn new(state: &FieldState, s: u32) -> Self {
        Self {
            s: s as f64,
            mass0: state.mass(),
            momentum0: state.momentum(),
            last_dissipation: 0.0,
            history: EnergyHistory::default(),
        }
    }

    fn record(&mut self, grid: &Grid1D, spec: &SpectralState, rho: &[f64], m: &[f64], t: f64) {
        let s = self.s;
        let rho_sp1 = grid.sobolev_norm_sq_spectrum(&spec.rho, s + 1.0, 0);
        let m_s = grid.sobolev_norm_sq_spectrum(&spec.m, s, 0);
        let dissipation =
            grid.sobolev_norm_sq_spectrum(&spec.rho, s + 1.0, 1) + grid.sobolev_norm_sq_spectrum(&spec.m, s, 1);
        let decay = grid.sobolev_norm_sq_spectrum(&spec.rho, s, 0).sqrt()
            + grid.sobolev_norm_sq_spectrum(&spec.m, s - 1.0, 0).sqrt();

        let h = &mut self.history;
        let energy = rho_sp1 + m_s;
        let e_s = h.e_s.last().map_or(energy, |&e| e.max(energy));
        let f_s = match (h.times.last(), h.f_s.last()) {
            (Some(&t0), Some(&f0)) => f0 + 0.5 * (self.last_dissipation + dissipation) * (t - t0),
            _ => 0.0,
        };
        let weighted = (1.0 + t).powf(0.25) * decay;
        let g_s = h.g_s.last().map_or(weighted, |&g| g.max(weighted));
        self.last_dissipation = dissipation;

        h.times.push(t);
        h.sobolev_rho.push(rho_sp1.sqrt());
        h.sobolev_m.push(m_s.sqrt());
        h.e_s.push(e_s);
        h.f_s.push(f_s);
        h.q_s.push(e_s + f_s);
        h.g_s.push(g_s);
        h.decay_norm.push(decay);
        h.mass_defect.push(grid.integral(rho) - self.mass0);
        h.momentum_defect.push(grid.integral(m) - self.momentum0);
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub history: EnergyHistory,
    pub final_state: FieldState,
    /// Cause of an early stop; the history is partial when set.
    pub abort: Option<QhdError>,
    pub steps: usize,
    pub dt: f64,
}

impl SimulationOutcome {
    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }
}

pub fn run_simulation(eq: &EquilibriumState, initial: &FieldState, config: &SolverConfig) -> Result<SimulationOutcome> {
    config.validate()?;
    match eq.regime {
        Regime::Subsonic => {}
        Regime::Supersonic if config.allow_supersonic => {}
        regime => {
            return Err(QhdError::UnsupportedRegime {
                regime,
                reason: "nonlinear runs need a subsonic state (supersonic runs require the explicit override)".into(),
            })
        }
    }
    let floor = config.floor(eq);
    check_fields(eq, &initial.rho, &initial.m, &initial.grid, floor, initial.t)?;

    let steps = if config.t_end == 0.0 {
        0
    } else {
        (config.t_end / config.dt - 1e-9).ceil().max(1.0) as usize
    };
    let dt = if steps == 0 {
        config.dt
    } else {
        config.t_end / steps as f64
    };
    let stepper = Stepper::new(eq, &initial.grid, dt, config.dealias, floor)?;
    let grid = &initial.grid;

    let mut recorder = Recorder::new(initial, config.s);
    let mut spec = stepper.to_spectral(initial);
    let (mut rho, mut m) = stepper.to_physical(&spec);
    recorder.record(grid, &spec, &rho, &m, initial.t);

    let mut t = initial.t;
    let mut abort = None;
    let mut taken = 0;
    for n in 1..=steps {
        let t_next = initial.t + n as f64 * dt;
        match stepper.advance(&spec, t) {
            Ok(next) => spec = next,
            Err(e) => {
                abort = Some(e);
                break;
            }
        }
        t = t_next;
        taken = n;
        if n % config.output_stride == 0 || n == steps {
            (rho, m) = stepper.to_physical(&spec);
            if let Err(e) = check_fields(eq, &rho, &m, grid, floor, t) {
                abort = Some(e);
                break;
            }
            recorder.record(grid, &spec, &rho, &m, t);
        }
    }
    if abort.is_some() {
        (rho, m) = stepper.to_physical(&spec);
    }
    Ok(SimulationOutcome {
        history: recorder.history,
        final_state: FieldState {
            grid: grid.clone(),
            rho,
            m,
            t,
        },
        abort,
        steps: taken,
        dt,
    })
}

/// `(‖ρ₀‖_s + ‖m₀‖_{s−1}) + ‖ρ₀‖_{L¹} + ‖m₀‖_{L¹}`.
pub fn initial_norm_sum(initial: &FieldState, s: u32) -> f64 {
    let g = &initial.grid;
    let s = s as f64;
    let l1 = |f: &[f64]| f.iter().map(|v| v.abs()).sum::<f64>() * g.spacing();
    g.sobolev_norm(&initial.rho, s) + g.sobolev_norm(&initial.m, s - 1.0) + l1(&initial.rho) + l1(&initial.m)
}

/// Smallest `C₁` with `‖ρ‖_s + ‖m‖_{s−1} ≤ C₁(1+t)^{−1/4}·initial_norm_sum`
/// along the recorded history.
pub fn envelope_constant(history: &EnergyHistory, initial: &FieldState, s: u32) -> f64 {
    let denom = initial_norm_sum(initial, s);
    if denom == 0.0 {
        return 0.0;
    }
    history
        .times
        .iter()
        .zip(&history.decay_norm)
        .map(|(t, d)| d * (1.0 + t).powf(0.25) / denom)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn standard() -> EquilibriumState {
        EquilibriumState::new(ModelParams::new(2.0, 1.0, 1.0).unwrap(), 1.0, 1.0).unwrap()
    }

    fn pulse(grid: &Grid1D, a_rho: f64, a_m: f64, width: f64) -> FieldState {
        let c = grid.length() / 2.0;
        FieldState::gaussian(
            grid.clone(),
            GaussianPulse {
                amplitude: a_rho,
                width,
                center: c,
            },
            GaussianPulse {
                amplitude: a_m,
                width,
                center: c,
            },
        )
        .unwrap()
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }

    #[test]
    fn zero_perturbation_is_an_equilibrium() {
        let eq = standard();
        let g = Grid1D::new(20.0, 64).unwrap();
        let z = FieldState::zeros(g);
        let (a, b) = rhs_conservative(&eq, &z, true).unwrap();
        assert!(a.iter().chain(&b).all(|v| *v == 0.0));
        assert!(nonlinear_remainder_n2(&eq, &z).unwrap().iter().all(|v| *v == 0.0));
        let next = step(&eq, &z, &SolverConfig::new(0.01, 0.01)).unwrap();
        assert!(next.rho.iter().chain(&next.m).all(|v| *v == 0.0));
    }

    #[test]
    fn rhs_integrates_to_zero() {
        let eq = standard();
        let g = Grid1D::new(40.0, 256).unwrap();
        let s = pulse(&g, 0.2, -0.1, 2.0);
        let (a, b) = rhs_conservative(&eq, &s, false).unwrap();
        assert!(g.integral(&a).abs() < 1e-12);
        assert!(g.integral(&b).abs() < 1e-12);
    }

    #[test]
    fn remainder_identity() {
        let eq = standard();
        let g = Grid1D::new(40.0, 256).unwrap();
        let s = pulse(&g, 0.1, 0.05, 2.0);
        let (fr, fm) = rhs_conservative(&eq, &s, false).unwrap();
        let (lr, lm) = linear_rhs(&eq, &s);
        let n2x = g.spectral_derivative(&nonlinear_remainder_n2(&eq, &s).unwrap(), 1);
        let scale = max_abs(&fm).max(max_abs(&fr));
        for j in 0..g.len() {
            assert!((fr[j] - lr[j]).abs() <= 1e-10 * scale);
            assert!((fm[j] - lm[j] - n2x[j]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn remainder_for_pure_density_bump() {
        let eq = EquilibriumState::new(ModelParams::new(2.0, 1.0, 1.0).unwrap(), 1.0, 0.0).unwrap();
        let g = Grid1D::new(40.0, 256).unwrap();
        let s = pulse(&g, 0.3, 0.0, 2.0);
        let n2 = nonlinear_remainder_n2(&eq, &s).unwrap();
        let rx = g.spectral_derivative(&s.rho, 1);
        for j in 0..g.len() {
            let r = s.rho[j];
            // γ = 2: p(1+r) − p(1) − 2r = r²
            let expected = -r * r - 0.5 * rx[j] * rx[j] / (1.0 + r);
            assert!((n2[j] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn remainder_scales_quadratically() {
        let eq = standard();
        let g = Grid1D::new(40.0, 256).unwrap();
        let norm = |eps: f64| {
            let s = pulse(&g, eps, 0.5 * eps, 2.0);
            g.sobolev_norm(&nonlinear_remainder_n2(&eq, &s).unwrap(), 0.0) / (eps * eps)
        };
        let (a, b) = (norm(1e-2), norm(1e-3));
        assert!((a / b - 1.0).abs() < 0.05);
    }

    #[test]
    fn linearization_error_is_second_order() {
        let eq = standard();
        let g = Grid1D::new(40.0, 256).unwrap();
        let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| {
                let s = pulse(&g, eps, -eps, 2.0);
                let (_, fm) = rhs_conservative(&eq, &s, false).unwrap();
                let (_, lm) = linear_rhs(&eq, &s);
                let diff: Vec<f64> = fm.iter().zip(&lm).map(|(a, b)| a - b).collect();
                max_abs(&diff) / (eps * eps)
            })
            .collect();
        assert!((ratios[1] / ratios[0] - 1.0).abs() < 0.05);
        assert!((ratios[2] / ratios[1] - 1.0).abs() < 0.05);
    }

    #[test]
    fn positivity_abort() {
        let eq = standard();
        let g = Grid1D::new(20.0, 64).unwrap();
        let s = pulse(&g, -1.5, 0.0, 2.0);
        assert!(matches!(
            nonlinear_remainder_n2(&eq, &s),
            Err(QhdError::Positivity { .. })
        ));
        let out = run_simulation(&eq, &s, &SolverConfig::new(0.01, 1.0));
        assert!(matches!(out, Err(QhdError::Positivity { .. })));
    }

    #[test]
    fn small_step_follows_linear_flow() {
        // deviation from the linear flow after one step is O(ε²·dt)
        let eq = standard();
        let g = Grid1D::new(100.0, 512).unwrap();
        let eps = 1e-6;
        let s = pulse(&g, eps, 0.0, 5.0);
        let dt = 0.05;
        let next = step(&eq, &s, &SolverConfig::new(dt, dt)).unwrap();
        let (lr, lm) = linear_reference(&eq, &s, dt).unwrap();
        let dev = max_abs(&next.rho.iter().zip(&lr).map(|(a, b)| a - b).collect::<Vec<_>>())
            .max(max_abs(&next.m.iter().zip(&lm).map(|(a, b)| a - b).collect::<Vec<_>>()));
        assert!(dev / (eps * eps * dt) < 10.0, "{}", dev / (eps * eps * dt));
    }

    #[test]
    fn temporal_order_two() {
        let eq = standard();
        let g = Grid1D::new(40.0, 128).unwrap();
        let init = pulse(&g, 0.2, 0.1, 3.0);
        let run = |dt: f64| {
            let mut cfg = SolverConfig::new(dt, 1.0);
            cfg.output_stride = 1000;
            run_simulation(&eq, &init, &cfg).unwrap().final_state
        };
        let (a, b, c) = (run(0.04), run(0.02), run(0.01));
        let diff = |x: &FieldState, y: &FieldState| {
            let v: Vec<f64> = x
                .rho
                .iter()
                .zip(&y.rho)
                .chain(x.m.iter().zip(&y.m))
                .map(|(p, q)| p - q)
                .collect();
            max_abs(&v)
        };
        let ratio = diff(&a, &b) / diff(&b, &c);
        assert!((3.2..4.8).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn run_conserves_and_records() {
        let eq = standard();
        let g = Grid1D::new(100.0, 512).unwrap();
        let init = pulse(&g, 1e-2, 0.0, 5.0);
        let mut cfg = SolverConfig::new(max_stable_dt(&eq, &init).unwrap(), 5.0);
        cfg.output_stride = 10;
        let out = run_simulation(&eq, &init, &cfg).unwrap();
        assert!(!out.aborted());
        let (dm, dp) = out.history.max_abs_defect();
        assert!(dm <= 1e-10 && dp <= 1e-10);
        let h = &out.history;
        for i in 0..h.len() {
            assert_eq!(h.q_s[i], h.e_s[i] + h.f_s[i]);
            if i > 0 {
                assert!(h.f_s[i] >= h.f_s[i - 1]);
                assert!(h.e_s[i] >= h.e_s[i - 1]);
            }
        }
        assert!((h.times.last().unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn supersonic_requires_override() {
        let eq = EquilibriumState::new(ModelParams::new(2.0, 1.0, 1.0).unwrap(), 1.0, 2.0).unwrap();
        let g = Grid1D::new(20.0, 64).unwrap();
        let z = FieldState::zeros(g);
        assert!(run_simulation(&eq, &z, &SolverConfig::new(0.01, 0.1)).is_err());
        let mut cfg = SolverConfig::new(0.01, 0.1);
        cfg.allow_supersonic = true;
        assert!(run_simulation(&eq, &z, &cfg).is_ok());
    }
}
