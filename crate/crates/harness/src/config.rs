//! Run configuration: `[section]` headers with `key = value` lines.
//!
//! ```text
//! seed = 7
//! [equilibrium]
//! gamma = 2.0
//! rho_star = 1.0
//! [grid]
//! L = 400.0
//! N = 4096
//! ```
//!
//! Every key is optional; missing keys take the defaults below and command-line
//! flags override the file.

use std::path::Path;

use serde::Deserialize;

use qhd_core::solver::{FieldState, GaussianPulse, SolverConfig};
use qhd_core::spectral::Grid1D;
use qhd_core::{EquilibriumState, ModelParams};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub equilibrium: EquilibriumSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub initial: InitialSection,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumSection {
    pub gamma: Option<f64>,
    pub rho_star: Option<f64>,
    pub m_star: Option<f64>,
    pub mu: Option<f64>,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L", alias = "length")]
    pub length: Option<f64>,
    #[serde(rename = "N", alias = "points")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub output_stride: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    pub s: Option<u32>,
    pub fit_window: Option<[f64; 2]>,
    pub dealias: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub rho_amplitude: Option<f64>,
    pub rho_width: Option<f64>,
    pub rho_center: Option<f64>,
    pub m_amplitude: Option<f64>,
    pub m_width: Option<f64>,
    pub m_center: Option<f64>,
}

pub const DEFAULT_SEED: u64 = 20_240_611;

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub seed: u64,
    pub gamma: f64,
    pub rho_star: f64,
    pub m_star: f64,
    pub mu: f64,
    pub k: f64,
    pub length: f64,
    pub points: usize,
    pub dt: Option<f64>,
    pub t_end: f64,
    pub output_stride: usize,
    pub s: u32,
    pub fit_window: (f64, f64),
    pub dealias: bool,
    pub rho_pulse: GaussianPulse,
    pub m_pulse: GaussianPulse,
}

fn field(section: &str, key: &str, e: impl std::fmt::Display) -> CliError {
    CliError::input(format!("{section}.{key}: {e}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn resolve(&self) -> CliResult<ResolvedRun> {
        let e = &self.equilibrium;
        let length = self.grid.length.unwrap_or(400.0);
        let center = 0.5 * length;
        let i = &self.initial;
        let fit_window = self.diagnostics.fit_window.map_or((100.0, 1000.0), |w| (w[0], w[1]));
        if !(fit_window.0 < fit_window.1) {
            return Err(field(
                "diagnostics",
                "fit_window",
                "lower bound must be below upper bound",
            ));
        }
        let run = ResolvedRun {
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            gamma: e.gamma.unwrap_or(2.0),
            rho_star: e.rho_star.unwrap_or(1.0),
            m_star: e.m_star.unwrap_or(1.0),
            mu: e.mu.unwrap_or(1.0),
            k: e.k.unwrap_or(1.0),
            length,
            points: self.grid.points.unwrap_or(4096),
            dt: self.time.dt,
            t_end: self.time.t_end.unwrap_or(50.0),
            output_stride: self.time.output_stride.unwrap_or(10),
            s: self.diagnostics.s.unwrap_or(3),
            fit_window,
            dealias: self.diagnostics.dealias.unwrap_or(true),
            rho_pulse: GaussianPulse {
                amplitude: i.rho_amplitude.unwrap_or(1e-3),
                width: i.rho_width.unwrap_or(10.0),
                center: i.rho_center.unwrap_or(center),
            },
            m_pulse: GaussianPulse {
                amplitude: i.m_amplitude.unwrap_or(0.0),
                width: i.m_width.unwrap_or(10.0),
                center: i.m_center.unwrap_or(center),
            },
        };
        run.validate()?;
        Ok(run)
    }
}

impl ResolvedRun {
    fn validate(&self) -> CliResult<()> {
        ModelParams::new(self.gamma, self.mu, self.k).map_err(|e| field("equilibrium", "gamma/mu/k", e))?;
        if !(self.rho_star > 0.0) {
            return Err(field("equilibrium", "rho_star", "must be positive"));
        }
        if !self.m_star.is_finite() {
            return Err(field("equilibrium", "m_star", "must be finite"));
        }
        Grid1D::new(self.length, self.points).map_err(|e| field("grid", "L/N", e))?;
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(field("time", "dt", "must be positive"));
            }
        }
        if !(self.t_end >= 0.0) {
            return Err(field("time", "t_end", "must be non-negative"));
        }
        if self.output_stride == 0 {
            return Err(field("time", "output_stride", "must be at least 1"));
        }
        if self.s < 3 {
            return Err(field("diagnostics", "s", "must be at least 3"));
        }
        for (name, p) in [("rho", self.rho_pulse), ("m", self.m_pulse)] {
            if !(p.width > 0.0) {
                return Err(field("initial", &format!("{name}_width"), "must be positive"));
            }
            if !p.amplitude.is_finite() || !p.center.is_finite() {
                return Err(field("initial", name, "amplitude and center must be finite"));
            }
        }
        Ok(())
    }

    pub fn equilibrium(&self) -> CliResult<EquilibriumState> {
        let params = ModelParams::new(self.gamma, self.mu, self.k)?;
        Ok(EquilibriumState::new(params, self.rho_star, self.m_star)?)
    }

    pub fn grid(&self) -> CliResult<Grid1D> {
        Ok(Grid1D::new(self.length, self.points)?)
    }

    pub fn initial_state(&self) -> CliResult<FieldState> {
        Ok(FieldState::gaussian(self.grid()?, self.rho_pulse, self.m_pulse)?)
    }

    pub fn solver_config(&self, dt: f64, allow_supersonic: bool) -> SolverConfig {
        SolverConfig {
            dt,
            t_end: self.t_end,
            dealias: self.dealias,
            rho_floor: None,
            s: self.s,
            output_stride: self.output_stride,
            allow_supersonic,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let r = RunConfig::default().resolve().unwrap();
        assert_eq!((r.gamma, r.rho_star, r.m_star, r.mu, r.k), (2.0, 1.0, 1.0, 1.0, 1.0));
        assert_eq!((r.length, r.points, r.t_end, r.s), (400.0, 4096, 50.0, 3));
        assert_eq!(r.rho_pulse.center, 200.0);
    }

    #[test]
    fn parses_sections_and_integers() {
        let text = "seed = 3\n[equilibrium]\ngamma = 2\nm_star = 0.5\n[grid]\nL = 100\nN = 256\n[time]\nt_end = 1\n[diagnostics]\nfit_window = [10, 20]\n";
        let r = RunConfig::parse(text).unwrap().resolve().unwrap();
        assert_eq!(r.seed, 3);
        assert_eq!(r.gamma, 2.0);
        assert_eq!(r.m_star, 0.5);
        assert_eq!((r.length, r.points), (100.0, 256));
        assert_eq!(r.fit_window, (10.0, 20.0));
    }

    #[test]
    fn errors_name_the_field() {
        let err = RunConfig::parse("[equilibrium]\ngama = 2\n").unwrap_err().to_string();
        assert!(err.contains("gama") && err.contains("line 2"), "{err}");
        let err = RunConfig::parse("[grid]\nN = 100\n")
            .unwrap()
            .resolve()
            .unwrap_err()
            .to_string();
        assert!(err.contains("grid.L/N"), "{err}");
        let err = RunConfig::parse("[equilibrium]\nrho_star = 0\n")
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(err.to_string().contains("equilibrium.rho_star"));
        assert_eq!(err.exit_code(), 2);
    }
}
