//! Physical parameters, equilibrium states and the power-law pressure.
//!
//! Everything that depends only on `(γ, μ, k, ρ*, m*)` is computed once in
//! [`EquilibriumState::new`] and stored, so every downstream module reads the
//! same bit-identical constants.

use crate::error::{domain, QhdError, Result};

/// Relative width of the band around `α* = 0` that is classified as sonic.
pub const SONIC_TOLERANCE: f64 = 1e-12;

/// Adiabatic exponent, viscosity and dispersion coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    gamma: f64,
    mu: f64,
    k: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, mu: f64, k: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return domain(format!("gamma must be > 1, got {gamma}"));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return domain(format!("mu must be > 0, got {mu}"));
        }
        if !(k.is_finite() && k > 0.0) {
            return domain(format!("k must be > 0, got {k}"));
        }
        Ok(Self { gamma, mu, k })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// `p(ρ) = ρ^γ`.
pub fn pressure(params: &ModelParams, rho: f64) -> Result<f64> {
    check_density(rho)?;
    Ok(rho.powf(params.gamma))
}

/// `p'(ρ) = γ ρ^(γ-1)`.
pub fn pressure_derivative(params: &ModelParams, rho: f64) -> Result<f64> {
    check_density(rho)?;
    Ok(params.gamma * rho.powf(params.gamma - 1.0))
}

fn check_density(rho: f64) -> Result<()> {
    if rho.is_finite() && rho > 0.0 {
        Ok(())
    } else {
        domain(format!("density must be positive, got {rho}"))
    }
}

/// `(1+x)^γ − 1 − γx`, accurate for small `x`.
///
/// This is the second-order pressure remainder divided by `ρ*^γ` with
/// `x = ρ/ρ*`; direct evaluation cancels catastrophically for tiny perturbations.
pub fn pressure_excess_ratio(gamma: f64, x: f64) -> f64 {
    if x.abs() < 0.5 {
        // binomial series starting at the quadratic term
        let mut coeff = gamma * (gamma - 1.0) / 2.0;
        let mut power = x * x;
        let mut sum = 0.0;
        for n in 2..200 {
            let term = coeff * power;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            coeff *= (gamma - n as f64) / (n as f64 + 1.0);
            power *= x;
        }
        sum
    } else {
        (gamma * x.ln_1p()).exp_m1() - gamma * x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Subsonic,
    Sonic,
    Supersonic,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Regime::Subsonic => "Subsonic",
            Regime::Sonic => "Sonic",
            Regime::Supersonic => "Supersonic",
        };
        f.write_str(name)
    }
}

/// A constant state `(ρ*, m*)` together with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumState {
    pub params: ModelParams,
    pub rho_star: f64,
    pub m_star: f64,
    /// `p'(ρ*)`
    pub p_prime_star: f64,
    /// `p'(ρ*) − m*²/ρ*²`
    pub alpha_star: f64,
    /// `m*²/ρ*² − p'(ρ*)`
    pub beta_star: f64,
    pub regime: Regime,
}

impl EquilibriumState {
    pub fn new(params: ModelParams, rho_star: f64, m_star: f64) -> Result<Self> {
        classify_equilibrium(params, rho_star, m_star)
    }

    /// Background velocity `m*/ρ*`.
    pub fn velocity(&self) -> f64 {
        self.m_star / self.rho_star
    }

    pub fn mu(&self) -> f64 {
        self.params.mu
    }

    pub fn k(&self) -> f64 {
        self.params.k
    }

    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    pub fn is_subsonic(&self) -> bool {
        self.regime == Regime::Subsonic
    }

    /// Fails with [`QhdError::UnsupportedRegime`] unless the state is subsonic.
    pub fn require_subsonic(&self, what: &str) -> Result<()> {
        if self.is_subsonic() {
            Ok(())
        } else {
            Err(QhdError::UnsupportedRegime {
                regime: self.regime,
                reason: format!("{what} requires a subsonic equilibrium"),
            })
        }
    }
}

pub fn classify_equilibrium(params: ModelParams, rho_star: f64, m_star: f64) -> Result<EquilibriumState> {
    if !(rho_star.is_finite() && rho_star > 0.0) {
        return domain(format!("rho_star must be positive, got {rho_star}"));
    }
    if !m_star.is_finite() {
        return domain(format!("m_star must be finite, got {m_star}"));
    }
    let p_prime_star = pressure_derivative(&params, rho_star)?;
    let u = m_star / rho_star;
    let alpha_star = p_prime_star - u * u;
    let beta_star = -alpha_star;
    let regime = if alpha_star.abs() <= SONIC_TOLERANCE * p_prime_star.max(1.0) {
        Regime::Sonic
    } else if alpha_star > 0.0 {
        Regime::Subsonic
    } else {
        Regime::Supersonic
    };
    Ok(EquilibriumState {
        params,
        rho_star,
        m_star,
        p_prime_star,
        alpha_star,
        beta_star,
        regime,
    })
}
