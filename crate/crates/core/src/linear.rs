//! Exact evolution of single Fourier modes of the linearised system and the
//! decay quantities built on it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, QhdError, Result};
use crate::matfun::{assemble, pair_coefficients, CMatrix2, CVector2};
use crate::model::EquilibriumState;
use crate::profile::Profile;
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::symbol::{alpha, default_scan_grid, dispersion_roots, dissipativity_scan, epsilon_star, generator};

/// Relative root gap below which the Jordan form of the exponential is used.
pub const CONFLUENT_ROOT_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub xi: f64,
    pub u_hat: CVector2,
}

impl ModeState {
    pub fn new(xi: f64, u_hat: CVector2) -> Result<Self> {
        if !xi.is_finite() || u_hat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("mode state must be finite");
        }
        Ok(Self { xi, u_hat })
    }
}

/// `M = e^{tR(iξ)}`, possibly scaled by `e^{−σt}` (see [`mode_propagator_shifted`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    pub xi: f64,
    pub t: f64,
    pub m: CMatrix2,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub shift: f64,
}

impl Propagator {
    pub fn apply(&self, v: &CVector2) -> CVector2 {
        self.m * v
    }

    /// `max |e^{tλ±}|` including the shift.
    pub fn predicted_spectral_radius(&self) -> f64 {
        (self.t * self.lambda_plus.re - self.shift * self.t)
            .max(self.t * self.lambda_minus.re - self.shift * self.t)
            .exp()
    }
}

pub fn mode_propagator(eq: &EquilibriumState, xi: f64, t: f64) -> Result<Propagator> {
    mode_propagator_shifted(eq, xi, t, 0.0)
}

/// `e^{−σt}·e^{tR(iξ)}`; the shift keeps entries representable when the
/// unshifted exponential would under- or overflow.
pub fn mode_propagator_shifted(eq: &EquilibriumState, xi: f64, t: f64, shift: f64) -> Result<Propagator> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("propagation time must be finite and non-negative, got {t}"));
    }
    let roots = dispersion_roots(eq, xi);
    let (lp, lm) = (roots.plus, roots.minus);
    let r = generator(eq, xi);
    let id = CMatrix2::identity();

    let gap = (lp - lm).norm();
    let m = if roots.degenerate || gap <= CONFLUENT_ROOT_GAP * lp.norm().max(lm.norm()).max(1.0) {
        let lambda = 0.5 * (lp + lm);
        (id + (r - id * lambda) * Complex64::new(t, 0.0)) * ((lambda - shift) * t).exp()
    } else {
        let (zp, zm) = (lp * t, lm * t);
        let e = |z: Complex64| (z - shift * t).exp();
        let (f0, f1) = pair_coefficients(zp, zm, e, e);
        assemble(&(r * Complex64::new(t, 0.0)), zp, zm, f0, f1)
    };
    Ok(Propagator {
        xi,
        t,
        m,
        lambda_plus: lp,
        lambda_minus: lm,
        shift,
    })
}

pub fn evolve_mode(eq: &EquilibriumState, mode: &ModeState, t: f64) -> Result<ModeState> {
    let p = mode_propagator(eq, mode.xi, t)?;
    Ok(ModeState {
        xi: mode.xi,
        u_hat: p.apply(&mode.u_hat),
    })
}

/// `V = S^{1/2}Û = (√α Û₁, Û₂)`.
pub fn symmetrized(eq: &EquilibriumState, xi: f64, u_hat: &CVector2) -> CVector2 {
    CVector2::new(u_hat[0] * alpha(eq, xi).sqrt(), u_hat[1])
}

/// `E = |V|² − δξ⟨V, iK̂V⟩ = |V|² + 2δξκ·Im(V̄₁V₂)` with `κ = ε*/√α(ξ)`.
pub fn lembee_energy(eq: &EquilibriumState, xi: f64, v: &CVector2, delta: f64) -> Result<f64> {
    eq.require_subsonic("energy functional")?;
    if !(delta >= 0.0) {
        return domain("delta must be non-negative");
    }
    let kappa = epsilon_star(eq) / alpha(eq, xi).sqrt();
    let coupling = (v[0].conj() * v[1]).im;
    Ok(v.norm_squared() + 2.0 * delta * xi * kappa * coupling)
}

/// Largest δ for which `δ|ξK̂(ξ)| ≤ ½` for every ξ, so `½|V|² ≤ E ≤ 3/2|V|²`.
pub fn delta_equivalence(eq: &EquilibriumState) -> f64 {
    eq.k() / (2.0 * 2f64.sqrt() * epsilon_star(eq))
}

/// Step size that keeps `E` both equivalent to `|V|²` and non-increasing.
///
/// The second bound makes the dissipation matrix
/// `B* + δ[K̂Â]^s − (δξ/2)·i(B*K̂ + K̂B*)` non-negative for all ξ.
pub fn admissible_delta(eq: &EquilibriumState) -> f64 {
    let eps = epsilon_star(eq);
    let (mu, k, u) = (eq.mu(), eq.k(), eq.velocity());
    let mono = mu / (eps * (1.0 + u * u / eq.alpha_star + mu * mu / (2.0 * k * k)));
    delta_equivalence(eq).min(mono)
}

/// `W = (1+ξ²)|Û₁|² + |Û₂|²`.
pub fn weighted_mode_norm(xi: f64, u_hat: &CVector2) -> f64 {
    (1.0 + xi * xi) * u_hat[0].norm_sqr() + u_hat[1].norm_sqr()
}

/// Outcome of the Monte-Carlo pointwise bound check.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseReport {
    pub c_fitted: f64,
    pub omega0_used: f64,
    pub trials: usize,
    pub violations: usize,
    pub seed: u64,
    pub rng: &'static str,
    /// Sample with the largest ratio: `(ξ, t, Û₀)`.
    pub worst: Option<(f64, f64, CVector2)>,
}

impl PointwiseReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.c_fitted < POINTWISE_C_LIMIT
    }

    pub fn to_text(&self) -> String {
        format!(
            "{{ c_fitted: {:.16e}, omega0_used: {:.16e}, trials: {}, violations: {}, seed: {}, rng: {} }}",
            self.c_fitted, self.omega0_used, self.trials, self.violations, self.seed, self.rng
        )
    }
}

pub const POINTWISE_C_LIMIT: f64 = 100.0;
const OMEGA0_SAFETY: f64 = 0.99;

/// Samples `W(t)e^{2ω₀ξ²t}/W(0)` for random unit data at random `(ξ, t)`
/// drawn from the grids.
pub fn pointwise_bound_check(
    eq: &EquilibriumState,
    xi_grid: &[f64],
    t_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<PointwiseReport> {
    eq.require_subsonic("pointwise bound")?;
    if xi_grid.is_empty() || t_grid.is_empty() {
        return domain("pointwise check needs non-empty grids");
    }
    if xi_grid.iter().chain(t_grid).any(|v| !v.is_finite()) || t_grid.iter().any(|&t| t < 0.0) {
        return domain("grids must be finite with t >= 0");
    }
    let scan = dissipativity_scan(eq, &default_scan_grid())?;
    let omega0 = OMEGA0_SAFETY
        * scan
            .omega0_estimate
            .ok_or_else(|| QhdError::Domain("no positive decay rate for a subsonic state".into()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<(f64, f64, CVector2)> = (0..trials)
        .map(|_| {
            let xi = xi_grid[rng.random_range(0..xi_grid.len())];
            let t = t_grid[rng.random_range(0..t_grid.len())];
            let mut v = CVector2::new(
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            );
            let n = v.norm();
            if n > 0.0 {
                v /= Complex64::new(n, 0.0);
            }
            (xi, t, v)
        })
        .collect();

    let ratios: Vec<f64> = samples
        .par_iter()
        .map(|&(xi, t, u0)| -> Result<f64> {
            let w0 = weighted_mode_norm(xi, &u0);
            if w0 == 0.0 {
                return Ok(1.0);
            }
            // W(t)e^{2ω₀ξ²t} = |e^{−σt}M Û₀|²_W · e^{2t(σ + ω₀ξ²)} with σ = Re λ₊
            let sigma = dispersion_roots(eq, xi).plus.re;
            let p = mode_propagator_shifted(eq, xi, t, sigma)?;
            let w = weighted_mode_norm(xi, &p.apply(&u0));
            Ok(w * (2.0 * t * (sigma + omega0 * xi * xi)).exp() / w0)
        })
        .collect::<Result<_>>()?;

    let mut c_fitted = 0.0f64;
    let mut worst = None;
    let mut violations = 0;
    for (r, s) in ratios.iter().zip(&samples) {
        if !r.is_finite() || *r >= POINTWISE_C_LIMIT {
            violations += 1;
        }
        if *r > c_fitted || !r.is_finite() {
            c_fitted = if r.is_finite() { *r } else { f64::INFINITY };
            worst = Some(*s);
        }
    }
    Ok(PointwiseReport {
        c_fitted,
        omega0_used: omega0,
        trials,
        violations,
        seed,
        rng: "ChaCha8",
        worst,
    })
}

/// Relative error above which a semigroup norm is rejected.
pub const SEMIGROUP_QUADRATURE_TOL: f64 = 1e-8;

/// Evaluates the weighted Plancherel norms of `e^{tA}f` on the whole line.
#[derive(Debug, Clone)]
pub struct SemigroupEvaluator {
    eq: EquilibriumState,
    omega0: f64,
}

impl SemigroupEvaluator {
    pub fn new(eq: &EquilibriumState) -> Result<Self> {
        eq.require_subsonic("semigroup norms")?;
        let scan = dissipativity_scan(eq, &default_scan_grid())?;
        let omega0 = scan
            .omega0_estimate
            .ok_or_else(|| QhdError::Domain("no positive decay rate for a subsonic state".into()))?;
        Ok(Self { eq: *eq, omega0 })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Truncation radius: the heat-like tail `e^{−2ω₀ξ²t}` is below `e^{−60}`
    /// past it, and the profile transform is negligible past its own radius.
    pub fn truncation(&self, profile: &Profile, t: f64) -> f64 {
        let tail = if t > 0.0 {
            (30.0 / (self.omega0 * t)).sqrt()
        } else {
            f64::INFINITY
        };
        10f64.max(tail.min(profile.shape.spectral_radius()))
    }

    /// `(norm1, norm0)`: square roots of `∫ξ^{2ℓ}(1+ξ²)|Û₁|²` and `∫ξ^{2ℓ}|Û₂|²`.
    pub fn norms(&self, profile: &Profile, t: f64, ell: u32) -> Result<(f64, f64)> {
        if !(t >= 0.0) || !t.is_finite() {
            return domain("time must be finite and non-negative");
        }
        let cutoff = self.truncation(profile, t);
        if !cutoff.is_finite() {
            return Err(QhdError::Accuracy {
                context: "semigroup norm truncation (profile transform has no finite radius at t = 0)".into(),
                estimate: f64::INFINITY,
                tolerance: SEMIGROUP_QUADRATURE_TOL,
            });
        }
        // geometric breakpoints resolve the concentration near ξ ~ t^{-1/2}
        let mut breaks = vec![0.0];
        let mut b = cutoff * 2f64.powi(-40);
        while b < cutoff {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(cutoff);

        let eq = &self.eq;
        let component = |xi: f64, which: usize| -> f64 {
            let mut total = 0.0;
            for x in [xi, -xi] {
                let (r0, m0) = profile.transform(x);
                let u0 = CVector2::new(Complex64::new(r0, 0.0), Complex64::new(m0, 0.0));
                let u = match mode_propagator(eq, x, t) {
                    Ok(p) => p.apply(&u0),
                    Err(_) => return f64::NAN,
                };
                let weight = x.powi(2 * ell as i32);
                total += if which == 1 {
                    weight * (1.0 + x * x) * u[0].norm_sqr()
                } else {
                    weight * u[1].norm_sqr()
                };
            }
            total
        };
        let tol = Tolerance {
            abs: 0.0,
            rel: 1e-11,
            max_intervals: 20_000,
        };
        let mut out = [0.0; 2];
        for (slot, which) in out.iter_mut().zip([1usize, 0]) {
            let q = integrate_with_breaks(&|xi| component(xi, which), &breaks, tol);
            if !q.value.is_finite() || (q.value > 0.0 && q.rel_error() > SEMIGROUP_QUADRATURE_TOL) {
                return Err(QhdError::Accuracy {
                    context: format!("semigroup norm quadrature at t={t}, ell={ell}"),
                    estimate: q.rel_error(),
                    tolerance: SEMIGROUP_QUADRATURE_TOL,
                });
            }
            *slot = q.value.max(0.0).sqrt();
        }
        Ok((out[0], out[1]))
    }
}

pub fn semigroup_norms(eq: &EquilibriumState, profile: &Profile, t: f64, ell: u32) -> Result<(f64, f64)> {
    SemigroupEvaluator::new(eq)?.norms(profile, t, ell)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `p` in `v ≈ C(1+t)^{−p}`.
    pub exponent: f64,
    pub prefactor: f64,
    /// Max relative deviation of the fit over the window.
    pub residual: f64,
}

impl DecayFit {
    pub fn model(&self, t: f64) -> f64 {
        self.prefactor * (1.0 + t).powf(-self.exponent)
    }
}

/// Least-squares fit of `log v = log C − p log(1+t)` on `window = (t_lo, t_hi)`.
pub fn decay_rate_fit(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != values.len() {
        return domain("times and values differ in length");
    }
    if values.iter().any(|&v| !(v > 0.0)) {
        return domain("decay fit needs strictly positive values");
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, v)| ((1.0 + t).ln(), v.ln()))
        .unzip();
    if xs.len() < 10 {
        return domain(format!("fit window holds {} points; at least 10 required", xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return domain("fit window spans a single time");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| ((intercept + slope * x).exp() / y.exp() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        times: times.to_vec(),
        values: values.to_vec(),
        exponent: -slope,
        prefactor: intercept.exp(),
        residual,
    })
}
