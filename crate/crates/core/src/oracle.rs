//! Brute-force references used to certify the closed-form and spectral paths.
//! Each one uses a different algorithm from the code it checks.

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::matfun::{CMatrix2, CVector2};
use crate::model::EquilibriumState;
use crate::symbol::{even_symbol, odd_symbol};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleReport {
    pub fn new(name: impl Into<String>, cases: usize, max_error: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            cases,
            max_error,
            tolerance,
            passed: max_error <= tolerance,
        }
    }

    pub fn row(&self) -> String {
        format!(
            "{}, {}, {:.3e}, {:.1e}, {}",
            self.name,
            self.cases,
            self.max_error,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

fn mode_matrix(eq: &EquilibriumState, xi: f64) -> CMatrix2 {
    let a = odd_symbol(eq, xi);
    let b = even_symbol(eq, xi);
    CMatrix2::from_fn(|r, c| Complex64::new(-b[(r, c)], -xi * a[(r, c)]))
}

/// Classical RK4 for `Û' = −(iξA(ξ) + B(ξ))Û`.
pub fn rk4_mode_reference(eq: &EquilibriumState, xi: f64, u0: &CVector2, t: f64, dt: f64) -> Result<CVector2> {
    if !(dt > 0.0 && dt <= 1e-3) {
        return domain(format!("reference step must lie in (0, 1e-3], got {dt}"));
    }
    let steps = (t / dt).round();
    if t < 0.0 || (steps * dt - t).abs() > 1e-9 * t.max(1.0) {
        return domain("t/dt must be a non-negative integer");
    }
    let r = mode_matrix(eq, xi);
    let h = Complex64::new(dt, 0.0);
    let half = Complex64::new(0.5 * dt, 0.0);
    let mut u = *u0;
    for _ in 0..steps as usize {
        let k1 = r * u;
        let k2 = r * (u + k1 * half);
        let k3 = r * (u + k2 * half);
        let k4 = r * (u + k3 * h);
        u += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0);
    }
    Ok(u)
}

/// Step for [`rk4_mode_reference`]: `min(1e-4, 0.01/|λ|max)` shrunk so that
/// it divides `t`. Keeps the reference truncation near `1e-10`.
pub fn rk4_step_for(eq: &EquilibriumState, xi: f64, t: f64) -> f64 {
    let r = mode_matrix(eq, xi);
    let (tr, det) = (r.trace(), r.determinant());
    let root = (tr * tr - 4.0 * det).sqrt();
    let radius = ((tr + root) * 0.5).norm().max(((tr - root) * 0.5).norm());
    let target = if radius > 0.0 { 1e-4f64.min(0.01 / radius) } else { 1e-4 };
    if t == 0.0 {
        return target;
    }
    t / (t / target).ceil()
}

/// Roots of `λ² + c₁λ + c₀ = 0`, larger real part first.
///
/// The larger-magnitude root comes from the well-conditioned sign choice and
/// the other from the product `c₀`.
pub fn polynomial_roots_companion(c0: Complex64, c1: Complex64) -> (Complex64, Complex64) {
    let s = (c1 * c1 - 4.0 * c0).sqrt();
    let sign = if (c1.conj() * s).re >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (c1 + sign * s);
    let (r1, r2) = if q.norm() == 0.0 {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (q, c0 / q)
    };
    if r1.re > r2.re || (r1.re == r2.re && r1.im >= r2.im) {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

/// Periodic centred differences: fourth order for `n = 1, 2`, second order for `n = 3`.
pub fn finite_difference_reference(field: &[f64], n: u32, h: f64) -> Result<Vec<f64>> {
    let len = field.len();
    if len < 5 {
        return domain("finite differences need at least 5 points");
    }
    let at = |j: usize, off: isize| field[(j as isize + off).rem_euclid(len as isize) as usize];
    let out = (0..len)
        .map(|j| {
            let (m2, m1, c, p1, p2) = (at(j, -2), at(j, -1), at(j, 0), at(j, 1), at(j, 2));
            match n {
                1 => Ok((-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h)),
                2 => Ok((-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h)),
                3 => Ok((p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h)),
                _ => domain(format!("finite-difference order must be 1, 2 or 3, got {n}")),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(out)
}

/// `min yᵀMy` over `10⁴` unit vectors `(cos φ, sin φ)`, `φ ∈ [0, π)`.
pub fn min_eig_sampling_reference(m: &nalgebra::Matrix2<f64>) -> f64 {
    const SAMPLES: usize = 10_000;
    (0..SAMPLES)
        .map(|i| {
            let phi = std::f64::consts::PI * i as f64 / SAMPLES as f64;
            let (c, s) = (phi.cos(), phi.sin());
            m[(0, 0)] * c * c + (m[(0, 1)] + m[(1, 0)]) * c * s + m[(1, 1)] * s * s
        })
        .fold(f64::INFINITY, f64::min)
}
