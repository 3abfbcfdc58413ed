//! Time-convolution integrals that control the nonlinear Duhamel terms:
//!
//! `H₁(t) = sup_τ (1+τ)^{1/4}∫₀^τ e^{−c₁(τ−z)}(1+z)^{−1/4}dz
//!        + sup_τ (1+τ)^{1/4}[∫₀^τ e^{−2c₁(τ−z)}(1+z)^{−1/2}dz]^{1/2}`,
//!
//! `H₂(t) = sup_τ (1+τ)^{1/4}∫₀^τ (1+τ−z)^{−3/4}(1+z)^{−1/2}dz`,
//!
//! with the suprema taken over `τ ∈ [0, t]`.

use crate::error::{domain, QhdError, Result};
use crate::quadrature::{integrate_with_breaks, Tolerance};

/// `lim_{τ→∞}` of the `H₂` integrand term: `B(1/4, 1/2) = Γ(1/4)Γ(1/2)/Γ(3/4)`.
pub const H2_LIMIT: f64 = 5.244_115_108_584_24;

/// Breakpoints clustered geometrically at both ends of `[0, τ]`.
fn breaks(tau: f64) -> Vec<f64> {
    let mut pts = vec![0.0, tau];
    let mut d = 0.125;
    while d < 0.5 * tau {
        pts.push(d);
        pts.push(tau - d);
        d *= 2.0;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn quad(f: impl Fn(f64) -> f64, tau: f64, rel: f64, what: &str) -> Result<f64> {
    if tau == 0.0 {
        return Ok(0.0);
    }
    let tol = Tolerance {
        abs: 0.0,
        rel,
        max_intervals: 50_000,
    };
    let q = integrate_with_breaks(&f, &breaks(tau), tol);
    if !q.converged || !q.value.is_finite() {
        return Err(QhdError::Accuracy {
            context: format!("{what} at tau={tau}"),
            estimate: q.rel_error(),
            tolerance: rel,
        });
    }
    Ok(q.value)
}

/// The two terms of `H₁` at a single `τ` (before taking suprema).
pub fn h1_terms(c1: f64, tau: f64, rel: f64) -> Result<(f64, f64)> {
    let w = (1.0 + tau).powf(0.25);
    let first = quad(
        |z| (-c1 * (tau - z)).exp() * (1.0 + z).powf(-0.25),
        tau,
        rel,
        "H1 first kernel",
    )?;
    let second = quad(
        |z| (-2.0 * c1 * (tau - z)).exp() / (1.0 + z).sqrt(),
        tau,
        rel,
        "H1 second kernel",
    )?;
    Ok((w * first, w * second.sqrt()))
}

/// The `H₂` term at a single `τ`.
pub fn h2_term(tau: f64, rel: f64) -> Result<f64> {
    let w = (1.0 + tau).powf(0.25);
    Ok(w * quad(
        |z| (1.0 + tau - z).powf(-0.75) / (1.0 + z).sqrt(),
        tau,
        rel,
        "H2 kernel",
    )?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionBounds {
    pub c1: f64,
    pub times: Vec<f64>,
    /// `H₁(t)` at each grid time (suprema restricted to grid points).
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub sup_h1: f64,
    pub sup_h2: f64,
    /// `H(t_max)/H(10³)`; how far the suprema still move on the last decade.
    pub h1_late_growth: f64,
    pub h2_late_growth: f64,
}

/// Evaluates `H₁` and `H₂` on a sorted grid in `[0, 10⁴]`.
pub fn h1h2_boundedness(c1: f64, t_grid: &[f64]) -> Result<ConvolutionBounds> {
    h1h2_with_tolerance(c1, t_grid, 1e-10)
}

pub fn h1h2_with_tolerance(c1: f64, t_grid: &[f64], rel: f64) -> Result<ConvolutionBounds> {
    if !(c1 > 0.0 && c1.is_finite()) {
        return domain("c1 must be positive");
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return domain("time grid must be non-empty and sorted");
    }
    if t_grid.iter().any(|&t| !(0.0..=1e4).contains(&t)) {
        return domain("time grid must lie in [0, 1e4]");
    }
    let (mut a_sup, mut b_sup, mut c_sup) = (0.0f64, 0.0f64, 0.0f64);
    let mut h1 = Vec::with_capacity(t_grid.len());
    let mut h2 = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (a, b) = h1_terms(c1, t, rel)?;
        a_sup = a_sup.max(a);
        b_sup = b_sup.max(b);
        c_sup = c_sup.max(h2_term(t, rel)?);
        h1.push(a_sup + b_sup);
        h2.push(c_sup);
    }
    let pivot = t_grid.iter().rposition(|&t| t <= 1e3).unwrap_or(0);
    let growth = |v: &[f64]| {
        if v[pivot] > 0.0 {
            v[v.len() - 1] / v[pivot]
        } else {
            1.0
        }
    };
    Ok(ConvolutionBounds {
        c1,
        times: t_grid.to_vec(),
        sup_h1: *h1.last().unwrap(),
        sup_h2: *h2.last().unwrap(),
        h1_late_growth: growth(&h1),
        h2_late_growth: growth(&h2),
        h1,
        h2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(points: usize) -> Vec<f64> {
        let mut g = vec![0.0];
        g.extend((0..points).map(|i| 1e-2 * 1e6f64.powf(i as f64 / (points - 1) as f64)));
        g
    }

    #[test]
    fn empty_integrals_at_zero() {
        assert_eq!(h1_terms(1.0, 0.0, 1e-10).unwrap(), (0.0, 0.0));
        assert_eq!(h2_term(0.0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn h2_at_one_against_midpoint_richardson() {
        let f = |z: f64| (2.0 - z).powf(-0.75) / (1.0 + z).sqrt();
        let midpoint = |n: usize| {
            let h = 1.0 / n as f64;
            (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
        };
        let reference = (4.0 * midpoint(40_000) - midpoint(20_000)) / 3.0 * 2f64.powf(0.25);
        assert!((h2_term(1.0, 1e-12).unwrap() - reference).abs() < 1e-8);
    }

    #[test]
    fn h1_first_term_closed_form_for_large_c1() {
        // τ = 2, c1 = 50: ∫ ≈ (1+τ)^{-1/4}/c1 · (1 + O(1/c1))
        let (a, _) = h1_terms(50.0, 2.0, 1e-12).unwrap();
        assert!((a * 50.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn suprema_bounded_and_refinement_stable() {
        let coarse = h1h2_with_tolerance(1.0, &grid(200), 1e-6).unwrap();
        let fine = h1h2_with_tolerance(1.0, &grid(400), 1e-11).unwrap();
        assert!((coarse.sup_h1 / fine.sup_h1 - 1.0).abs() < 0.01);
        assert!((coarse.sup_h2 / fine.sup_h2 - 1.0).abs() < 0.01);
        // H₁ peaks at moderate τ (terms ≈ 1.045 and 0.735) and is flat afterwards
        assert!((fine.sup_h1 - 1.78).abs() < 0.01);
        assert!((fine.h1_late_growth - 1.0).abs() < 1e-12);
        // H₂ still creeps towards its Beta-function limit on the last decade
        assert!(fine.sup_h2 < H2_LIMIT);
        assert!(fine.h2_late_growth > 1.05);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(h1h2_boundedness(0.0, &[0.0, 1.0]).is_err());
        assert!(h1h2_boundedness(1.0, &[2.0, 1.0]).is_err());
        assert!(h1h2_boundedness(1.0, &[0.0, 2e4]).is_err());
    }
}
