//! Fourier-symbol analysis of the linearised system.
//!
//! With `Û_t + (iξ A(ξ) + B(ξ)) Û = 0`, `A(ξ) = A* + ξ² C*` and
//! `B(ξ) = ξ² B*`, this module builds the symmetriser `S(ξ) = diag(α(ξ), 1)`,
//! the rescaled pair `(Â, B̂)`, the compensating symbol `K̂`, and the roots
//! `λ±(ξ)` of the dispersion relation
//! `λ² + (μξ² + 2iξ m*/ρ*) λ + ξ² α(ξ) = 0`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, QhdError, Result};
use crate::matfun::{principal_sqrt, CMatrix2};
use crate::model::{EquilibriumState, Regime};

/// Relative threshold on `|Δ(ξ)|` below which the two roots are merged.
pub const DEGENERATE_DISCRIMINANT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantMatrices {
    pub a_star: Matrix2<f64>,
    pub b_star: Matrix2<f64>,
    pub c_star: Matrix2<f64>,
}

pub fn constant_matrices(eq: &EquilibriumState) -> ConstantMatrices {
    let u = eq.velocity();
    ConstantMatrices {
        a_star: Matrix2::new(0.0, 1.0, eq.alpha_star, 2.0 * u),
        b_star: Matrix2::new(0.0, 0.0, 0.0, eq.mu()),
        c_star: Matrix2::new(0.0, 0.0, 0.5 * eq.k() * eq.k(), 0.0),
    }
}

/// `α(ξ) = α* + ½k²ξ²`.
pub fn alpha(eq: &EquilibriumState, xi: f64) -> f64 {
    eq.alpha_star + 0.5 * eq.k() * eq.k() * xi * xi
}

/// Odd part `A(ξ) = A* + ξ² C*`.
pub fn odd_symbol(eq: &EquilibriumState, xi: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, alpha(eq, xi), 2.0 * eq.velocity())
}

/// Even part `B(ξ) = ξ² B*`.
pub fn even_symbol(eq: &EquilibriumState, xi: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, 0.0, 0.0, eq.mu() * xi * xi)
}

/// `R(iξ) = −(iξ A(ξ) + B(ξ))`, the generator of a single Fourier mode.
pub fn generator(eq: &EquilibriumState, xi: f64) -> CMatrix2 {
    let i = Complex64::i();
    let a = odd_symbol(eq, xi).map(|v| Complex64::new(v, 0.0));
    let b = even_symbol(eq, xi).map(|v| Complex64::new(v, 0.0));
    -(a * (i * xi) + b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRoots {
    /// Root with the larger real part (larger imaginary part on ties).
    pub plus: Complex64,
    pub minus: Complex64,
    /// `Δ(ξ) = a(ξ) + i b(ξ)`.
    pub discriminant: Complex64,
    pub degenerate: bool,
}

impl DispersionRoots {
    pub fn max_real(&self) -> f64 {
        self.plus.re.max(self.minus.re)
    }
}

/// Roots of the dispersion relation. Valid in every regime.
pub fn dispersion_roots(eq: &EquilibriumState, xi: f64) -> DispersionRoots {
    let (mu, k, u) = (eq.mu(), eq.k(), eq.velocity());
    let xi2 = xi * xi;
    let a = xi2 * (xi2 * (mu * mu - 2.0 * k * k) - 4.0 * eq.p_prime_star);
    let b = 4.0 * mu * xi2 * xi * u;
    let disc = Complex64::new(a, b);
    let base = Complex64::new(-0.5 * mu * xi2, -xi * u);

    let c1 = Complex64::new(mu * xi2, 2.0 * xi * u);
    let c0 = xi2 * alpha(eq, xi);
    let scale = c1.norm_sqr() + 4.0 * c0.abs();
    if disc.norm() <= DEGENERATE_DISCRIMINANT * scale || scale == 0.0 {
        return DispersionRoots {
            plus: base,
            minus: base,
            discriminant: disc,
            degenerate: true,
        };
    }
    let half = 0.5 * principal_sqrt(disc);
    let (mut plus, mut minus) = (base + half, base - half);
    if plus.re == minus.re && plus.im < minus.im {
        std::mem::swap(&mut plus, &mut minus);
    }
    DispersionRoots {
        plus,
        minus,
        discriminant: disc,
        degenerate: false,
    }
}

/// Eigenvalues `ν₋ < ν₊` of `Ã(ξ)`.
pub fn transport_eigenvalues(eq: &EquilibriumState, xi: f64) -> Result<(f64, f64)> {
    eq.require_subsonic("transport eigenvalues")?;
    let u = eq.velocity();
    let a = alpha(eq, xi);
    let root = (u * u + a * a).sqrt();
    Ok((u - root, u + root))
}

/// Genuine-coupling certificate at a single nonzero wavenumber.
///
/// `ker B̃(ξ)` is spanned by `V = (1, 0)`, and `(ϱS + Ã)V = (ϱα, α)`; this is
/// nonzero for every real `ϱ` exactly when `α(ξ) ≠ 0`. The certificate also
/// requires the transport eigenvalues to be real and distinct.
pub fn genuine_coupling_check(eq: &EquilibriumState, xi: f64) -> Result<bool> {
    eq.require_subsonic("genuine coupling")?;
    if xi == 0.0 || !xi.is_finite() {
        return domain("genuine coupling is defined for finite xi != 0");
    }
    let a = alpha(eq, xi);
    let (nu_minus, nu_plus) = transport_eigenvalues(eq, xi)?;
    let image_second_component = a;
    Ok(image_second_component > 0.0 && nu_plus - nu_minus > 0.0 && nu_minus.is_finite())
}

/// `ε* = ½ μ α* ρ*² / (α* ρ*² + 2m*²)`.
pub fn epsilon_star(eq: &EquilibriumState) -> f64 {
    let r2 = eq.rho_star * eq.rho_star;
    0.5 * eq.mu() * eq.alpha_star * r2 / (eq.alpha_star * r2 + 2.0 * eq.m_star * eq.m_star)
}

/// Uniform lower bound `θ = ε*/2` for `[K̂Â]^s + B*`.
pub fn theta(eq: &EquilibriumState) -> f64 {
    0.5 * epsilon_star(eq)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatingSymbol {
    pub k_hat: Matrix2<f64>,
    pub epsilon_star: f64,
    pub theta: f64,
}

/// `K̂(ξ) = ε*/√α(ξ) · [[0, 1], [−1, 0]]`.
pub fn compensating_symbol(eq: &EquilibriumState, xi: f64) -> Result<CompensatingSymbol> {
    eq.require_subsonic("compensating symbol")?;
    let eps = epsilon_star(eq);
    let q = eps / alpha(eq, xi).sqrt();
    Ok(CompensatingSymbol {
        k_hat: Matrix2::new(0.0, q, -q, 0.0),
        epsilon_star: eps,
        theta: 0.5 * eps,
    })
}

/// `Â(ξ) = S^{1/2} A(ξ) S^{-1/2}`.
pub fn rescaled_odd_symbol(eq: &EquilibriumState, xi: f64) -> Matrix2<f64> {
    let root = alpha(eq, xi).sqrt();
    Matrix2::new(0.0, root, root, 2.0 * eq.velocity())
}

/// `[K̂(ξ)Â(ξ)]^s + B*`, assembled from the matrix product.
pub fn compensated_form(eq: &EquilibriumState, xi: f64) -> Result<Matrix2<f64>> {
    let comp = compensating_symbol(eq, xi)?;
    let product = comp.k_hat * rescaled_odd_symbol(eq, xi);
    let sym = 0.5 * (product + product.transpose());
    Ok(sym + constant_matrices(eq).b_star)
}

/// Smaller eigenvalue of a symmetric 2×2 matrix, closed form.
pub fn symmetric_min_eig(m: &Matrix2<f64>) -> f64 {
    let (a, b, c) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let mean = 0.5 * (a + c);
    let half_diff = 0.5 * (a - c);
    mean - half_diff.hypot(b)
}

/// Minimal eigenvalue of `[[ε*, ε*m*/(ρ*√α)], [ε*m*/(ρ*√α), μ−ε*]]`.
///
/// Errors if the value falls below `θ − 1e-12`, which can only happen through
/// a wrong constant.
pub fn quadratic_form_min_eig(eq: &EquilibriumState, xi: f64) -> Result<f64> {
    eq.require_subsonic("quadratic form")?;
    let eps = epsilon_star(eq);
    let off = eps * eq.velocity() / alpha(eq, xi).sqrt();
    let value = symmetric_min_eig(&Matrix2::new(eps, off, off, eq.mu() - eps));
    let th = theta(eq);
    if value < th - 1e-12 {
        return Err(QhdError::Constants(format!(
            "min eigenvalue {value} below theta {th} at xi={xi}"
        )));
    }
    Ok(value)
}

/// Every ξ-dependent matrix at one wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolEval {
    pub xi: f64,
    pub alpha: f64,
    pub a_xi: Matrix2<f64>,
    pub b_xi: Matrix2<f64>,
    pub s: Matrix2<f64>,
    pub a_tilde: Matrix2<f64>,
    pub b_tilde: Matrix2<f64>,
    pub a_hat: Matrix2<f64>,
    pub b_hat: Matrix2<f64>,
    pub k_hat: Matrix2<f64>,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
}

pub fn symbol_eval(eq: &EquilibriumState, xi: f64) -> Result<SymbolEval> {
    eq.require_subsonic("symbol symmetrizer")?;
    let a = alpha(eq, xi);
    let s = Matrix2::new(a, 0.0, 0.0, 1.0);
    let a_xi = odd_symbol(eq, xi);
    let b_xi = even_symbol(eq, xi);
    let roots = dispersion_roots(eq, xi);
    Ok(SymbolEval {
        xi,
        alpha: a,
        a_xi,
        b_xi,
        s,
        a_tilde: s * a_xi,
        b_tilde: s * b_xi,
        a_hat: rescaled_odd_symbol(eq, xi),
        b_hat: b_xi,
        k_hat: compensating_symbol(eq, xi)?.k_hat,
        lambda_plus: roots.plus,
        lambda_minus: roots.minus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    StrictlyDissipative,
    UnstableModesFound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub xi: f64,
    pub alpha: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
}

impl ScanPoint {
    pub fn ratio(&self) -> f64 {
        self.lambda_plus.re.max(self.lambda_minus.re) / (self.xi * self.xi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipativityReport {
    pub xi_grid: Vec<f64>,
    pub points: Vec<ScanPoint>,
    /// `sup_ξ max Re λ±(ξ) / ξ²` over the grid.
    pub max_real_part_ratio: f64,
    pub max_real_part: f64,
    pub omega0_estimate: Option<f64>,
    pub verdict: Verdict,
    /// `|ξ|`-interval on which `Re λ₊ > 0`, refined by bisection.
    pub unstable_window: Option<(f64, f64)>,
}

/// Log-spaced `|ξ| ∈ [lo, hi]` with `per_sign` points on each side of zero.
pub fn log_grid(lo: f64, hi: f64, per_sign: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let positive: Vec<f64> = (0..per_sign)
        .map(|i| {
            if per_sign == 1 {
                lo
            } else {
                (a + (b - a) * i as f64 / (per_sign - 1) as f64).exp()
            }
        })
        .collect();
    positive
        .iter()
        .rev()
        .map(|x| -x)
        .chain(positive.iter().copied())
        .collect()
}

/// Grid used by default: `|ξ| ∈ [1e-3, 50]`, 2000 log-spaced points per sign.
pub fn default_scan_grid() -> Vec<f64> {
    log_grid(1e-3, 50.0, 2000)
}

pub fn dissipativity_scan(eq: &EquilibriumState, xi_grid: &[f64]) -> Result<DissipativityReport> {
    if eq.regime == Regime::Sonic {
        return Err(QhdError::UnsupportedRegime {
            regime: Regime::Sonic,
            reason: "sonic states are excluded from the dissipativity analysis".into(),
        });
    }
    if xi_grid.is_empty() {
        return domain("empty wavenumber grid");
    }
    if xi_grid.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return domain("scan grid must exclude xi = 0 and be finite");
    }

    let points: Vec<ScanPoint> = xi_grid
        .par_iter()
        .map(|&xi| {
            let roots = dispersion_roots(eq, xi);
            ScanPoint {
                xi,
                alpha: alpha(eq, xi),
                lambda_plus: roots.plus,
                lambda_minus: roots.minus,
            }
        })
        .collect();

    let max_real_part_ratio = points.iter().map(ScanPoint::ratio).fold(f64::NEG_INFINITY, f64::max);
    let max_real_part = points
        .iter()
        .map(|p| p.lambda_plus.re.max(p.lambda_minus.re))
        .fold(f64::NEG_INFINITY, f64::max);

    let unstable_window = unstable_window(eq, xi_grid);
    let verdict = if max_real_part_ratio < 0.0 && unstable_window.is_none() {
        Verdict::StrictlyDissipative
    } else {
        Verdict::UnstableModesFound
    };
    let omega0_estimate = (max_real_part_ratio < 0.0).then_some(-max_real_part_ratio);

    Ok(DissipativityReport {
        xi_grid: xi_grid.to_vec(),
        points,
        max_real_part_ratio,
        max_real_part,
        omega0_estimate,
        verdict,
        unstable_window,
    })
}

fn unstable_window(eq: &EquilibriumState, xi_grid: &[f64]) -> Option<(f64, f64)> {
    let growth = |x: f64| dispersion_roots(eq, x).plus.re;
    let mut mags: Vec<f64> = xi_grid.iter().map(|x| x.abs()).collect();
    mags.sort_by(f64::total_cmp);
    mags.dedup();

    let first = mags.iter().position(|&x| growth(x) > 0.0)?;
    let lower = if first == 0 {
        0.0
    } else {
        bisect_sign_change(&growth, mags[first - 1], mags[first])
    };
    let upper = match mags[first..].iter().position(|&x| growth(x) <= 0.0) {
        Some(offset) => {
            let j = first + offset;
            bisect_sign_change(&growth, mags[j - 1], mags[j])
        }
        None => *mags.last().unwrap(),
    };
    Some((lower, upper))
}

/// Bisection for the point where `f` changes sign between `a` and `b`.
fn bisect_sign_change(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let positive_at_a = f(a) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (f(mid) > 0.0) == positive_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
