//! Periodic grids, real FFTs, spectral derivatives and discrete Sobolev norms.
//!
//! Coefficients are stored as the half spectrum `k = 0..=N/2` normalised as
//! `f̂_k = (1/N) Σ_j f(x_j) e^{−iξ_k x_j}`, so that `f(x_j) = Σ_k f̂_k e^{iξ_k x_j}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{domain, Result};

#[derive(Clone)]
pub struct Grid1D {
    length: f64,
    n: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl fmt::Debug for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1D")
            .field("length", &self.length)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for Grid1D {
    fn eq(&self, other: &Self) -> bool {
        self.length == other.length && self.n == other.n
    }
}

impl Grid1D {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return domain(format!("domain length must be positive, got {length}"));
        }
        if n < 64 || !n.is_power_of_two() {
            return domain(format!("grid size must be a power of two >= 64, got {n}"));
        }
        let mut planner = RealFftPlanner::<f64>::new();
        Ok(Self {
            length,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Number of stored coefficients, `N/2 + 1`.
    pub fn modes(&self) -> usize {
        self.n / 2 + 1
    }

    /// `ξ_k = 2πk/L` for `k = 0..=N/2`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.modes()).map(|k| self.wavenumber(k)).collect()
    }

    pub fn forward(&self, field: &[f64]) -> Vec<Complex64> {
        assert_eq!(field.len(), self.n, "field length must match the grid");
        let mut input = field.to_vec();
        let mut out = self.forward.make_output_vec();
        self.forward
            .process(&mut input, &mut out)
            .expect("buffer sizes fixed by the plan");
        let scale = 1.0 / self.n as f64;
        out.iter_mut().for_each(|c| *c *= scale);
        out
    }

    /// Inverse of [`Grid1D::forward`]. Imaginary parts of the mean and Nyquist
    /// coefficients are discarded.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        assert_eq!(spectrum.len(), self.modes(), "spectrum length must be N/2+1");
        let mut input = spectrum.to_vec();
        input[0].im = 0.0;
        input[self.n / 2].im = 0.0;
        let mut out = self.inverse.make_output_vec();
        self.inverse
            .process(&mut input, &mut out)
            .expect("buffer sizes fixed by the plan");
        out
    }

    /// Multiplies by `(iξ)^order`; the Nyquist coefficient is dropped for odd orders.
    pub fn differentiate_spectrum(&self, spectrum: &mut [Complex64], order: u32) {
        let i = Complex64::i();
        for (k, c) in spectrum.iter_mut().enumerate() {
            *c *= (i * self.wavenumber(k)).powu(order);
        }
        if order % 2 == 1 {
            spectrum[self.n / 2] = Complex64::new(0.0, 0.0);
        }
    }

    pub fn spectral_derivative(&self, field: &[f64], order: u32) -> Vec<f64> {
        if order == 0 {
            return field.to_vec();
        }
        let mut spec = self.forward(field);
        self.differentiate_spectrum(&mut spec, order);
        self.inverse(&spec)
    }

    /// `‖∂_x^deriv f‖²_s` from half-spectrum coefficients.
    pub fn sobolev_norm_sq_spectrum(&self, spectrum: &[Complex64], s: f64, deriv: u32) -> f64 {
        let half = self.n / 2;
        let sum: f64 = spectrum
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let xi2 = self.wavenumber(k).powi(2);
                let multiplicity = if k == 0 || k == half { 1.0 } else { 2.0 };
                multiplicity * (1.0 + xi2).powf(s) * xi2.powi(deriv as i32) * c.norm_sqr()
            })
            .sum();
        sum * self.length
    }

    pub fn sobolev_norm(&self, field: &[f64], s: f64) -> f64 {
        self.sobolev_norm_sq_spectrum(&self.forward(field), s, 0).sqrt()
    }

    /// 2/3-rule mask: keeps `k ≤ N/3`.
    pub fn dealias_mask(&self) -> Vec<bool> {
        (0..self.modes()).map(|k| 3 * k <= self.n).collect()
    }

    /// `Σ_j f(x_j)·h`.
    pub fn integral(&self, field: &[f64]) -> f64 {
        field.iter().sum::<f64>() * self.spacing()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::new(1.0, 32).is_err());
        assert!(Grid1D::new(1.0, 100).is_err());
        assert!(Grid1D::new(0.0, 64).is_err());
        assert!(Grid1D::new(1.0, 64).is_ok());
    }

    #[test]
    fn roundtrip_and_constant() {
        let g = Grid1D::new(3.0, 128).unwrap();
        let f: Vec<f64> = g
            .points()
            .iter()
            .map(|x| (x * 2.0).sin() + 0.3 * x.cos().powi(3))
            .collect();
        let back = g.inverse(&g.forward(&f));
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
        let c = vec![2.5; 128];
        assert!(g.spectral_derivative(&c, 1).iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn second_derivative_of_sine() {
        // roundoff grows like ξ_max², so keep the grid coarse
        let g = Grid1D::new(7.0, 64).unwrap();
        let q = 2.0 * PI / 7.0;
        let f: Vec<f64> = g.points().iter().map(|x| (q * x).sin()).collect();
        let d2 = g.spectral_derivative(&f, 2);
        for (x, d) in g.points().iter().zip(&d2) {
            assert!((d + q * q * (q * x).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval_and_monotonicity() {
        let g = Grid1D::new(10.0, 64).unwrap();
        let f: Vec<f64> = g
            .points()
            .iter()
            .map(|x| (-(x - 5.0).powi(2)).exp() + 0.1 * (3.0 * x).cos())
            .collect();
        let l2 = (f.iter().map(|v| v * v).sum::<f64>() * g.spacing()).sqrt();
        assert!((g.sobolev_norm(&f, 0.0) - l2).abs() < 1e-12 * l2);
        let mut prev = 0.0;
        for s in [0.0, 0.5, 1.0, 2.0, 3.5] {
            let v = g.sobolev_norm(&f, s);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn gaussian_h1_norm() {
        // f = exp(−(x−c)²/(2w²)): ‖f‖₁² = √π w + √π/(2w)
        let g = Grid1D::new(200.0, 4096).unwrap();
        let w = 3.0;
        let f: Vec<f64> = g
            .points()
            .iter()
            .map(|x| (-0.5 * ((x - 100.0) / w).powi(2)).exp())
            .collect();
        let exact = (PI.sqrt() * w + PI.sqrt() / (2.0 * w)).sqrt();
        assert!((g.sobolev_norm(&f, 1.0) - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn dealias_mask_keeps_lower_two_thirds() {
        let g = Grid1D::new(1.0, 128).unwrap();
        let m = g.dealias_mask();
        let kept = m.iter().filter(|b| **b).count();
        assert_eq!(kept, g.len() / 3 + 1);
    }
}
