//! Initial data on the whole line given through closed-form Fourier transforms.
//!
//! The transform convention is unitary: `f̂(ξ) = (2π)^{-1/2} ∫ f(x) e^{-iξx} dx`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `exp(−x²/(2w²))`
    Gaussian { width: f64 },
    /// `sech²(x/w)`
    Sech2 { width: f64 },
    /// indicator of `|x| ≤ h`
    Box { half_width: f64 },
}

impl Shape {
    fn scale(&self) -> f64 {
        match *self {
            Shape::Gaussian { width } | Shape::Sech2 { width } => width,
            Shape::Box { half_width } => half_width,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Shape::Gaussian { width } => (-0.5 * (x / width).powi(2)).exp(),
            Shape::Sech2 { width } => (x / width).cosh().powi(-2),
            Shape::Box { half_width } => {
                if x.abs() <= half_width {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn transform(&self, xi: f64) -> f64 {
        let norm = (2.0 * PI).sqrt();
        match *self {
            Shape::Gaussian { width } => width * (-0.5 * (width * xi).powi(2)).exp(),
            Shape::Sech2 { width } => {
                let z = 0.5 * PI * width * xi;
                // z / sinh z, with its series near the origin
                let ratio = if z.abs() < 1e-4 {
                    1.0 - z * z / 6.0
                } else if z.abs() > 700.0 {
                    0.0
                } else {
                    z / z.sinh()
                };
                2.0 * width * ratio / norm
            }
            Shape::Box { half_width } => {
                let z = half_width * xi;
                let sinc = if z.abs() < 1e-4 { 1.0 - z * z / 6.0 } else { z.sin() / z };
                2.0 * half_width * sinc / norm
            }
        }
    }

    pub fn l1_norm(&self) -> f64 {
        match *self {
            Shape::Gaussian { width } => width * (2.0 * PI).sqrt(),
            Shape::Sech2 { width } => 2.0 * width,
            Shape::Box { half_width } => 2.0 * half_width,
        }
    }

    /// Frequency beyond which `(1+ξ²)^{ℓ+1}|f̂|²` is negligible; infinite for
    /// transforms with algebraic tails.
    pub fn spectral_radius(&self) -> f64 {
        match *self {
            Shape::Gaussian { width } => 12.0 / width,
            Shape::Sech2 { width } => 60.0 / (PI * width),
            Shape::Box { .. } => f64::INFINITY,
        }
    }
}

/// Initial perturbation `(ρ₀, m₀) = (a_ρ, a_m)·shape(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub shape: Shape,
    pub rho_amplitude: f64,
    pub m_amplitude: f64,
}

impl Profile {
    pub fn new(shape: Shape, rho_amplitude: f64, m_amplitude: f64) -> Result<Self> {
        if !(shape.scale() > 0.0 && shape.scale().is_finite()) {
            return domain("profile width must be positive and finite");
        }
        if !rho_amplitude.is_finite() || !m_amplitude.is_finite() {
            return domain("profile amplitudes must be finite");
        }
        Ok(Self {
            shape,
            rho_amplitude,
            m_amplitude,
        })
    }

    pub fn gaussian(width: f64, rho_amplitude: f64, m_amplitude: f64) -> Result<Self> {
        Self::new(Shape::Gaussian { width }, rho_amplitude, m_amplitude)
    }

    pub fn transform(&self, xi: f64) -> (f64, f64) {
        let s = self.shape.transform(xi);
        (self.rho_amplitude * s, self.m_amplitude * s)
    }

    /// `‖ρ₀‖_{L¹} + ‖m₀‖_{L¹}`.
    pub fn l1_norm(&self) -> f64 {
        (self.rho_amplitude.abs() + self.m_amplitude.abs()) * self.shape.l1_norm()
    }

    /// `f̂(0)` for both components.
    pub fn value_at_zero(&self) -> (f64, f64) {
        self.transform(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};

    fn numeric_transform(shape: &Shape, xi: f64, half_range: f64) -> f64 {
        let f = |x: f64| shape.value(x) * (xi * x).cos();
        let tol = Tolerance {
            abs: 1e-14,
            rel: 1e-12,
            max_intervals: 20000,
        };
        integrate(&f, -half_range, half_range, tol).value / (2.0 * PI).sqrt()
    }

    #[test]
    fn transforms_match_direct_integration() {
        for shape in [Shape::Gaussian { width: 1.3 }, Shape::Sech2 { width: 0.7 }] {
            for xi in [0.0, 0.3, 1.0, 2.5, 6.0] {
                let exact = shape.transform(xi);
                let numeric = numeric_transform(&shape, xi, 60.0);
                assert!((exact - numeric).abs() < 1e-10, "{shape:?} {xi}: {exact} vs {numeric}");
            }
        }
        let b = Shape::Box { half_width: 2.0 };
        for xi in [0.0, 0.3, 1.0, 2.5] {
            let numeric = numeric_transform(&b, xi, 2.0);
            assert!((b.transform(xi) - numeric).abs() < 1e-10);
        }
    }

    #[test]
    fn value_at_zero_is_scaled_mass() {
        for shape in [
            Shape::Gaussian { width: 2.0 },
            Shape::Sech2 { width: 2.0 },
            Shape::Box { half_width: 2.0 },
        ] {
            let p = Profile::new(shape, 1.0, 0.0).unwrap();
            assert!((p.value_at_zero().0 - shape.l1_norm() / (2.0 * PI).sqrt()).abs() < 1e-14);
        }
        assert!(Profile::gaussian(0.0, 1.0, 1.0).is_err());
    }
}
