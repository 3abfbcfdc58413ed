//! Functions of 2×2 complex matrices through their eigenvalue pair.
//!
//! For a 2×2 matrix `A` with eigenvalues `z₊, z₋` and any entire `f`,
//! `f(A) = ½(f(z₊)+f(z₋))·I + f[z₊,z₋]·(A − z̄·I)` where `z̄` is the mean
//! eigenvalue and `f[·,·]` the first divided difference. The divided difference
//! is evaluated without cancellation for close eigenvalues, so the same
//! formula covers the confluent (Jordan) case.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

pub type CMatrix2 = Matrix2<Complex64>;
pub type CVector2 = Vector2<Complex64>;

/// Relative eigenvalue gap below which the pair is treated as a double eigenvalue.
pub const CONFLUENT_GAP: f64 = 1e-8;

/// 10-point Gauss-Legendre rule mapped to `[0, 1]` (nodes, weights).
const GL10: [(f64, f64); 10] = {
    const X: [f64; 5] = [
        0.973_906_528_517_171_7,
        0.865_063_366_688_984_5,
        0.679_409_568_299_024_4,
        0.433_395_394_129_247_2,
        0.148_874_338_981_631_2,
    ];
    const W: [f64; 5] = [
        0.066_671_344_308_688_14,
        0.149_451_349_150_580_6,
        0.219_086_362_515_982,
        0.269_266_719_309_996_4,
        0.295_524_224_714_752_9,
    ];
    let mut out = [(0.0, 0.0); 10];
    let mut i = 0;
    while i < 5 {
        out[2 * i] = (0.5 * (1.0 - X[i]), 0.5 * W[i]);
        out[2 * i + 1] = (0.5 * (1.0 + X[i]), 0.5 * W[i]);
        i += 1;
    }
    out
};

/// Principal square root computed without the polar-form cancellation of
/// `num_complex`, accurate when the argument sits near the negative real axis.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    if a == 0.0 && b == 0.0 {
        return Complex64::new(0.0, b);
    }
    let t = ((a.abs() + a.hypot(b)) / 2.0).sqrt();
    if a >= 0.0 {
        Complex64::new(t, b / (2.0 * t))
    } else {
        Complex64::new(b.abs() / (2.0 * t), t.copysign(b))
    }
}

/// Coefficients `(f0, f1)` with `f(A) = f0·I + f1·(A − z̄·I)`.
pub fn pair_coefficients<F, D>(zp: Complex64, zm: Complex64, f: F, df: D) -> (Complex64, Complex64)
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    let gap = zp - zm;
    let scale = zp.norm().max(zm.norm()).max(1.0);
    if gap.norm() <= CONFLUENT_GAP * scale {
        let mean = 0.5 * (zp + zm);
        return (f(mean), df(mean));
    }
    let (fp, fm) = (f(zp), f(zm));
    let f0 = 0.5 * (fp + fm);
    let f1 = if gap.norm() < 1.0 {
        // mean-value form of the divided difference
        GL10.iter().map(|&(s, w)| w * df(zm + s * gap)).sum()
    } else {
        (fp - fm) / gap
    };
    (f0, f1)
}

/// Assemble `f0·I + f1·(A − z̄·I)`.
pub fn assemble(a: &CMatrix2, zp: Complex64, zm: Complex64, f0: Complex64, f1: Complex64) -> CMatrix2 {
    let mean = 0.5 * (zp + zm);
    let shifted = a - CMatrix2::identity() * mean;
    CMatrix2::identity() * f0 + shifted * f1
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `φ_k(z) = Σ_j z^j/(j+k)!`; `φ_0 = exp`.
pub fn phi(k: usize, z: Complex64) -> Complex64 {
    if z.norm() < 1.0 {
        let mut term = Complex64::new(1.0 / factorial(k), 0.0);
        let mut sum = term;
        for j in 1..40 {
            term = term * z / (j + k) as f64;
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        let mut value = z.exp();
        for j in 0..k {
            value = (value - 1.0 / factorial(j)) / z;
        }
        value
    }
}

/// `φ_k'(z) = φ_k(z) − k·φ_{k+1}(z)`.
pub fn phi_derivative(k: usize, z: Complex64) -> Complex64 {
    phi(k, z) - k as f64 * phi(k + 1, z)
}
