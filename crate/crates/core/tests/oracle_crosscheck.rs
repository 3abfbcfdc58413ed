use nalgebra::Matrix2;
use num_complex::Complex64;
use qhd_core::linear::mode_propagator;
use qhd_core::matfun::{CMatrix2, CVector2};
use qhd_core::oracle::{
    finite_difference_reference, min_eig_sampling_reference, polynomial_roots_companion, rk4_mode_reference,
    rk4_step_for,
};
use qhd_core::spectral::Grid1D;
use qhd_core::symbol::{alpha, compensated_form, dispersion_roots, generator, rescaled_odd_symbol, symmetric_min_eig};
use qhd_core::{EquilibriumState, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(rng: &mut ChaCha8Rng, subsonic_only: bool) -> EquilibriumState {
    loop {
        let gamma: f64 = rng.random_range(1.2..3.0);
        let rho: f64 = rng.random_range(0.5..2.0);
        let mu = rng.random_range(0.3..1.5);
        let k = rng.random_range(0.3..1.2);
        let c = (gamma * rho.powf(gamma - 1.0)).sqrt();
        let mach = if subsonic_only {
            rng.random_range(-0.9..0.9)
        } else {
            rng.random_range(-2.0..2.0)
        };
        let eq = EquilibriumState::new(ModelParams::new(gamma, mu, k).unwrap(), rho, mach * c * rho).unwrap();
        if eq.regime != qhd_core::Regime::Sonic {
            return eq;
        }
    }
}

#[test]
fn propagator_matches_rk4() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let eq = random_state(&mut rng, true);
        let xi = rng.random_range(-20.0..20.0);
        let t = rng.random_range(0.0..2.0);
        let dt = rk4_step_for(&eq, xi, t);
        let m = mode_propagator(&eq, xi, t).unwrap().m;
        for col in 0..2 {
            let mut e = CVector2::zeros();
            e[col] = Complex64::new(1.0, 0.0);
            let u = rk4_mode_reference(&eq, xi, &e, t, dt).unwrap();
            for row in 0..2 {
                worst = worst.max((u[row] - m[(row, col)]).norm());
            }
        }
    }
    assert!(worst <= 1e-8, "max entry error {worst}");
}

#[test]
fn dispersion_roots_match_companion_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let eq = random_state(&mut rng, false);
        let xi: f64 = rng.random_range(-50.0..50.0);
        let c1 = Complex64::new(eq.mu() * xi * xi, 2.0 * xi * eq.velocity());
        let c0 = Complex64::new(xi * xi * alpha(&eq, xi), 0.0);
        let (a, b) = polynomial_roots_companion(c0, c1);
        let r = dispersion_roots(&eq, xi);
        let scale = a.norm().max(b.norm()).max(1.0);
        assert!((a - r.plus).norm() <= 1e-10 * scale, "{xi}: {a} vs {}", r.plus);
        assert!((b - r.minus).norm() <= 1e-10 * scale);
    }
}

fn eigenvalues(m: &CMatrix2) -> (Complex64, Complex64) {
    let (tr, det) = (m.trace(), m.determinant());
    let s = (tr * tr - 4.0 * det).sqrt();
    ((tr + s) * 0.5, (tr - s) * 0.5)
}

#[test]
fn similarity_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let eq = random_state(&mut rng, true);
        let xi: f64 = rng.random_range(-50.0..50.0);
        let i = Complex64::i();
        let a_hat = rescaled_odd_symbol(&eq, xi).map(|v| Complex64::new(v, 0.0));
        let b_hat = qhd_core::symbol::even_symbol(&eq, xi).map(|v| Complex64::new(v, 0.0));
        let rescaled = -(a_hat * (i * xi) + b_hat);
        let r = dispersion_roots(&eq, xi);
        let scale = r.plus.norm().max(r.minus.norm()).max(1.0);
        for m in [generator(&eq, xi), rescaled] {
            let (p, q) = eigenvalues(&m);
            let matched =
                ((p - r.plus).norm().max((q - r.minus).norm())).min((p - r.minus).norm().max((q - r.plus).norm()));
            assert!(matched <= 1e-10 * scale);
        }
    }
}

#[test]
fn compensated_form_against_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let eq = random_state(&mut rng, true);
        for xi in [-30.0, -1.0, -0.01, 0.02, 0.7, 5.0, 100.0] {
            let m: Matrix2<f64> = compensated_form(&eq, xi).unwrap();
            assert!((min_eig_sampling_reference(&m) - symmetric_min_eig(&m)).abs() <= 1e-6);
        }
    }
}

#[test]
fn supersonic_small_xi_expansion_sign() {
    let eq = EquilibriumState::new(ModelParams::new(2.0, 1.0, 1.0).unwrap(), 1.0, 2.0).unwrap();
    for xi in [1e-3f64, 1e-2] {
        let (mu, u) = (eq.mu(), eq.velocity());
        let a = xi * xi * (xi * xi * (mu * mu - 2.0) - 4.0 * eq.p_prime_star);
        let b = 4.0 * mu * xi.powi(3) * u;
        let expansion = a + a.hypot(b) - 2.0 * mu * mu * xi.powi(4);
        assert!(expansion > 0.0);
        assert!(dispersion_roots(&eq, xi).plus.re > 0.0);
    }
}

#[test]
fn spectral_derivative_against_stencils() {
    let l = 2.0 * std::f64::consts::PI;
    let field = |x: f64| (x.sin() + 0.5 * (2.0 * x).cos()).exp();
    let mut errors = Vec::new();
    for n in [64usize, 128] {
        let g = Grid1D::new(l, n).unwrap();
        let f: Vec<f64> = g.points().iter().map(|&x| field(x)).collect();
        let sp = g.spectral_derivative(&f, 1);
        let fd = finite_difference_reference(&f, 1, g.spacing()).unwrap();
        errors.push(sp.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    // the spectral derivative is exact to roundoff here, so the gap is the stencil error
    let slope = (errors[0] / errors[1]).log2();
    assert!((slope - 4.0).abs() < 0.3, "slope {slope}");
}
