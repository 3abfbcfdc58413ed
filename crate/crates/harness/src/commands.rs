//! Subcommand bodies. Each writes its report to `out` and returns an error
//! carrying the exit code on failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use qhd_core::linear::{decay_rate_fit, pointwise_bound_check, SemigroupEvaluator};
use qhd_core::profile::{Profile, Shape};
use qhd_core::solver::{max_stable_dt, run_simulation};
use qhd_core::symbol::{
    default_scan_grid, dispersion_roots, dissipativity_scan, epsilon_star, genuine_coupling_check, log_grid,
    quadratic_form_min_eig, theta, transport_eigenvalues, Verdict,
};
use qhd_core::{EquilibriumState, ModelParams, QhdError};

use crate::acceptance::{self, format_table, Options};
use crate::cli::{
    AcceptArgs, CheckArgs, EquilibriumArgs, LinearDecayArgs, ProfileKind, SimulateArgs, Spacing, SymbolArgs,
};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{history_csv, snapshot_text, write_atomic, Csv};

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(stdout_err)?
    };
}

fn stdout_err(source: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn equilibrium(args: &EquilibriumArgs) -> CliResult<EquilibriumState> {
    let params = ModelParams::new(args.gamma, args.mu, args.k)?;
    Ok(EquilibriumState::new(params, args.rho_star, args.m_star)?)
}

/// Write `body` to `path`, or to `out` when no path is given.
fn emit(out: &mut dyn Write, path: Option<&Path>, body: &str) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, body),
        None => out.write_all(body.as_bytes()).map_err(stdout_err),
    }
}

pub fn classify(args: &EquilibriumArgs, out: &mut dyn Write) -> CliResult<()> {
    let eq = equilibrium(args)?;
    say!(out, "{:?}, alpha*={}", eq.regime, eq.alpha_star);
    say!(out, "beta*={}", eq.beta_star);
    say!(out, "p'(rho*)={}", eq.p_prime_star);
    if eq.is_subsonic() {
        say!(out, "epsilon*={}", epsilon_star(&eq));
        say!(out, "theta={}", theta(&eq));
    }
    Ok(())
}

fn symbol_grid(args: &SymbolArgs) -> CliResult<Vec<f64>> {
    let (lo, hi, n) = (args.xi_min, args.xi_max, args.points);
    if !lo.is_finite() || !hi.is_finite() || lo > hi || n == 0 {
        return Err(CliError::input(format!(
            "bad wavenumber range [{lo}, {hi}] with {n} points"
        )));
    }
    match args.spacing {
        Spacing::Log => {
            if !(lo > 0.0) || lo == hi {
                return Err(CliError::input("log spacing needs 0 < xi-min < xi-max"));
            }
            Ok(log_grid(lo, hi, n))
        }
        Spacing::Linear => {
            if n == 1 {
                if lo != hi {
                    return Err(CliError::input("a single point needs xi-min == xi-max"));
                }
                return Ok(vec![lo]);
            }
            Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
        }
    }
}

pub const SYMBOL_HEADER: [&str; 8] = [
    "xi",
    "alpha",
    "re_lambda_plus",
    "im_lambda_plus",
    "re_lambda_minus",
    "im_lambda_minus",
    "min_eig_quadform",
    "ratio_re_lambda_over_xi2",
];

pub fn symbol(args: &SymbolArgs, out: &mut dyn Write) -> CliResult<()> {
    let eq = equilibrium(&args.eq)?;
    let grid = symbol_grid(args)?;
    let mut csv = Csv::new(&SYMBOL_HEADER);
    for &xi in &grid {
        let r = dispersion_roots(&eq, xi);
        // undefined off the subsonic regime and at ξ = 0
        let min_eig = if eq.is_subsonic() {
            match quadratic_form_min_eig(&eq, xi) {
                Ok(v) => v,
                Err(QhdError::Constants(_)) => f64::NAN,
                Err(e) => return Err(e.into()),
            }
        } else {
            f64::NAN
        };
        let ratio = if xi == 0.0 { f64::NAN } else { r.max_real() / (xi * xi) };
        csv.row(&[
            xi,
            qhd_core::symbol::alpha(&eq, xi),
            r.plus.re,
            r.plus.im,
            r.minus.re,
            r.minus.im,
            min_eig,
            ratio,
        ]);
    }
    emit(out, args.out.as_deref(), csv.as_str())
}

pub fn check(args: &CheckArgs, out: &mut dyn Write) -> CliResult<()> {
    let eq = equilibrium(&args.eq)?;
    say!(out, "regime: {:?}", eq.regime);

    let scan = dissipativity_scan(&eq, &default_scan_grid())?;
    match scan.verdict {
        Verdict::StrictlyDissipative => say!(
            out,
            "dissipativity: strict, omega0={}, max Re lambda={:e}",
            scan.omega0_estimate.unwrap_or(f64::NAN),
            scan.max_real_part
        ),
        Verdict::UnstableModesFound => {
            let w = scan
                .unstable_window
                .map_or_else(|| "unknown".to_string(), |(a, b)| format!("[{a}, {b}]"));
            say!(out, "dissipativity: unstable modes, |xi| window {w}");
        }
    }

    let (nu_minus, nu_plus) = transport_eigenvalues(&eq, 1.0)?;
    let coupled = genuine_coupling_check(&eq, 1.0)?;
    say!(
        out,
        "coupling: transport speeds at xi=1 ({nu_minus}, {nu_plus}), genuinely coupled: {coupled}"
    );

    if !eq.is_subsonic() {
        say!(out, "compensator: not defined for a non-subsonic state");
        return Ok(());
    }
    let mut worst = f64::INFINITY;
    for xi in default_scan_grid() {
        worst = worst.min(quadratic_form_min_eig(&eq, xi)?);
    }
    say!(out, "compensator: min eigenvalue {worst} >= theta={}", theta(&eq));

    if args.trials > 0 {
        let t_grid: Vec<f64> = (0..=500).map(|j| 0.1 * j as f64).collect();
        let rep = pointwise_bound_check(&eq, &default_scan_grid(), &t_grid, args.trials, args.seed)?;
        say!(out, "{}", rep.to_text());
    }
    Ok(())
}

fn profile(args: &LinearDecayArgs) -> CliResult<Profile> {
    let shape = match args.profile {
        ProfileKind::Gaussian => Shape::Gaussian { width: args.width },
        ProfileKind::Sech2 => Shape::Sech2 { width: args.width },
        ProfileKind::Box => Shape::Box { half_width: args.width },
    };
    Ok(Profile::new(shape, args.rho_amplitude, args.m_amplitude)?)
}

pub fn linear_decay(args: &LinearDecayArgs, out: &mut dyn Write) -> CliResult<()> {
    let eq = equilibrium(&args.eq)?;
    let profile = profile(args)?;
    if args.ells.is_empty() || args.ells.iter().any(|&l| l > 2) {
        return Err(CliError::input("ell must be 0, 1 or 2"));
    }
    if !(args.t_min > 0.0 && args.t_min <= args.t_max) || args.points == 0 {
        return Err(CliError::input(
            "time grid needs 0 < t-min <= t-max and at least one point",
        ));
    }
    let times: Vec<f64> = if args.points == 1 {
        vec![args.t_min]
    } else {
        let r = args.t_max / args.t_min;
        (0..args.points)
            .map(|i| args.t_min * r.powf(i as f64 / (args.points - 1) as f64))
            .collect()
    };

    let ev = SemigroupEvaluator::new(&eq)?;
    let (f_rho, f_m) = profile.value_at_zero();
    say!(out, "f_hat(0) = ({f_rho}, {f_m}), omega0={}", ev.omega0());

    let mut curves = Vec::new();
    let mut fits = Vec::new();
    for &ell in &args.ells {
        let values = times
            .iter()
            .map(|&t| ev.norms(&profile, t, ell).map(|(a, b)| a.hypot(b)))
            .collect::<Result<Vec<_>, _>>()?;
        let fit = decay_rate_fit(&times, &values, (args.fit_min, args.fit_max))?;
        say!(
            out,
            "ell={ell}: exponent={} (predicted {}), residual={:e}",
            fit.exponent,
            0.5 * ell as f64 + 0.25,
            fit.residual
        );
        curves.push(values);
        fits.push(fit);
    }

    if let Some(path) = &args.out {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain(args.ells.iter().map(|l| format!("norm_ell{l}")))
            .chain(args.ells.iter().map(|l| format!("fit_ell{l}")))
            .collect();
        let mut csv = Csv::new(&header);
        for (i, &t) in times.iter().enumerate() {
            let mut row = vec![t];
            row.extend(curves.iter().map(|c| c[i]));
            row.extend(fits.iter().map(|f| f.model(t)));
            csv.row(&row);
        }
        write_atomic(path, csv.as_str())?;
    }
    Ok(())
}

/// Apply command-line overrides on top of the file configuration.
fn overlay(cfg: &mut RunConfig, a: &SimulateArgs) {
    fn set<T: Copy>(slot: &mut Option<T>, v: Option<T>) {
        if v.is_some() {
            *slot = v;
        }
    }
    set(&mut cfg.seed, a.seed);
    let e = &mut cfg.equilibrium;
    set(&mut e.gamma, a.gamma);
    set(&mut e.rho_star, a.rho_star);
    set(&mut e.m_star, a.m_star);
    set(&mut e.mu, a.mu);
    set(&mut e.k, a.k);
    set(&mut cfg.grid.length, a.length);
    set(&mut cfg.grid.points, a.points);
    set(&mut cfg.time.dt, a.dt);
    set(&mut cfg.time.t_end, a.t_end);
    set(&mut cfg.time.output_stride, a.output_stride);
    set(&mut cfg.diagnostics.s, a.s);
    if a.no_dealias {
        cfg.diagnostics.dealias = Some(false);
    }
    let i = &mut cfg.initial;
    set(&mut i.rho_amplitude, a.rho_amplitude);
    set(&mut i.rho_width, a.rho_width);
    set(&mut i.rho_center, a.rho_center);
    set(&mut i.m_amplitude, a.m_amplitude);
    set(&mut i.m_width, a.m_width);
    set(&mut i.m_center, a.m_center);
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    overlay(&mut cfg, args);
    let run = cfg.resolve()?;
    let eq = run.equilibrium()?;
    if !eq.is_subsonic() && !args.allow_supersonic {
        return Err(QhdError::UnsupportedRegime {
            regime: eq.regime,
            reason: "the decay theory covers subsonic states only; pass --allow-supersonic to run anyway".into(),
        }
        .into());
    }
    let initial = run.initial_state()?;
    let dt = match run.dt {
        Some(dt) => dt,
        None => max_stable_dt(&eq, &initial)?,
    };
    let outcome = run_simulation(&eq, &initial, &run.solver_config(dt, args.allow_supersonic))?;

    // partial output is still written on abort
    write_atomic(&args.out_dir.join("history.csv"), &history_csv(&outcome.history))?;
    write_atomic(
        &args.out_dir.join("snapshot.txt"),
        &snapshot_text(&eq, &outcome.final_state, run.s),
    )?;

    let h = &outcome.history;
    let g_sup = h.g_s.iter().copied().fold(0.0, f64::max);
    let (dm, dp) = h.max_abs_defect();
    say!(out, "steps={} dt={} seed={}", outcome.steps, outcome.dt, run.seed);
    say!(out, "sup G_s={g_sup:e}");
    say!(out, "max |mass defect|={dm:e}, max |momentum defect|={dp:e}");
    if let Some(e) = outcome.abort {
        say!(out, "aborted at t={}: {e}", outcome.final_state.t);
        return Err(e.into());
    }
    Ok(())
}

pub fn accept(args: &AcceptArgs, out: &mut dyn Write) -> CliResult<()> {
    let opts = Options {
        seed: args.seed,
        filter: args.filter.map(Into::into),
        theta_factor: args.mutate_theta,
    };
    let results = acceptance::run(&opts);
    out.write_all(format_table(&results).as_bytes()).map_err(stdout_err)?;
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Acceptance {
            failed,
            total: results.len(),
        });
    }
    Ok(())
}
