use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qhd",
    version,
    about = "Decay-structure tools for viscous quantum hydrodynamics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a constant state and print its derived constants.
    Classify(EquilibriumArgs),
    /// Write dispersion data over a wavenumber grid as CSV.
    Symbol(SymbolArgs),
    /// Dissipativity, coupling and compensator checks for one state.
    Check(CheckArgs),
    /// Weighted semigroup norms on the line and their algebraic decay rate.
    LinearDecay(LinearDecayArgs),
    /// Run the nonlinear periodic solver.
    Simulate(SimulateArgs),
    /// Run the acceptance suite.
    Accept(AcceptArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EquilibriumArgs {
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub rho_star: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub m_star: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    /// log-spaced |ξ| mirrored to both signs
    Log,
    Linear,
}

#[derive(Debug, Clone, Args)]
pub struct SymbolArgs {
    #[command(flatten)]
    pub eq: EquilibriumArgs,
    #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
    pub xi_min: f64,
    #[arg(long, default_value_t = 50.0, allow_negative_numbers = true)]
    pub xi_max: f64,
    /// Points per sign for log spacing, total points for linear spacing.
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub eq: EquilibriumArgs,
    /// Monte-Carlo trials for the pointwise decay bound (0 skips it).
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = crate::config::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    Gaussian,
    Sech2,
    Box,
}

#[derive(Debug, Clone, Args)]
pub struct LinearDecayArgs {
    #[command(flatten)]
    pub eq: EquilibriumArgs,
    /// Derivative orders to evaluate (0, 1 or 2); repeatable.
    #[arg(long = "ell", default_values_t = [0u32, 1])]
    pub ells: Vec<u32>,
    #[arg(long, value_enum, default_value_t = ProfileKind::Gaussian)]
    pub profile: ProfileKind,
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub rho_amplitude: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub m_amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    #[arg(long, default_value_t = 100.0)]
    pub fit_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub fit_max: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory receiving history.csv and snapshot.txt.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub allow_supersonic: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho_star: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub m_star: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long = "length", alias = "L")]
    pub length: Option<f64>,
    #[arg(long = "points", alias = "N")]
    pub points: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub output_stride: Option<usize>,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long)]
    pub no_dealias: bool,
    #[arg(long, allow_negative_numbers = true)]
    pub rho_amplitude: Option<f64>,
    #[arg(long)]
    pub rho_width: Option<f64>,
    #[arg(long)]
    pub rho_center: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub m_amplitude: Option<f64>,
    #[arg(long)]
    pub m_width: Option<f64>,
    #[arg(long)]
    pub m_center: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupFilter {
    Symbol,
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Args)]
pub struct AcceptArgs {
    #[arg(long, value_enum)]
    pub filter: Option<GroupFilter>,
    #[arg(long, default_value_t = crate::config::DEFAULT_SEED)]
    pub seed: u64,
    /// Scales the positivity constant of the compensator check.
    #[arg(long, default_value_t = 1.0, hide = true)]
    pub mutate_theta: f64,
}
