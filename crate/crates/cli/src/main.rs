mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

/// Spectra of the branched isochronous Emden Hamiltonians, their classical
/// flows, and the exact Chiellini check.
///
/// Energies are in units of the oscillator frequency `omega` (hbar = 1).
#[derive(Debug, Parser)]
#[command(name = "qhspec", version)]
struct Cli {
    /// JSON object of long flag names for the chosen subcommand; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Log verbosity (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest levels from the finite-difference eigensolver.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Spectrum(SpectrumArgs),
    /// Lowest levels at eps = 1/4 from zeros of the parabolic cylinder function.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Quantize(QuantizeArgs),
    /// First-order corrected energies for both branches.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Perturb(PerturbArgs),
    /// Integrates the Emden oscillator and reports detected periods.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Classical(ClassicalArgs),
    /// Checks the Chiellini condition for f(x) against its isochronous g(x).
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Polycheck(PolycheckArgs),
    /// Writes one finite-difference eigenfunction as CSV (xi,phi).
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Eigenfunction(EigenfunctionArgs),
    /// Reproduces a stored reference table and reports the deviation.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Oscillator frequency omega, > 0 [1/time].
    #[arg(long, default_value_t = 10.0)]
    pub omega: f64,
    /// Nonlinearity k, >= 0 [1/(length*time)].
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Ordering parameter eps > 0 [dimensionless].
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    /// Sign of the displacement xi0 in the potential.
    #[arg(long, value_enum, default_value_t = BranchArg::Both)]
    pub branch: BranchArg,
    /// Number of levels, 1..=20.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Grid intervals on [0, xi_max]; default 4000 [points].
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Right end of the box [xi, length units]; chosen from the spectrum when omitted.
    #[arg(long)]
    pub xi_max: Option<f64>,
    /// Richardson extrapolation over N and 2N grids.
    #[arg(long, default_value_t = true, action = ArgAction::Set, value_name = "BOOL")]
    pub richardson: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sign of the displacement xi0 in the potential.
    #[arg(long, value_enum, default_value_t = BranchArg::Both)]
    pub branch: BranchArg,
    /// Number of levels.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Sign-change scan step in mu [dimensionless].
    #[arg(long, default_value_t = 0.25)]
    pub scan_step: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Ordering parameter eps > 0 [dimensionless].
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    /// Number of levels.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Initial displacements x0 with v0 = 0, comma separated [length].
    #[arg(long, value_delimiter = ',', num_args = 1.., action = ArgAction::Set, default_value = "0.1,1,5")]
    pub amplitudes: Vec<f64>,
    /// Integration time in units of 2 pi / omega [periods].
    #[arg(long, default_value_t = 3.0)]
    pub periods: f64,
    /// RK4 steps per period, >= 200 [steps].
    #[arg(long, default_value_t = 2000)]
    pub steps_per_period: usize,
    /// Write the Emden trajectory of the first amplitude as CSV (t,x,v).
    #[arg(long, value_name = "FILE")]
    pub trajectory: Option<PathBuf>,
    /// Write the branched-Hamiltonian trajectory of the first amplitude as CSV (t,x,p,H).
    #[arg(long, value_name = "FILE")]
    pub hamiltonian: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PolycheckArgs {
    /// Damping polynomial f(x), e.g. "k*x" or "x + 1/2*x^2".
    pub poly: String,
    /// Parameter binding NAME=VALUE with a rational value; repeatable.
    #[arg(long, value_name = "NAME=VALUE")]
    pub param: Vec<String>,
    /// omega^2 as a rational [1/time^2].
    #[arg(long, default_value = "100")]
    pub omega_sq: String,
    /// Also scan all polynomials up to this degree (<= 6) with coefficients from --samples.
    #[arg(long)]
    pub scan_degree: Option<usize>,
    /// Coefficient sample set for --scan-degree, comma separated rationals.
    #[arg(long, value_delimiter = ',', num_args = 1.., action = ArgAction::Set, default_value = "-1,0,1,2")]
    pub samples: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EigenfunctionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Ordering parameter eps > 0 [dimensionless].
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    /// Sign of the displacement xi0 (plus or minus).
    #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
    pub branch: BranchArg,
    /// Level index n [nodes].
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    /// Grid intervals on [0, xi_max] [points].
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Right end of the box [xi, length units].
    #[arg(long)]
    pub xi_max: Option<f64>,
    /// Write to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Table id: 1 (FD, eps = 1/4), 2 (FD, eps = 1/2), 3 (first order, eps = 1/2).
    #[arg(value_parser = clap::value_parser!(u32).range(1..=3))]
    pub which: u32,
    /// Output format (table or json).
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum(a) => commands::spectrum(&a),
        Command::Quantize(a) => commands::quantize(&a),
        Command::Perturb(a) => commands::perturb(&a),
        Command::Classical(a) => commands::classical(&a),
        Command::Polycheck(a) => commands::polycheck(&a),
        Command::Eigenfunction(a) => commands::eigenfunction(&a),
        Command::Table(a) => commands::table(&a),
    }
}

fn main() -> ExitCode {
    let args = match config::inject_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
