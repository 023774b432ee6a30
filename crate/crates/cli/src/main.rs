use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use nonoether_cli::runner::{
    cmd_catalog, cmd_check, cmd_integrate, cmd_invariants, CheckArgs, Format, IntegrateArgs,
    InvariantsArgs, Outcome,
};

/// Conserved-quantity families from non-Noether symmetries: build the
/// recursion operator of a Hamiltonian system, extract its invariant
/// family, and gate the structural identities numerically.
#[derive(Parser)]
#[command(name = "nonoether", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in systems
    Catalog,
    /// Run every structural gate on a system and report pass/fail
    Check {
        /// Built-in system name or path to a .toml/.json system file
        #[arg(long)]
        system: String,
        /// Sample size drawn from the domain box
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Seed for the point sample; same seed, same report
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Highest trace order (default 2n)
        #[arg(long)]
        k_max: Option<usize>,
        /// Multiply every tolerance, for exploring marginal systems
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Report format
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Directory to write the report into instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the invariant family at chosen or sampled points
    Invariants {
        /// Built-in system name or path to a .toml/.json system file
        #[arg(long)]
        system: String,
        /// Comma-separated coordinates of one point (overrides sampling)
        #[arg(long)]
        at: Option<String>,
        /// Number of sampled points when --at is not given
        #[arg(long, default_value_t = 1)]
        points: usize,
        /// Seed for the point sample
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Highest trace order (default 2n)
        #[arg(long)]
        k_max: Option<usize>,
        /// Report format
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Directory to write the report into instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the flow and report invariant drift along it
    Integrate {
        /// Built-in system name or path to a .toml/.json system file
        #[arg(long)]
        system: String,
        /// Comma-separated start coordinates (default: domain box center)
        #[arg(long)]
        from: Option<String>,
        /// Time step
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Number of steps
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Record every Nth state
        #[arg(long, default_value_t = 10)]
        stride: usize,
        /// Highest trace order tracked (default 2n)
        #[arg(long)]
        k_max: Option<usize>,
        /// Report format; csv emits the recorded time series itself
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Directory to write report and time series into instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let mut stdout = std::io::stdout().lock();
    let outcome = match cli.command {
        Command::Catalog => cmd_catalog(&mut stdout),
        Command::Check { system, points, seed, k_max, tol_scale, format, out } => cmd_check(
            &CheckArgs { system, points, seed, k_max, tol_scale, format: format.into(), out },
            &mut stdout,
        ),
        Command::Invariants { system, at, points, seed, k_max, format, out } => cmd_invariants(
            &InvariantsArgs { system, at, points, seed, k_max, format: format.into(), out },
            &mut stdout,
        ),
        Command::Integrate { system, from, dt, steps, stride, k_max, format, out } => {
            cmd_integrate(
                &IntegrateArgs {
                    system,
                    from,
                    dt,
                    steps,
                    stride,
                    k_max,
                    format: format.into(),
                    out,
                },
                &mut stdout,
            )
        }
    };

    match outcome {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::GateFailure) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
