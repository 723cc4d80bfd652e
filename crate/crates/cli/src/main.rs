mod commands;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::report::{emit, Format};

#[derive(Debug, Parser)]
#[command(name = "lattika", version, about = "Arithmetic invariants of Euclidean lattices")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Numerical tolerance (each command has its own default)
    #[arg(long, global = true, value_parser = positive_f64)]
    pub tol: Option<f64>,
    /// Lattice point budget; overrides LATTIKA_BUDGET
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: Option<u64>,
    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank, determinant, degree, h0_Ar and minimum of a lattice
    Invariants {
        #[arg(long)]
        lattice: PathBuf,
    },
    /// Lattice points in a closed ball
    Enumerate {
        #[arg(long)]
        lattice: PathBuf,
        /// Squared radius as an integer or a fraction a/b
        #[arg(long)]
        radius_sq: String,
        /// Include the vectors themselves
        #[arg(long)]
        list: bool,
    },
    /// Theta series with a certified tail
    Theta {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long, value_parser = positive_f64)]
        t: f64,
        #[arg(long, value_parser = positive_f64, default_value_t = 1e-12)]
        eps: f64,
    },
    /// h0_theta(L) - h0_theta(L dual) - deg(L)
    RrCheck {
        #[arg(long)]
        lattice: PathBuf,
    },
    /// Both sides of Poisson summation for the smeared ball indicator
    Poisson {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long, value_parser = positive_f64)]
        t: f64,
        #[arg(long, value_parser = positive_f64)]
        r: f64,
    },
    /// Poisson check over a grid of t values
    Uncertainty {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long, value_parser = positive_f64, default_value_t = 1.0)]
        r: f64,
        /// Comma-separated t values
        #[arg(long, value_delimiter = ',', required = true)]
        t_grid: Vec<f64>,
    },
    /// Arakelov divisors on Spec Z
    #[command(subcommand)]
    Arakelov(ArakelovCommand),
    /// Mellin transform identity for effectivity functions
    #[command(subcommand)]
    Mellin(MellinCommand),
    /// The modular discriminant and its L-function
    #[command(subcommand)]
    Delta(DeltaCommand),
    /// Partition a family of integral forms into isometry classes
    Classify {
        #[arg(long)]
        forms: PathBuf,
        /// Backtracking node cap per pair
        #[arg(long, default_value_t = lattika::genus::DEFAULT_NODE_CAP)]
        node_cap: u64,
    },
    /// Partial genus comparison for pairs of forms
    Genus {
        #[arg(long)]
        forms: PathBuf,
        /// `all`, or pairs like 0:1,2:3
        #[arg(long, default_value = "all")]
        pairs: String,
    },
    /// Run the acceptance criteria
    Selftest,
}

#[derive(Debug, Subcommand)]
pub enum ArakelovCommand {
    /// h0 of the line bundle O(D)
    H0 {
        #[arg(long)]
        divisor: PathBuf,
        /// Only the theta version
        #[arg(long, conflicts_with = "ar")]
        theta: bool,
        /// Only the point-count version
        #[arg(long)]
        ar: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TestFn {
    Gs,
    Symexp,
    Delta,
}

#[derive(Debug, Subcommand)]
pub enum MellinCommand {
    /// Compare M(f)(s) with the divisor integral
    Verify {
        #[arg(long, value_enum)]
        f: TestFn,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DeltaCommand {
    /// Ramanujan tau(1..=n)
    Tau {
        #[arg(long)]
        n: usize,
    },
    /// L(s, Delta)
    Lfunction {
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
    },
    /// L(s, Delta) against the divisor integral of Delta(ix)
    Verify {
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
    },
}

/// Print the help of the subcommand named in `args`, if any.
fn print_subcommand_help(args: &[String]) {
    let mut cmd = Cli::command();
    let name = args.iter().skip(1).find(|a| !a.starts_with('-'));
    if let Some(sub) = name.and_then(|n| cmd.find_subcommand_mut(n)) {
        let _ = sub.print_help();
    } else {
        let _ = cmd.print_help();
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            eprintln!();
            print_subcommand_help(&args);
            return ExitCode::from(1);
        }
    };
    let result = commands::run(&cli).and_then(|report| {
        let text = report.render(cli.config.format)?;
        emit(&text, cli.config.out.as_deref())?;
        Ok(report.verified)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
