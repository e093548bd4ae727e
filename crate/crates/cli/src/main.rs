use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lbmfd_cli::{render_json, render_latex, render_text, run, Command, Reference};

/// Reduce lattice Boltzmann schemes to finite difference schemes and derive
/// their macroscopic equations.
#[derive(Parser)]
#[command(name = "lbmfd", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// Scheme description (TOML).
    scheme: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the full report as JSON to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Latex,
}

#[derive(Clone, Copy, ValueEnum)]
enum RefArg {
    /// Damped wave solving the second-order equation.
    Pde2,
    /// Pure transport at the first-order speed.
    Advection,
}

#[derive(Subcommand)]
enum Sub {
    /// Check a scheme description without deriving anything.
    Validate(Common),
    /// Print the equivalent finite difference scheme of every conserved moment.
    DeriveFd(Common),
    /// Macroscopic equations from the finite difference expansion.
    EquivalentEqs {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=2))]
        order: u32,
    },
    /// Macroscopic equations from the Maxwell iteration.
    Maxwell {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=2))]
        order: u32,
    },
    /// Run every structural and cross-route check.
    Check(Common),
    /// Run the scheme and its finite difference form side by side.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16)]
        cells: usize,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Use floating point instead of exact rationals.
        #[arg(long)]
        float: bool,
    },
    /// Measure the order of convergence against a reference solution.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
        grids: Vec<usize>,
        #[arg(long, value_enum, default_value_t = RefArg::Pde2)]
        reference: RefArg,
        #[arg(long, default_value_t = 1.0)]
        final_time: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, cmd) = match cli.command {
        Sub::Validate(c) => (c, Command::Validate),
        Sub::DeriveFd(c) => (c, Command::DeriveFd),
        Sub::EquivalentEqs { common, order } => (common, Command::EquivalentEqs { order }),
        Sub::Maxwell { common, order } => (common, Command::Maxwell { order }),
        Sub::Check(c) => (c, Command::Check),
        Sub::Simulate { common, cells, steps, float } => (common, Command::Simulate { cells, steps, exact: !float }),
        Sub::Convergence { common, grids, reference, final_time } => {
            let reference = match reference {
                RefArg::Pde2 => Reference::SecondOrder,
                RefArg::Advection => Reference::Advection,
            };
            (common, Command::Convergence { grids, reference, final_time })
        }
    };
    let path = common.scheme.display().to_string();
    let text = match std::fs::read_to_string(&common.scheme) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {path}: {e}");
            return ExitCode::from(1);
        }
    };
    let (report, code) = run(&cmd, &text, &path);
    let out = match common.format {
        Format::Text => render_text(&report),
        Format::Json => render_json(&report),
        Format::Latex => render_latex(&report),
    };
    print!("{out}");
    if let Some(p) = common.report {
        if let Err(e) = std::fs::write(&p, render_json(&report)) {
            eprintln!("error: cannot write {}: {e}", p.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(code as u8)
}
