//! `monoproj`: monotone regression by projection, from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monoproj::grid::Interval;
use monoproj::simbench::MeanFunctionId;
use monoproj::SmootherSpec;

use config::{parse_domain, parse_smoother, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl From<monoproj::Error> for CliError {
    fn from(e: monoproj::Error) -> Self {
        match e {
            monoproj::Error::Numerical(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Catalog {
    #[value(name = "1d")]
    OneD,
    #[value(name = "2d")]
    TwoD,
    #[value(name = "3d")]
    ThreeD,
}

impl Catalog {
    pub fn dim(self) -> usize {
        match self {
            Catalog::OneD => 1,
            Catalog::TwoD => 2,
            Catalog::ThreeD => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Catalog::OneD => "1d",
            Catalog::TwoD => "2d",
            Catalog::ThreeD => "3d",
        }
    }
}

/// Monotone regression with one to three predictors: smooth, then project
/// onto the coordinatewise non-decreasing functions.
///
/// Exit status: 0 success, 2 input error, 3 numerical failure, 4 projection
/// did not converge (outputs are still written).
#[derive(Debug, Parser)]
#[command(name = "monoproj", version)]
struct Cli {
    /// Random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid nodes per axis (default 101, 51 or 21 for 1, 2 or 3 predictors).
    #[arg(long, global = true)]
    grid_nodes: Option<usize>,
    /// Absolute projection tolerance (default 1e-8 times the input range, at least 16 ulps of its magnitude).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sweep limit of the multi-predictor projection.
    #[arg(long, global = true)]
    max_sweeps: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// JSON run configuration; flags given explicitly take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SmootherArg {
    /// Initial smoother, as JSON or shorthand, e.g.
    /// `kernel,family=gaussian,h=0.5,degree=1` or `spline,knots=20,lambda=0.99`.
    #[arg(long, value_parser = parse_smoother)]
    smoother: Option<SmootherSpec>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Dataset CSV with columns x1[,x2[,x3]],y.
    input: PathBuf,
    /// Predictor domain `lo:hi[,lo:hi…]` (default: bounding box of the data).
    #[arg(long, value_parser = parse_domain)]
    domain: Option<Vec<Interval>>,
    #[command(flatten)]
    smoother: SmootherArg,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a smoother and project it; writes raw_fit.csv, projected_fit.csv, fit.json.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        /// Fit a non-increasing function instead.
        #[arg(long)]
        decreasing: bool,
    },
    /// Project a grid function CSV; writes projected.csv, projection.json.
    Project {
        /// Grid function CSV with columns x1[,x2[,x3]],value.
        input: PathBuf,
        /// Project onto non-increasing functions instead.
        #[arg(long)]
        decreasing: bool,
    },
    /// Residual bootstrap percentile bands; writes bands.csv, bootstrap.json.
    Bootstrap {
        #[command(flatten)]
        data: DataArgs,
        /// Bootstrap replicates [default: 2000].
        #[arg(long)]
        replicates: Option<usize>,
        /// Pointwise confidence level [default: 0.95].
        #[arg(long)]
        level: Option<f64>,
    },
    /// RMSE study over mean functions and noise levels; writes a tidy CSV.
    Simulate {
        #[arg(long, value_enum, default_value = "1d")]
        catalog: Catalog,
        /// Comma-separated mean functions [default: the whole catalog].
        #[arg(long, value_delimiter = ',')]
        functions: Option<Vec<MeanFunctionId>>,
        /// Comma-separated noise levels [default: 0, 0.1, …, 1.3].
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
        /// Monte Carlo replicates per cell [default: 50].
        #[arg(long)]
        replicates: Option<usize>,
        /// Sample size.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[command(flatten)]
        smoother: SmootherArg,
        /// Output CSV [default: <out-dir>/rmse_<catalog>.csv].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pointwise coverage of the bootstrap bands; writes a tidy CSV.
    Coverage {
        #[arg(long, value_enum, default_value = "1d")]
        catalog: Catalog,
        /// Comma-separated mean functions [default: F12,F16 or F21,F26].
        #[arg(long, value_delimiter = ',')]
        functions: Option<Vec<MeanFunctionId>>,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Outer Monte Carlo replicates [default: 2000].
        #[arg(long)]
        replicates: Option<usize>,
        /// Bootstrap replicates per outer replicate [default: 2000].
        #[arg(long)]
        bootstrap_replicates: Option<usize>,
        /// Pointwise confidence level [default: 0.95].
        #[arg(long)]
        level: Option<f64>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[command(flatten)]
        smoother: SmootherArg,
        /// Output CSV [default: <out-dir>/coverage_<catalog>.csv].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analysis of the bundled DDT × TiO₂ micronucleus table; writes
    /// toxicology_surface.csv, toxicology_observations.csv, toxicology.json.
    Toxicology {
        /// Bootstrap replicates [default: 2000].
        #[arg(long)]
        replicates: Option<usize>,
        /// Pointwise confidence level [default: 0.95].
        #[arg(long)]
        level: Option<f64>,
        #[command(flatten)]
        smoother: SmootherArg,
    },
}

fn run(cli: Cli) -> commands::Outcome {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut flags = RunConfig {
        seed: cli.seed,
        grid_nodes: cli.grid_nodes,
        tol: cli.tol,
        max_sweeps: cli.max_sweeps,
        out_dir: cli.out_dir,
        ..RunConfig::default()
    };
    match cli.command {
        Command::Fit { data, decreasing } => {
            flags.smoother = data.smoother.smoother;
            commands::fit(
                &data.input,
                data.domain,
                decreasing,
                &file.overridden_by(flags),
            )
        }
        Command::Project { input, decreasing } => {
            commands::project_grid(&input, decreasing, &file.overridden_by(flags))
        }
        Command::Bootstrap {
            data,
            replicates,
            level,
        } => {
            flags.smoother = data.smoother.smoother;
            flags.replicates = replicates;
            flags.level = level;
            commands::bootstrap(&data.input, data.domain, &file.overridden_by(flags))
        }
        Command::Simulate {
            catalog,
            functions,
            sigmas,
            replicates,
            n,
            smoother,
            out,
        } => {
            flags.smoother = smoother.smoother;
            flags.replicates = replicates;
            let args = commands::SimulateArgs {
                catalog,
                functions,
                sigmas,
                n,
                out,
            };
            commands::simulate(args, &file.overridden_by(flags))
        }
        Command::Coverage {
            catalog,
            functions,
            sigma,
            replicates,
            bootstrap_replicates,
            level,
            n,
            smoother,
            out,
        } => {
            flags.smoother = smoother.smoother;
            flags.replicates = replicates;
            flags.bootstrap_replicates = bootstrap_replicates;
            flags.level = level;
            let args = commands::CoverageArgs {
                catalog,
                functions,
                sigma,
                n,
                out,
            };
            commands::coverage(args, &file.overridden_by(flags))
        }
        Command::Toxicology {
            replicates,
            level,
            smoother,
        } => {
            flags.smoother = smoother.smoother;
            flags.replicates = replicates;
            flags.level = level;
            commands::toxicology(&file.overridden_by(flags))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: the projection did not converge within the sweep limit");
            ExitCode::from(4)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
