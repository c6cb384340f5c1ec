use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kelvin_core::report::Format;
use kelvin_core::suites::{run_suite, Suite, SuiteConfig};
use kelvin_core::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "padic-kelvin", version, about = "Exact and numeric checks for the p-adic Vladimirov-Taibleson operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite.
    Verify {
        /// kelvin, chain, inverse, reduction, oracle, fourier, eigen, harmonic or arithmetic
        suite: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Construct the character eigenfunction and check its eigenrelation.
    Eigen {
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long, default_value_t = 2)]
    p: u32,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Repeatable; suite defaults when absent.
    #[arg(long = "alpha")]
    alphas: Vec<f64>,
    #[arg(long, default_value_t = kelvin_core::padic::DEFAULT_PRECISION)]
    precision: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// json, csv or text
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the shell-sum cross-checks of exact results.
    #[arg(long)]
    no_oracle: bool,
}

fn run(suite: &str, opts: &Opts) -> Result<bool, (u8, String)> {
    let usage = |e: Error| (EXIT_USAGE, e.to_string());
    let suite: Suite = suite.parse().map_err(usage)?;
    let format: Format = opts.format.parse().map_err(usage)?;
    let cfg = SuiteConfig {
        p: opts.p,
        n: opts.n,
        alphas: opts.alphas.clone(),
        precision: opts.precision,
        seed: opts.seed,
        oracle: !opts.no_oracle,
    };
    cfg.validate(suite).map_err(usage)?;
    let report = run_suite(suite, &cfg).map_err(|e| match e {
        Error::Resource(_) => (EXIT_RESOURCE, e.to_string()),
        _ => (EXIT_FAIL, e.to_string()),
    })?;
    let text = report.render(format).map_err(|e| (EXIT_FAIL, e.to_string()))?;
    match &opts.out {
        Some(path) => std::fs::write(path, text).map_err(|e| (EXIT_FAIL, format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { suite, opts } => run(suite, opts),
        Command::Eigen { opts } => run("eigen", opts),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
