use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod analyze;
mod ccdf;
mod failure;
mod input;
mod simulate;

#[derive(Parser)]
#[command(name = "entlr", version, about = "Likelihood-ratio evidence for two-qubit entanglement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute λ and confidence levels for a count file.
    Analyze(AnalyzeArgs),
    /// Simulate λ over independent trials; CSV on stdout, metadata on stderr.
    Simulate(SimulateArgs),
    /// Tabulate the empirical CCDF of λ samples against the analytic ansätze.
    Ccdf(CcdfArgs),
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Count file (JSON), or `-` for stdin.
    pub counts: PathBuf,
    /// POVM name (`witness`, `product_sic`) or a JSON file with inline effects.
    /// Overrides the POVM named in the count file.
    #[arg(long)]
    pub povm: Option<String>,
    /// Parametric-bootstrap trials at the separable optimum.
    #[arg(long, requires = "seed")]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Werner mixing weight q.
    #[arg(long, conflicts_with = "state", allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// JSON file holding a 4×4 density matrix of [re, im] pairs.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub povm: Option<String>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    /// Preset flag set reproducing a published sweep; explicit flags win.
    #[arg(long, value_enum)]
    pub recipe: Option<simulate::Recipe>,
}

#[derive(Args)]
pub struct CcdfArgs {
    /// CSV with a `lambda` column (as written by `simulate`), or `-` for stdin.
    pub samples: PathBuf,
    /// Degrees of freedom of the conservative χ² column.
    #[arg(long, default_value_t = 15)]
    pub dim_m: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => analyze::run(&args),
        Command::Simulate(args) => simulate::run(&args),
        Command::Ccdf(args) => ccdf::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => failure.report(),
    }
}
