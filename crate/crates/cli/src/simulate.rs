use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;

use entlr::montecarlo::{splitmix64, PRNG_ID};
use entlr::schema::{matrix_to_json, named_povm, MatrixJson};
use entlr::{run_trials, OptimizerOptions, StateSpec, TrialConfig, WernerParam};

use crate::analyze::{Tool, TOOL};
use crate::failure::{CliResult, Failure};
use crate::input::{povm_from_flag, state_from_file};
use crate::SimulateArgs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    /// λ against N for one Werner state: product SIC, 1000 trials at each of
    /// N = 10 .. 10^6 (six points per decade). Needs --q or --state.
    Fig2,
    /// λ distribution at the boundary state: q = 1/3, product SIC,
    /// N = 10^6, 10^4 trials.
    Fig3,
}

pub const CSV_HEADER: &str = "trial,N,lambda,converged";

/// N = round(10^(1 + k/6)) for k = 0..=30.
pub fn fig2_grid() -> Vec<u64> {
    let mut grid: Vec<u64> = (0..=30).map(|k| 10f64.powf(1.0 + k as f64 / 6.0).round() as u64).collect();
    grid.dedup();
    grid
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum StateMeta {
    WernerQ(f64),
    Inline(MatrixJson),
}

#[derive(Serialize)]
struct RunMeta {
    n: u64,
    trials: usize,
    seed: u64,
    unconverged: usize,
}

#[derive(Serialize)]
struct Metadata {
    tool: Tool,
    prng: &'static str,
    recipe: Option<Recipe>,
    state: StateMeta,
    povm: String,
    master_seed: u64,
    runs: Vec<RunMeta>,
}

struct Plan {
    state: StateSpec,
    povm: String,
    /// (N, trials, seed) per run.
    runs: Vec<(u64, usize, u64)>,
}

fn plan(args: &SimulateArgs) -> CliResult<Plan> {
    let recipe_q = match args.recipe {
        Some(Recipe::Fig3) => Some(1.0 / 3.0),
        _ => None,
    };
    let state = match (&args.state, args.q.or(recipe_q)) {
        (Some(path), _) => StateSpec::Inline(state_from_file(path)?),
        (None, Some(q)) => StateSpec::Werner(WernerParam::new(q).map_err(Failure::usage)?),
        (None, None) => return Err(Failure::usage("a state is required: --q or --state")),
    };
    let povm = match (&args.povm, args.recipe) {
        (Some(p), _) => p.clone(),
        (None, Some(_)) => "product_sic".to_string(),
        (None, None) => return Err(Failure::usage("--povm is required")),
    };
    let (ns, trials) = match args.recipe {
        Some(Recipe::Fig2) => (args.n.map_or_else(fig2_grid, |n| vec![n]), args.trials.unwrap_or(1000)),
        Some(Recipe::Fig3) => (vec![args.n.unwrap_or(1_000_000)], args.trials.unwrap_or(10_000)),
        None => {
            let n = args.n.ok_or_else(|| Failure::usage("--n is required"))?;
            let t = args.trials.ok_or_else(|| Failure::usage("--trials is required"))?;
            (vec![n], t)
        }
    };
    // One run uses the master seed as is; sweeps give each N its own stream.
    let runs = if ns.len() == 1 {
        vec![(ns[0], trials, args.seed)]
    } else {
        ns.iter().map(|&n| (n, trials, splitmix64(args.seed ^ n))).collect()
    };
    Ok(Plan { state, povm, runs })
}

pub fn run(args: &SimulateArgs) -> CliResult {
    let plan = plan(args)?;
    let povm = match named_povm(&plan.povm) {
        Ok(p) => p,
        Err(_) => povm_from_flag(&plan.povm)?,
    };
    let opts = OptimizerOptions::default();
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    writeln!(out, "{CSV_HEADER}")?;
    let mut runs = Vec::new();
    for &(n, trials, seed) in &plan.runs {
        let config = TrialConfig::new(plan.state.clone(), povm.clone(), n, trials, seed).map_err(Failure::usage)?;
        let outcomes = run_trials(&config, &opts)?;
        for o in &outcomes {
            writeln!(out, "{},{},{},{}", o.trial, n, o.lambda, o.converged)?;
        }
        runs.push(RunMeta { n, trials, seed, unconverged: outcomes.iter().filter(|o| !o.converged).count() });
    }
    out.flush()?;

    let meta = Metadata {
        tool: TOOL,
        prng: PRNG_ID,
        recipe: args.recipe,
        state: match &plan.state {
            StateSpec::Werner(q) => StateMeta::WernerQ(q.value()),
            StateSpec::Inline(rho) => StateMeta::Inline(matrix_to_json(rho.mat())),
        },
        povm: plan.povm,
        master_seed: args.seed,
        runs,
    };
    eprintln!("{}", serde_json::to_string(&meta).map_err(Failure::data)?);
    Ok(())
}
