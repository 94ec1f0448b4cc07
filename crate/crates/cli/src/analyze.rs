use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use entlr::montecarlo::PRNG_ID;
use entlr::schema::CountFile;
use entlr::{
    confidence_level, empirical_ccdf, lambda_statistic, run_trials, Ansatz, ConfidenceReport, CountData,
    OptimizerOptions, OptimizerReport, StateSpec, TrialConfig, ZERO_LAMBDA,
};

use crate::failure::{CliResult, Failure};
use crate::input::{povm_from_flag, read_bytes};
use crate::AnalyzeArgs;

#[derive(Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool { name: "entlr", version: env!("CARGO_PKG_VERSION") };

#[derive(Serialize)]
struct Input {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct PovmInfo {
    name: String,
    /// Where the POVM came from: the `--povm` flag or the count file.
    source: &'static str,
    outcomes: usize,
    dim_m: usize,
}

#[derive(Serialize)]
struct Diagnostics {
    log_likelihood_mle: f64,
    log_likelihood_separable: f64,
    mle: OptimizerReport,
    separable: OptimizerReport,
    caveat: bool,
    options: OptimizerOptions,
}

#[derive(Serialize)]
struct Bootstrap {
    trials: usize,
    seed: u64,
    prng: &'static str,
    zero_fraction: f64,
    unconverged: usize,
}

#[derive(Serialize)]
struct AnalysisRecord {
    tool: Tool,
    input: Input,
    povm: PovmInfo,
    counts: Vec<u64>,
    n: u64,
    lambda: f64,
    confidence: Vec<ConfidenceReport>,
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    bootstrap: Option<Bootstrap>,
    diagnostics: Diagnostics,
}

pub fn run(args: &AnalyzeArgs) -> CliResult {
    let bytes = read_bytes(&args.counts)?;
    let file: CountFile =
        serde_json::from_slice(&bytes).map_err(|e| Failure::data(format!("count file: {e}")))?;
    let (povm, source) = match (&args.povm, &file.povm) {
        (Some(flag), _) => (povm_from_flag(flag)?, "flag"),
        (None, Some(spec)) => (spec.build()?, "count_file"),
        (None, None) => {
            return Err(Failure::usage("no POVM: pass --povm or name one in the count file"));
        }
    };
    let data = CountData::new(file.counts.clone())?;
    let opts = OptimizerOptions::default();
    let lr = lambda_statistic(&povm, &data, &opts)?;
    let dim_m = povm.measurement_dimension();

    let mut confidence = vec![
        confidence_level(lr.lambda, Ansatz::ConservativeChi2, dim_m, None)?,
        confidence_level(lr.lambda, Ansatz::SemiChi2One, dim_m, None)?,
    ];
    let mut bootstrap = None;
    if let (Some(trials), Some(seed)) = (args.bootstrap, args.seed) {
        let config = TrialConfig::new(StateSpec::Inline(lr.rho_sep), povm.clone(), data.total(), trials, seed)?;
        let outcomes = run_trials(&config, &opts)?;
        let lambdas: Vec<f64> = outcomes.iter().map(|o| o.lambda).collect();
        let ccdf = empirical_ccdf(&lambdas);
        confidence.push(confidence_level(lr.lambda, Ansatz::Empirical, dim_m, Some(&ccdf))?);
        bootstrap = Some(Bootstrap {
            trials,
            seed,
            prng: PRNG_ID,
            zero_fraction: ccdf.zero_fraction(),
            unconverged: outcomes.iter().filter(|o| !o.converged).count(),
        });
    }

    let converged = lr.converged();
    let record = AnalysisRecord {
        tool: TOOL,
        input: Input {
            path: args.counts.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        },
        povm: PovmInfo { name: povm.name().to_string(), source, outcomes: povm.len(), dim_m },
        counts: file.counts,
        n: data.total(),
        lambda: lr.lambda,
        confidence,
        verdict: if lr.lambda < ZERO_LAMBDA { "no evidence" } else { "evidence" },
        bootstrap,
        diagnostics: Diagnostics {
            log_likelihood_mle: lr.log_l_mle,
            log_likelihood_separable: lr.log_l_sep,
            mle: lr.mle_report,
            separable: lr.sep_report,
            caveat: lr.caveat,
            options: opts,
        },
    };
    let text = serde_json::to_string_pretty(&record).map_err(Failure::data)?;
    writeln!(std::io::stdout().lock(), "{text}")?;
    if !converged {
        return Err(Failure::convergence("optimizer did not converge; λ reported with caveat"));
    }
    Ok(())
}
