//! Seeded simulation of i.i.d. measurement records and of the λ
//! distribution over many independent trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{lambda_statistic, CountData, OptimizerOptions};
use crate::linalg::DensityMatrix;
use crate::lrtest::lambda_witness;
use crate::measurement::{born_probabilities, Povm};
use crate::statemodel::{werner, WernerParam};

/// λ values below this are treated as exactly zero downstream.
pub const ZERO_LAMBDA: f64 = 1e-6;

/// Identifier of the per-trial generator, recorded in output metadata.
pub const PRNG_ID: &str = "chacha8(splitmix64(splitmix64(seed) ^ splitmix64(trial + 0x5851f42d4c957f2d)))";

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mixed = splitmix64(seed) ^ splitmix64(trial.wrapping_add(0x5851_F42D_4C95_7F2D));
    ChaCha8Rng::seed_from_u64(splitmix64(mixed))
}

/// Multinomial(N, Born probabilities) via N categorical draws by inverse CDF.
pub fn sample_counts<R: Rng + ?Sized>(
    povm: &Povm,
    rho: &DensityMatrix,
    n: u64,
    rng: &mut R,
) -> CountData {
    let p = born_probabilities(povm, rho);
    let mut cumulative = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &x in p.iter() {
        acc += x;
        cumulative.push(acc);
    }
    let last = p.iter().rposition(|&x| x > 0.0).unwrap_or(p.len() - 1);
    let mut counts = vec![0_u64; p.len()];
    for _ in 0..n {
        let u: f64 = rng.gen::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c <= u).min(last);
        counts[k] += 1;
    }
    CountData::new(counts).expect("n >= 1")
}

#[derive(Clone, Debug)]
pub enum StateSpec {
    Werner(WernerParam),
    Inline(DensityMatrix),
}

impl StateSpec {
    pub fn state(&self) -> DensityMatrix {
        match self {
            StateSpec::Werner(q) => werner(*q),
            StateSpec::Inline(rho) => *rho,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub state: StateSpec,
    pub povm: Povm,
    pub n: u64,
    pub trials: usize,
    pub seed: u64,
}

impl TrialConfig {
    pub fn new(state: StateSpec, povm: Povm, n: u64, trials: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        Ok(TrialConfig { state, povm, n, trials, seed })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub lambda: f64,
    pub converged: bool,
}

fn is_witness(povm: &Povm) -> bool {
    povm.name() == "witness"
}

/// One trial: sample, then compute λ (closed form for the witness POVM).
pub fn run_trial(
    config: &TrialConfig,
    rho: &DensityMatrix,
    trial: usize,
    opts: &OptimizerOptions,
) -> Result<TrialOutcome> {
    let mut rng = trial_rng(config.seed, trial as u64);
    let data = sample_counts(&config.povm, rho, config.n, &mut rng);
    if is_witness(&config.povm) {
        return Ok(TrialOutcome {
            trial,
            lambda: lambda_witness(data.counts()[0], data.total()),
            converged: true,
        });
    }
    let lr = lambda_statistic(&config.povm, &data, opts)?;
    Ok(TrialOutcome { trial, lambda: lr.lambda, converged: lr.converged() })
}

/// All trials of a configuration, in trial-index order. Trials run in
/// parallel; the per-trial generator makes the output schedule-independent.
pub fn run_trials(config: &TrialConfig, opts: &OptimizerOptions) -> Result<Vec<TrialOutcome>> {
    let rho = config.state.state();
    (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, &rho, t, opts))
        .collect()
}

/// Just the λ column of [`run_trials`].
pub fn lambdas(outcomes: &[TrialOutcome]) -> Vec<f64> {
    outcomes.iter().map(|o| o.lambda).collect()
}

/// Empirical complementary CDF Pr(λ > x) of a sample of λ values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalCcdf {
    sorted: Vec<f64>,
    zero_fraction: f64,
}

impl EmpiricalCcdf {
    /// Values below [`ZERO_LAMBDA`] are stored as exact zeros.
    pub fn new(samples: &[f64]) -> Self {
        let mut sorted: Vec<f64> = samples
            .iter()
            .map(|&x| if x < ZERO_LAMBDA { 0.0 } else { x })
            .collect();
        sorted.sort_by(f64::total_cmp);
        let zeros = sorted.partition_point(|&x| x == 0.0);
        let zero_fraction = if sorted.is_empty() { 0.0 } else { zeros as f64 / sorted.len() as f64 };
        EmpiricalCcdf { sorted, zero_fraction }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn zero_fraction(&self) -> f64 {
        self.zero_fraction
    }

    /// Fraction of samples strictly greater than `x`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        let at_or_below = self.sorted.partition_point(|&s| s <= x);
        (self.sorted.len() - at_or_below) as f64 / self.sorted.len() as f64
    }

    /// sup_x |CCDF(x) − reference(x)| over x in [lo, hi], checked at every
    /// sample jump (both sides) and at the interval ends.
    pub fn sup_distance(&self, lo: f64, hi: f64, reference: impl Fn(f64) -> f64) -> f64 {
        let mut worst = 0.0_f64;
        let mut check = |x: f64, emp: f64| worst = worst.max((emp - reference(x)).abs());
        check(lo, self.eval(lo));
        check(hi, self.eval(hi));
        let n = self.sorted.len() as f64;
        for &s in &self.sorted {
            if s < lo || s > hi {
                continue;
            }
            // Just left of s the CCDF still counts s itself.
            let below = self.sorted.partition_point(|&v| v < s);
            check(s, self.eval(s));
            if s > lo {
                check(s, (self.sorted.len() - below) as f64 / n);
            }
        }
        worst
    }
}

/// Free-function form of [`EmpiricalCcdf::new`].
pub fn empirical_ccdf(samples: &[f64]) -> EmpiricalCcdf {
    EmpiricalCcdf::new(samples)
}
