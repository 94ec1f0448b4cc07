//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::process::ExitCode;
use std::time::Instant;

use entlr::estimation::{kl_divergence, maximize_separable, Objective};
use entlr::linalg::{partial_transpose_on, Factor};
use entlr::*;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;
const BOUNDARY_Q: f64 = 1.0 / 3.0;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn simulate(q: f64, povm: Povm, n: u64, trials: usize, seed: u64) -> Vec<TrialOutcome> {
    let config = TrialConfig::new(StateSpec::Werner(WernerParam::new(q).unwrap()), povm, n, trials, seed).unwrap();
    run_trials(&config, &OptimizerOptions::default()).unwrap()
}

fn lambdas(outcomes: &[TrialOutcome]) -> Vec<f64> {
    outcomes.iter().map(|o| o.lambda).collect()
}

fn unconverged(outcomes: &[TrialOutcome]) -> usize {
    outcomes.iter().filter(|o| !o.converged).count()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn witness_closed_form() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let povm = witness_povm();
    let opts = OptimizerOptions::default();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst = (0, 0, 0.0, 0.0);
    for _ in 0..100 {
        let n = rng.gen_range(20..=10_000u64);
        let n_yes = rng.gen_range(n / 2 + 1..=n);
        let data = CountData::new(vec![n_yes, n - n_yes]).unwrap();
        let numeric = lambda_statistic(&povm, &data, &opts).unwrap().lambda;
        let exact = lambda_witness(n_yes, n);
        let tol = 1e-4_f64.max(1e-6 * exact.abs());
        let excess = (numeric - exact).abs() - tol;
        if excess > worst_excess {
            worst_excess = excess;
            worst = (n_yes, n, numeric, exact);
        }
    }
    verdict(
        worst_excess <= 0.0,
        format!(
            "100 random (n, N); worst case n={} N={}: numeric {:.8} vs closed form {:.8}",
            worst.0, worst.1, worst.2, worst.3
        ),
    )
}

fn boundary_zero_atom(outcomes: &[TrialOutcome]) -> Verdict {
    let c = empirical_ccdf(&lambdas(outcomes));
    let z = c.zero_fraction();
    verdict(
        (0.40..=0.55).contains(&z),
        format!("N=1e4, {} trials: zero fraction {z:.4} (want [0.40, 0.55]); {} unconverged", c.len(), unconverged(outcomes)),
    )
}

fn semi_chi2_convergence(outcomes: &[TrialOutcome]) -> Verdict {
    let c = empirical_ccdf(&lambdas(outcomes));
    let d = c.sup_distance(0.1, 8.0, |x| semi_chi2_ccdf(1.0, x));
    verdict(
        d < 0.05,
        format!("N=1e5, {} trials: sup |CCDF - semi-chi2_1| on [0.1, 8] = {d:.4} (want < 0.05); {} unconverged", c.len(), unconverged(outcomes)),
    )
}

/// sup over x ≥ 0 of CCDF(x) − chi2_ccdf(15, x). On each step [t_j, t_j+1)
/// the empirical value is constant and the bound decreasing, so the
/// supremum is the left limit at the next jump.
fn excess_over_chi2_15(samples: &[f64]) -> f64 {
    let c = empirical_ccdf(samples);
    let mut points: Vec<f64> = c.sorted().to_vec();
    points.dedup();
    let mut prev = 0.0;
    let mut worst = c.eval(0.0) - chi2_ccdf(15.0, 0.0);
    for &t in points.iter().filter(|&&t| t > 0.0) {
        worst = worst.max(c.eval(prev) - chi2_ccdf(15.0, t));
        prev = t;
    }
    worst
}

fn conservative_bound(runs: &[(&str, &[TrialOutcome])]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, outcomes) in runs {
        let e = excess_over_chi2_15(&lambdas(outcomes));
        pass &= e <= 0.01;
        parts.push(format!("{label}: sup(CCDF - chi2_15) = {e:.4}"));
    }
    verdict(pass, format!("{} (want <= 0.01)", parts.join("; ")))
}

fn separable_collapse() -> Verdict {
    let out = simulate(0.25, product_sic_povm(), 10_000, 500, SEED);
    let zeros = empirical_ccdf(&lambdas(&out)).zero_fraction();
    verdict(zeros >= 0.99, format!("q=0.25, N=1e4, 500 trials: zero fraction {zeros:.4} (want >= 0.99)"))
}

/// min over PPT σ of KL(p(ρ0) ‖ p(σ)), best of ten random interior starts.
fn min_kl_constant(povm: &Povm, rho0: &DensityMatrix, rng: &mut ChaCha8Rng) -> f64 {
    let p0 = born_probabilities(povm, rho0);
    let obj = Objective::new(povm, &p0).unwrap();
    let opts = OptimizerOptions::default();
    (0..10)
        .map(|_| {
            let a = Mat4::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let m = HermitianMatrix::symmetrize(a * a.adjoint());
            let t = m.trace();
            let start = DensityMatrix::new(m.scale(1.0 / t)).unwrap().mix(&DensityMatrix::maximally_mixed(), 0.5);
            let (sigma, _, _) = maximize_separable(&obj, &start, &opts);
            kl_divergence(&p0, &born_probabilities(povm, &sigma))
        })
        .fold(f64::INFINITY, f64::min)
}

fn linear_growth() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut pass = true;
    let mut parts = Vec::new();
    for q in [0.5, 0.9] {
        let small = mean(&lambdas(&simulate(q, product_sic_povm(), 1_000, 200, SEED)));
        let large = mean(&lambdas(&simulate(q, product_sic_povm(), 10_000, 200, SEED)));
        let ratio = large / small;
        let kl = min_kl_constant(&product_sic_povm(), &werner_q(q).unwrap(), &mut rng);
        let per_sample = large / 2e4;
        let rel = (per_sample - kl).abs() / kl;
        pass &= (8.5..=11.5).contains(&ratio) && rel <= 0.10;
        parts.push(format!(
            "q={q}: mean {small:.3} -> {large:.3}, ratio {ratio:.3} (want [8.5, 11.5]); lambda/2N {per_sample:.6} vs min-KL {kl:.6}, rel {rel:.3} (want <= 0.10)"
        ));
    }
    verdict(pass, parts.join("; "))
}

fn small_n_dof() -> Verdict {
    let out = simulate(BOUNDARY_Q, product_sic_povm(), 100, 10_000, SEED);
    let fit = fit_semi_chi2_dof(&lambdas(&out)).unwrap();
    verdict(
        (1.2..=2.0).contains(&fit.dof),
        format!(
            "N=100, 1e4 trials: D = {:.4} (want [1.2, 2.0]); zero fraction {:.4}; {} unconverged",
            fit.dof,
            fit.zero_fraction,
            unconverged(&out)
        ),
    )
}

fn witness_small_n() -> Verdict {
    let out = simulate(BOUNDARY_Q, witness_povm(), 20, 10_000, SEED);
    let fit = fit_semi_chi2_dof(&lambdas(&out)).unwrap();
    let zero_ok = (0.45..=0.60).contains(&fit.zero_fraction);
    let dof_ok = (0.8..=1.3).contains(&fit.dof);
    verdict(
        zero_ok && dof_ok,
        format!(
            "witness N=20, 1e4 trials: zero fraction {:.4} (want [0.45, 0.60]) {}; D = {:.4} (want [0.8, 1.3]) {}",
            fit.zero_fraction,
            if zero_ok { "ok" } else { "out" },
            fit.dof,
            if dof_ok { "ok" } else { "out" }
        ),
    )
}

fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let rank = rng.gen_range(1..=4);
    let a = Mat4::from_fn(|_, j| {
        if j < rank {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let m = HermitianMatrix::symmetrize(a * a.adjoint());
    let t = m.trace();
    DensityMatrix::new(m.scale(1.0 / t)).unwrap()
}

fn property_suites() -> Verdict {
    const CASES: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let povm = product_sic_povm();
    let traced = OptimizerOptions { record_trace: true, ..OptimizerOptions::default() };
    let opts = OptimizerOptions::default();
    let mut failures: Vec<&str> = Vec::new();
    let mut note = |ok: bool, name: &'static str| {
        if !ok && !failures.contains(&name) {
            failures.push(name);
        }
    };

    for _ in 0..CASES {
        let rho = random_state(&mut rng);
        let n = rng.gen_range(1..300);
        let data = sample_counts(&povm, &rho, n, &mut rng);

        let lr = lambda_statistic(&povm, &data, &traced).unwrap();
        note(
            lr.mle_report.trace.windows(2).all(|w| w[1] >= w[0]) && lr.sep_report.trace.windows(2).all(|w| w[1] >= w[0]),
            "monotone ascent",
        );
        note(lr.lambda >= 0.0 && lr.log_l_sep <= lr.log_l_mle + 1e-9, "lambda >= 0");

        let mut order: Vec<usize> = (0..povm.len()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let permuted = lambda_statistic(&povm.permuted(&order).unwrap(), &data.permuted(&order), &opts).unwrap();
        note((permuted.lambda - lr.lambda).abs() < 1e-8, "permutation gauge");

        let h = HermitianMatrix::symmetrize(Mat4::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        for factor in [Factor::First, Factor::Second] {
            let back = partial_transpose_on(&partial_transpose_on(&h, factor), factor);
            note(back.sub(&h).frobenius_norm() < 1e-15, "PT involution");
        }

        let samples: Vec<f64> = (0..rng.gen_range(1..100))
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..20.0) })
            .collect();
        let c = empirical_ccdf(&samples);
        let max = samples.iter().cloned().fold(0.0, f64::max);
        let grid: Vec<f64> = (0..=250).map(|i| i as f64 * 0.1).collect();
        note(
            c.eval(max) == 0.0 && grid.windows(2).all(|w| c.eval(w[1]) <= c.eval(w[0])),
            "CCDF monotonicity",
        );
    }

    let config = TrialConfig::new(
        StateSpec::Werner(WernerParam::new(0.5).unwrap()),
        povm.clone(),
        200,
        CASES,
        SEED,
    )
    .unwrap();
    let run_with = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_trials(&config, &opts).unwrap())
    };
    let a = run_with(1);
    let b = run_with(4);
    note(
        a.iter().zip(&b).all(|(x, y)| x.trial == y.trial && x.lambda.to_bits() == y.lambda.to_bits()),
        "determinism",
    );

    let pass = failures.is_empty();
    let detail = if pass {
        format!("{CASES} randomized cases each: monotone ascent, lambda >= 0, PT involution, permutation gauge, CCDF monotonicity, determinism")
    } else {
        format!("failing: {}", failures.join(", "))
    };
    verdict(pass, detail)
}

fn main() -> ExitCode {
    let mut all_pass = true;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        all_pass &= v.pass;
        println!(
            "criterion {id} [{}] {name}: {} ({:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    };

    report(1, "witness closed form", &mut witness_closed_form);

    let n4 = simulate(BOUNDARY_Q, product_sic_povm(), 10_000, 2000, SEED);
    let n5 = simulate(BOUNDARY_Q, product_sic_povm(), 100_000, 2000, SEED);
    report(2, "boundary zero atom", &mut || boundary_zero_atom(&n4));
    report(3, "semi-chi2_1 at large N", &mut || semi_chi2_convergence(&n5));
    report(4, "chi2_15 conservative bound", &mut || conservative_bound(&[("N=1e4", &n4), ("N=1e5", &n5)]));
    report(5, "separable collapse", &mut separable_collapse);
    report(6, "linear growth", &mut linear_growth);
    report(7, "small-N effective dof", &mut small_n_dof);
    report(8, "witness small-N semi-chi2_1", &mut witness_small_n);
    report(9, "property suites", &mut property_suites);

    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
