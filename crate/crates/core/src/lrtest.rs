//! Reference distributions for λ and conversion to confidence levels.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{empirical_entropy, OptimizerReport};
use crate::linalg::DensityMatrix;
use crate::montecarlo::{EmpiricalCcdf, ZERO_LAMBDA};

/// Outcome of the likelihood-ratio computation.
#[derive(Clone, Debug)]
pub struct LrResult {
    /// λ = 2 (ln L_mle − ln L_sep), clipped at zero.
    pub lambda: f64,
    pub log_l_mle: f64,
    pub log_l_sep: f64,
    pub rho_mle: DensityMatrix,
    pub rho_sep: DensityMatrix,
    pub mle_report: OptimizerReport,
    pub sep_report: OptimizerReport,
    /// Set when an optimizer did not converge or the raw difference was
    /// meaningfully negative; λ is still reported.
    pub caveat: bool,
}

impl LrResult {
    pub fn converged(&self) -> bool {
        self.mle_report.converged && self.sep_report.converged && !self.caveat
    }
}

/// Closed-form λ for the singlet witness: 2N(ln 2 − H(f)) when the "yes"
/// frequency exceeds one half, zero otherwise.
pub fn lambda_witness(n_yes: u64, n: u64) -> f64 {
    assert!(n >= 1 && n_yes <= n, "need 0 <= n_yes <= N and N >= 1");
    if 2 * n_yes <= n {
        return 0.0;
    }
    let f = n_yes as f64 / n as f64;
    (2.0 * n as f64 * (std::f64::consts::LN_2 - empirical_entropy(f))).max(0.0)
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_MAX_ITER: usize = 1000;

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x)/Γ(a).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "shape must be positive");
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < a + 1.0 {
        (1.0 - gamma_p_series(a, x)).clamp(0.0, 1.0)
    } else {
        gamma_q_continued_fraction(a, x).clamp(0.0, 1.0)
    }
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "shape must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x).clamp(0.0, 1.0)
    } else {
        (1.0 - gamma_q_continued_fraction(a, x)).clamp(0.0, 1.0)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

// Modified Lentz evaluation of the continued fraction for Q.
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Pr(X > x) for X ~ χ²_dof.
pub fn chi2_ccdf(dof: f64, x: f64) -> f64 {
    assert!(dof > 0.0, "degrees of freedom must be positive");
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(dof / 2.0, x / 2.0)
}

/// Pr(X > x) for a semi-χ²_dof variable: zero with probability ½,
/// χ²_dof otherwise.
pub fn semi_chi2_ccdf(dof: f64, x: f64) -> f64 {
    0.5 * chi2_ccdf(dof, x.max(0.0))
}

/// Density of χ²_dof at x > 0.
pub fn chi2_pdf(dof: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = dof / 2.0;
    ((k - 1.0) * x.ln() - x / 2.0 - k * std::f64::consts::LN_2 - ln_gamma(k)).exp()
}

/// Reference law used to turn λ into a confidence level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ansatz {
    /// χ² with dim(M) degrees of freedom; a rigorous upper bound.
    ConservativeChi2,
    /// Semi-χ²₁, the large-N law for boundary states.
    SemiChi2One,
    /// Simulated distribution at a separable state.
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfidenceReport {
    pub lambda: f64,
    pub ansatz: Ansatz,
    /// Degrees of freedom of the analytic ansatz; `None` for empirical.
    pub dof: Option<f64>,
    pub epsilon: f64,
    pub confidence: f64,
}

/// ε = CCDF(λ) under the chosen ansatz and confidence 1 − ε.
///
/// For the empirical ansatz an observed λ in the zero class gives ε = 1:
/// every simulated value is at least zero.
pub fn confidence_level(
    lambda: f64,
    ansatz: Ansatz,
    dim_m: usize,
    empirical: Option<&EmpiricalCcdf>,
) -> Result<ConfidenceReport> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    let (dof, epsilon) = match ansatz {
        Ansatz::ConservativeChi2 => {
            if dim_m == 0 {
                // No state dependence: the data cannot carry evidence.
                (Some(0.0), 1.0)
            } else {
                let k = dim_m as f64;
                (Some(k), chi2_ccdf(k, lambda))
            }
        }
        Ansatz::SemiChi2One => (Some(1.0), semi_chi2_ccdf(1.0, lambda)),
        Ansatz::Empirical => {
            let ccdf = empirical.ok_or_else(|| {
                Error::InvalidArgument("empirical ansatz needs simulated samples".into())
            })?;
            let eps = if lambda < ZERO_LAMBDA { 1.0 } else { ccdf.eval(lambda) };
            (None, eps)
        }
    };
    Ok(ConfidenceReport { lambda, ansatz, dof, epsilon, confidence: 1.0 - epsilon })
}

/// Result of fitting a semi-χ²_D law to λ samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SemiChi2Fit {
    /// Degrees of freedom maximizing the χ²_D likelihood of positive samples.
    pub dof: f64,
    /// Fraction of samples in the zero class.
    pub zero_fraction: f64,
    pub positive_samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 100;
const FIT_DOF_RANGE: (f64, f64) = (0.1, 30.0);
const FIT_DOF_TOL: f64 = 1e-4;

/// Maximum-likelihood χ²_D degrees of freedom of the positive samples.
pub fn fit_semi_chi2_dof(samples: &[f64]) -> Result<SemiChi2Fit> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::UndefinedFit(format!(
            "need at least {MIN_FIT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let positive: Vec<f64> = samples.iter().copied().filter(|&x| x >= ZERO_LAMBDA).collect();
    if positive.is_empty() {
        return Err(Error::UndefinedFit("all samples are zero".into()));
    }
    let n = positive.len() as f64;
    let sum_ln: f64 = positive.iter().map(|x| x.ln()).sum();
    let sum_x: f64 = positive.iter().sum();
    // Concave in D, so golden-section search finds the global maximum.
    let log_lik = |d: f64| {
        let k = d / 2.0;
        (k - 1.0) * sum_ln - sum_x / 2.0 - n * (k * std::f64::consts::LN_2 + ln_gamma(k))
    };

    let ratio = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = FIT_DOF_RANGE;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = log_lik(x1);
    let mut f2 = log_lik(x2);
    while hi - lo > FIT_DOF_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = log_lik(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = log_lik(x1);
        }
    }
    Ok(SemiChi2Fit {
        dof: 0.5 * (lo + hi),
        zero_fraction: 1.0 - n / samples.len() as f64,
        positive_samples: positive.len(),
    })
}
