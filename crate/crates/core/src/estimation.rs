//! Likelihood evaluation and the two maximizations behind the likelihood
//! ratio: over all two-qubit states, and over the PPT (separable) states.
//!
//! Internally every optimizer works with the per-sample objective
//! `F(ρ) = Σ_k w_k ln p_k(ρ)` where `w` are outcome weights summing to one
//! (the empirical frequencies for count data). Reported log-likelihoods are
//! always recomputed from the integer counts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{partial_transpose, project_state, DensityMatrix, HermitianMatrix, Mat4, C64};
use crate::lrtest::LrResult;
use crate::measurement::Povm;
use crate::statemodel::DEFAULT_PPT_TOL;

/// Probability floor used only when forming the gradient operator.
const PROBABILITY_FLOOR: f64 = 1e-300;
/// Relative negativity of a linear-inversion estimate still treated as PSD.
const LINEAR_INVERSION_SLACK: f64 = 1e-13;
const ARMIJO_SIGMA: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;
/// RρR steps before a slow run is handed to projected gradient.
const RRR_BUDGET: usize = 2000;
/// Probe failures tolerated before the separable search gives up.
const MAX_RESTARTS: usize = 20;

/// Observed outcome counts for one measurement record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountData {
    counts: Vec<u64>,
    total: u64,
}

impl CountData {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidCounts("total count must be at least 1".into()));
        }
        Ok(CountData { counts, total })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Reorders outcomes: `order[k]` is the old index placed at k.
    pub fn permuted(&self, order: &[usize]) -> Self {
        CountData {
            counts: order.iter().map(|&k| self.counts[k]).collect(),
            total: self.total,
        }
    }

    fn check_shape(&self, povm: &Povm) -> Result<()> {
        if self.counts.len() != povm.len() {
            return Err(Error::InvalidCounts(format!(
                "{} counts for a POVM with {} outcomes",
                self.counts.len(),
                povm.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerOptions {
    /// Stationarity threshold: λ_max(R) ≤ 1 + grad_tol for the full MLE.
    pub grad_tol: f64,
    pub max_iterations: usize,
    /// Stop once the per-iteration relative objective change falls below this.
    pub rel_tol: f64,
    /// Feasibility tolerance on the smallest partial-transpose eigenvalue.
    pub ppt_tol: f64,
    /// Step length of the projected-gradient ascent probe.
    pub probe_step: f64,
    /// Largest per-sample log-likelihood gain the probe may find at a
    /// converged constrained optimum.
    pub improve_tol: f64,
    pub dykstra_max_sweeps: usize,
    pub dykstra_tol: f64,
    /// Keep the objective value after every accepted iteration.
    pub record_trace: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            grad_tol: 1e-7,
            max_iterations: 200_000,
            rel_tol: 1e-11,
            ppt_tol: DEFAULT_PPT_TOL,
            probe_step: 1e-5,
            improve_tol: 1e-9,
            dykstra_max_sweeps: 500,
            dykstra_tol: 1e-11,
            record_trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerReport {
    pub iterations: usize,
    /// Log-likelihood of the returned state, in nats.
    pub final_log_likelihood: f64,
    /// λ_max(R) − 1 for the full MLE; the probe gain for the PPT MLE.
    pub gradient_certificate: f64,
    /// Frank–Wolfe duality gap of the PPT MLE, an upper bound on the
    /// per-sample log-likelihood still attainable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality_gap: Option<f64>,
    pub converged: bool,
    /// Per-sample objective after each accepted step (only when requested).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

/// Σ_k n_k ln p_k; zero counts contribute nothing. Returns −∞ when an
/// observed outcome has non-positive probability.
pub fn log_likelihood(povm: &Povm, data: &CountData, rho: &DensityMatrix) -> Result<f64> {
    data.check_shape(povm)?;
    let p = povm.raw_probabilities(rho.as_hermitian());
    let mut acc = 0.0;
    for (&n, &pk) in data.counts.iter().zip(&p) {
        if n == 0 {
            continue;
        }
        if pk <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        acc += n as f64 * pk.ln();
    }
    Ok(acc)
}

/// Binary entropy −f ln f − (1−f) ln(1−f) in nats.
pub fn empirical_entropy(f: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(f) + term(1.0 - f)
}

/// Σ p ln(p/q), +∞ if q vanishes where p does not.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            if a <= 0.0 {
                0.0
            } else if b <= 0.0 {
                f64::INFINITY
            } else {
                a * (a / b).ln()
            }
        })
        .sum()
}

/// Per-sample log-likelihood objective F(ρ) = Σ w_k ln p_k(ρ).
pub struct Objective<'a> {
    povm: &'a Povm,
    weights: Vec<f64>,
}

impl<'a> Objective<'a> {
    pub fn new(povm: &'a Povm, weights: &[f64]) -> Result<Self> {
        if weights.len() != povm.len() {
            return Err(Error::InvalidCounts(format!(
                "{} weights for a POVM with {} outcomes",
                weights.len(),
                povm.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidCounts("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidCounts("weights sum to zero".into()));
        }
        Ok(Objective { povm, weights: weights.iter().map(|w| w / total).collect() })
    }

    pub fn from_counts(povm: &'a Povm, data: &CountData) -> Result<Self> {
        data.check_shape(povm)?;
        Self::new(povm, &data.frequencies())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn value(&self, rho: &HermitianMatrix) -> f64 {
        let mut acc = 0.0;
        for (e, &w) in self.povm.effects().iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            let p = e.inner(rho);
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += w * p.ln();
        }
        acc
    }

    /// R(ρ) = Σ_k (w_k / p_k) E_k, the gradient of F.
    pub fn gradient(&self, rho: &HermitianMatrix) -> HermitianMatrix {
        let mut acc = Mat4::zero();
        for (e, &w) in self.povm.effects().iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            let p = e.inner(rho).max(PROBABILITY_FLOOR);
            acc = acc + e.mat().scale(w / p);
        }
        HermitianMatrix::symmetrize(acc)
    }
}

/// Ascent step ρ ← MρM / Tr(MρM) with M = (1−ε)I + εR.
///
/// The congruence is positive in exact arithmetic, but for ε > 2 it amplifies
/// rounding in the null space of ρ by up to (ε−1)² per step, so the result is
/// projected back onto the states.
fn diluted_step(rho: &HermitianMatrix, r: &HermitianMatrix, eps: f64) -> HermitianMatrix {
    let m = Mat4::identity().scale(1.0 - eps) + r.mat().scale(eps);
    let next = rho.congruence(&m);
    let tr = next.trace();
    *project_state(&next.scale(1.0 / tr)).as_hermitian()
}

fn certificate(obj: &Objective, rho: &HermitianMatrix) -> f64 {
    obj.gradient(rho).eig().values[0] - 1.0
}

/// Maximizes F over all states with the diluted RρR iteration.
///
/// When the frequencies are exactly reproduced by a positive linear-inversion
/// estimate, that estimate is already the maximizer and is returned after
/// checking the stationarity certificate.
pub fn mle_weighted(
    povm: &Povm,
    weights: &[f64],
    opts: &OptimizerOptions,
) -> Result<(DensityMatrix, f64, OptimizerReport)> {
    let obj = Objective::new(povm, weights)?;

    let li = povm.linear_inversion(obj.weights());
    if li.min_eigenvalue() >= -LINEAR_INVERSION_SLACK {
        let rho = project_state(&li);
        let f = obj.value(rho.as_hermitian());
        if f.is_finite() {
            let cert = certificate(&obj, rho.as_hermitian());
            if cert <= opts.grad_tol {
                let trace = if opts.record_trace { vec![f] } else { Vec::new() };
                let report = OptimizerReport {
                    iterations: 0,
                    final_log_likelihood: f,
                    gradient_certificate: cert,
                    duality_gap: None,
                    converged: true,
                    trace,
                };
                return Ok((rho, f, report));
            }
        }
    }

    Ok(rrr_iterate(&obj, DensityMatrix::maximally_mixed(), opts))
}

fn rrr_iterate(
    obj: &Objective,
    start: DensityMatrix,
    opts: &OptimizerOptions,
) -> (DensityMatrix, f64, OptimizerReport) {
    let mut rho = *start.as_hermitian();
    let mut f = obj.value(&rho);
    let mut trace = Vec::new();
    if opts.record_trace {
        trace.push(f);
    }
    let mut eps = 1.0_f64;
    let mut cert = f64::INFINITY;
    let mut iterations = 0;
    let mut quiet = 0;

    while iterations < opts.max_iterations {
        let r = obj.gradient(&rho);
        cert = r.eig().values[0] - 1.0;
        if cert <= opts.grad_tol * 1e-3 {
            break;
        }
        if cert <= opts.grad_tol && quiet >= 3 {
            break;
        }
        // RρR is multiplicative and only creeps toward a rank-deficient
        // optimum; projected gradient lands on the boundary face exactly.
        if iterations >= RRR_BUDGET || quiet >= 20 {
            break;
        }

        let mut accepted = None;
        while eps >= MIN_STEP {
            let candidate = diluted_step(&rho, &r, eps);
            let fc = obj.value(&candidate);
            if fc >= f {
                accepted = Some((candidate, fc));
                break;
            }
            eps *= 0.5;
        }
        let Some((next, fn_)) = accepted else {
            break;
        };
        iterations += 1;
        let gain = fn_ - f;
        quiet = if gain <= opts.rel_tol * f.abs().max(1e-300) { quiet + 1 } else { 0 };
        rho = next;
        f = fn_;
        if opts.record_trace {
            trace.push(f);
        }
        eps = (eps * 2.0).min(1e6);
    }

    if cert.is_infinite() {
        cert = certificate(obj, &rho);
    }
    if cert > opts.grad_tol {
        let budget = opts.max_iterations.saturating_sub(iterations);
        let (polished, _, steps) = polish_on_states(obj, rho, f, budget, opts, &mut trace);
        iterations += steps;
        rho = polished;
        cert = certificate(obj, &rho);
    }
    let state = project_state(&rho);
    let f = obj.value(state.as_hermitian());
    let report = OptimizerReport {
        iterations,
        final_log_likelihood: f,
        gradient_certificate: cert,
        duality_gap: None,
        converged: cert <= opts.grad_tol,
        trace,
    };
    (state, f, report)
}

/// Spectral projected gradient over all states, stopping on the same
/// certificate as RρR. Returns the state, F and the steps taken.
fn polish_on_states(
    obj: &Objective,
    start: HermitianMatrix,
    f_start: f64,
    budget: usize,
    opts: &OptimizerOptions,
    trace: &mut Vec<f64>,
) -> (HermitianMatrix, f64, usize) {
    let (mut rho, mut f) = (start, f_start);
    let mut g = obj.gradient(&rho);
    let mut alpha = 1.0_f64;
    let mut steps = 0;
    let mut quiet = 0;
    while steps < budget && quiet < 20 {
        if g.eig().values[0] - 1.0 <= opts.grad_tol {
            break;
        }
        let d = project_state(&rho.add(&g.scale(alpha))).as_hermitian().sub(&rho);
        let slope = g.inner(&d);
        if !(slope > 0.0) {
            break;
        }
        let mut theta = 1.0_f64;
        let mut accepted = None;
        while theta >= MIN_STEP {
            let candidate = rho.add(&d.scale(theta));
            let fc = obj.value(&candidate);
            if fc.is_finite() && fc >= f + ARMIJO_SIGMA * theta * slope {
                accepted = Some((candidate, fc));
                break;
            }
            theta *= 0.5;
        }
        let Some((next, fc)) = accepted else {
            break;
        };
        steps += 1;
        let g_next = obj.gradient(&next);
        let s_step = next.sub(&rho);
        let curvature = -s_step.inner(&g_next.sub(&g));
        alpha = if curvature > 0.0 { (s_step.inner(&s_step) / curvature).clamp(1e-10, 1e10) } else { 1e10 };
        quiet = if fc - f <= opts.rel_tol * f.abs().max(1e-300) { quiet + 1 } else { 0 };
        rho = next;
        f = fc;
        g = g_next;
        if opts.record_trace {
            trace.push(f);
        }
    }
    (rho, f, steps)
}

/// Unconstrained maximum-likelihood state for count data.
pub fn mle(
    povm: &Povm,
    data: &CountData,
    opts: &OptimizerOptions,
) -> Result<(DensityMatrix, OptimizerReport)> {
    data.check_shape(povm)?;
    let (rho, _, mut report) = mle_weighted(povm, &data.frequencies(), opts)?;
    report.final_log_likelihood = log_likelihood(povm, data, &rho)?;
    Ok((rho, report))
}

/// Nearest point of the PPT state set, by Dykstra's alternating projections
/// between the state set and its partial-transpose image. Returns the
/// projection and the number of sweeps used.
pub fn project_ppt(m: &HermitianMatrix, max_sweeps: usize, tol: f64) -> (DensityMatrix, usize) {
    let mut correction = HermitianMatrix::from_real_diag([0.0; 4]);
    dykstra_ppt(m, &mut correction, max_sweeps, tol)
}

/// Dykstra's method written as alternating minimization over the two
/// correction terms. `pt_correction` is the correction of the
/// partial-transpose set; it may be seeded from a previous, nearby
/// projection and is updated in place. A zero seed is plain Dykstra.
pub fn dykstra_ppt(
    y: &HermitianMatrix,
    pt_correction: &mut HermitianMatrix,
    max_sweeps: usize,
    tol: f64,
) -> (DensityMatrix, usize) {
    let mut x = *y;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let shifted = y.sub(pt_correction);
        let a = *project_state(&shifted).as_hermitian();
        let state_correction = shifted.sub(&a);
        let target = y.sub(&state_correction);
        let b = partial_transpose(project_state(&partial_transpose(&target)).as_hermitian());
        *pt_correction = target.sub(&b);
        let moved = b.sub(&x).frobenius_norm();
        x = b;
        // b is PT-positive by construction; only positivity of b itself is
        // open. Feasibility alone is not enough: the sweeps must also settle.
        if moved <= tol && x.min_eigenvalue() >= -tol {
            break;
        }
    }
    (DensityMatrix::new_unchecked(x), sweeps)
}

/// Projector that remembers its last correction term for warm starts.
struct PptProjector {
    max_sweeps: usize,
    tol: f64,
    warm: std::cell::Cell<HermitianMatrix>,
}

impl PptProjector {
    fn new(max_sweeps: usize, tol: f64) -> Self {
        PptProjector {
            max_sweeps,
            tol,
            warm: std::cell::Cell::new(HermitianMatrix::from_real_diag([0.0; 4])),
        }
    }

    /// Projection onto the PPT states, or a nearby PPT state when the sweep
    /// cap is reached first. The result is always feasible.
    fn project(&self, m: &HermitianMatrix) -> HermitianMatrix {
        let mut correction = self.warm.get();
        let (x, _) = dykstra_ppt(m, &mut correction, self.max_sweeps, self.tol);
        self.warm.set(correction);
        make_ppt(*x.as_hermitian())
    }
}

/// Mixes a unit-trace matrix with I/4 just enough to make it and its
/// partial transpose positive semidefinite.
fn make_ppt(x: HermitianMatrix) -> HermitianMatrix {
    let worst = x.min_eigenvalue().min(partial_transpose(&x).min_eigenvalue());
    if worst >= 0.0 {
        return x;
    }
    let t = -worst / (0.25 - worst);
    let mixed = *DensityMatrix::maximally_mixed().as_hermitian();
    x.scale(1.0 - t).add(&mixed.scale(t))
}

/// Unit eigenvector of the largest eigenvalue of a 2×2 Hermitian matrix.
fn top_eigenvector(m: [[C64; 2]; 2]) -> [C64; 2] {
    let (a, d, b) = (m[0][0].re, m[1][1].re, m[0][1]);
    let half = 0.5 * (a - d);
    let root = (half * half + b.norm_sqr()).sqrt();
    if b.norm() <= 1e-300 {
        return if a >= d {
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        } else {
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
        };
    }
    // (M − μ)v = 0 with μ = (a+d)/2 + root gives v ∝ (b, μ − a).
    let v = [b, C64::new(root - half, 0.0)];
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / norm, v[1] / norm]
}

type Spinor = [C64; 2];

/// Reduced operator on the second qubit, ⟨a|R|a⟩.
fn reduce_first(m: &Mat4, a: &Spinor) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (k, row) in out.iter_mut().enumerate() {
        for (l, cell) in row.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    *cell += a[i].conj() * m.get(2 * i + k, 2 * j + l) * a[j];
                }
            }
        }
    }
    out
}

/// Reduced operator on the first qubit, ⟨b|R|b⟩.
fn reduce_second(m: &Mat4, b: &Spinor) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            for k in 0..2 {
                for l in 0..2 {
                    *cell += b[k].conj() * m.get(2 * i + k, 2 * j + l) * b[l];
                }
            }
        }
    }
    out
}

fn top_eigenvalue(m: [[C64; 2]; 2]) -> f64 {
    let (a, d) = (m[0][0].re, m[1][1].re);
    0.5 * (a + d) + (0.25 * (a - d) * (a - d) + m[0][1].norm_sqr()).sqrt()
}

fn expectation(m: [[C64; 2]; 2], v: &Spinor) -> f64 {
    let mut total = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            total += v[i].conj() * m[i][j] * v[j];
        }
    }
    total.re
}

const SPHERE_GRID: usize = 200;
const REFINED_STARTS: usize = 8;

/// max ⟨a⊗b|R|a⊗b⟩ over product pure states. For fixed a the best b is
/// exact (top eigenvector of ⟨a|R|a⟩), which leaves a function of a alone.
/// That function is scanned on a Fibonacci grid of the Bloch sphere and
/// the best grid points are refined by alternating exact maximization.
pub fn max_product_expectation(r: &HermitianMatrix) -> f64 {
    let m = r.mat();
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    let mut scored: Vec<(f64, Spinor)> = (0..SPHERE_GRID)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / SPHERE_GRID as f64;
            let theta = z.acos();
            let phi = golden * i as f64;
            let a = [
                C64::new((0.5 * theta).cos(), 0.0),
                C64::from_polar((0.5 * theta).sin(), phi),
            ];
            (top_eigenvalue(reduce_first(m, &a)), a)
        })
        .collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut best = f64::NEG_INFINITY;
    for &(start, mut a) in scored.iter().take(REFINED_STARTS) {
        let mut value = start;
        for _ in 0..500 {
            let b = top_eigenvector(reduce_first(m, &a));
            let ma = reduce_second(m, &b);
            a = top_eigenvector(ma);
            let next = expectation(ma, &a);
            let settled = next - value <= 1e-15 * next.abs().max(1.0);
            value = value.max(next);
            if settled {
                break;
            }
        }
        best = best.max(value);
    }
    best
}

/// Frank–Wolfe duality gap of the PPT-constrained problem at `rho`:
/// max over PPT σ of ⟨R, σ − ρ⟩. For two qubits the PPT states are exactly
/// the separable ones, so the maximum sits at a product pure state. By
/// concavity the gap bounds the remaining possible gain in F.
pub fn separable_gap(obj: &Objective, rho: &HermitianMatrix) -> f64 {
    let r = obj.gradient(rho);
    (max_product_expectation(&r) - r.inner(rho)).max(0.0)
}

/// Short projected-gradient step: the gain in F (zero at an optimum) and
/// the feasible point reached.
fn ascent_probe(
    obj: &Objective,
    rho: &HermitianMatrix,
    g: &HermitianMatrix,
    f: f64,
    opts: &OptimizerOptions,
) -> (f64, HermitianMatrix, f64) {
    let probe = PptProjector::new(opts.dykstra_max_sweeps, opts.dykstra_tol)
        .project(&rho.add(&g.scale(opts.probe_step)));
    let fp = obj.value(&probe);
    ((fp - f).max(0.0), probe, fp)
}

/// Maximizes F over PPT states by spectral projected gradient ascent:
/// Barzilai–Borwein trial steps, projection onto the PPT state set, and a
/// monotone Armijo search along the (feasible) segment to the projection.
/// Convergence is certified by a no-ascent probe.
pub fn maximize_separable(
    obj: &Objective,
    start: &DensityMatrix,
    opts: &OptimizerOptions,
) -> (DensityMatrix, f64, OptimizerReport) {
    let proj = PptProjector::new(opts.dykstra_max_sweeps, opts.dykstra_tol);
    let mut rho = proj.project(start.as_hermitian());
    let mut f = obj.value(&rho);
    let mixed = *DensityMatrix::maximally_mixed().as_hermitian();
    let mut shrink = 1e-6;
    while !f.is_finite() && shrink <= 1.0 {
        // Pull toward I/4 (interior, PPT) until every observed outcome is possible.
        rho = rho.scale(1.0 - shrink).add(&mixed.scale(shrink));
        f = obj.value(&rho);
        shrink *= 10.0;
    }

    let mut trace = Vec::new();
    if opts.record_trace {
        trace.push(f);
    }
    let mut g = obj.gradient(&rho);
    let mut alpha = 1.0_f64;
    let mut iterations = 0;
    let mut quiet = 0;
    let mut gap = separable_gap(obj, &rho);
    let mut probe_gain = f64::INFINITY;
    let mut restarts = 0;
    let mut gap_trusted = true;

    while iterations < opts.max_iterations {
        // A small gap (it bounds every possible gain) or a stall triggers the
        // no-ascent probe. The gap comes from a nonconvex product-state
        // search and may be underestimated, so the probe has the last word:
        // once it contradicts the gap, only stalls trigger it, and the
        // probe point becomes the next iterate.
        if (gap_trusted && gap <= opts.improve_tol) || quiet >= 5 {
            let (gain, probe, fp) = ascent_probe(obj, &rho, &g, f, opts);
            probe_gain = gain;
            if probe_gain <= opts.improve_tol || restarts >= MAX_RESTARTS {
                break;
            }
            restarts += 1;
            gap_trusted = false;
            quiet = 0;
            alpha = 1.0;
            rho = probe;
            f = fp;
            g = obj.gradient(&rho);
            iterations += 1;
            if opts.record_trace {
                trace.push(f);
            }
            probe_gain = f64::INFINITY;
            continue;
        }
        // Search direction toward the projected trial point. A non-ascent
        // direction can only come from an inexact projection; a shorter
        // trial step makes the projection easier.
        let mut direction = None;
        while alpha >= MIN_STEP {
            let d = proj.project(&rho.add(&g.scale(alpha))).sub(&rho);
            let slope = g.inner(&d);
            if slope > 0.0 {
                direction = Some((d, slope));
                break;
            }
            alpha *= 0.25;
        }
        let Some((d, slope)) = direction else {
            break;
        };
        let mut theta = 1.0_f64;
        let mut accepted = None;
        while theta >= MIN_STEP {
            let candidate = rho.add(&d.scale(theta));
            let fc = obj.value(&candidate);
            if fc.is_finite() && fc >= f + ARMIJO_SIGMA * theta * slope {
                accepted = Some((candidate, fc));
                break;
            }
            theta *= 0.5;
        }
        let Some((next, fc)) = accepted else {
            break;
        };
        iterations += 1;
        let gain = fc - f;
        let g_next = obj.gradient(&next);
        let s_step = next.sub(&rho);
        let curvature = -s_step.inner(&g_next.sub(&g));
        alpha = if curvature > 0.0 {
            (s_step.inner(&s_step) / curvature).clamp(1e-10, 1e10)
        } else {
            1e10
        };
        rho = next;
        f = fc;
        g = g_next;
        // The gap search is comparatively costly; skip it while steps still
        // gain much more than the target.
        gap = if gain <= 100.0 * opts.improve_tol { separable_gap(obj, &rho) } else { f64::INFINITY };
        if opts.record_trace {
            trace.push(f);
        }
        quiet = if gain <= opts.rel_tol * f.abs().max(1e-300) { quiet + 1 } else { 0 };
        probe_gain = f64::INFINITY;
    }

    if probe_gain.is_infinite() {
        probe_gain = ascent_probe(obj, &rho, &g, f, opts).0;
    }
    let state = DensityMatrix::new_unchecked(rho);
    let feasible = state.min_pt_eigenvalue() >= -opts.ppt_tol && rho.min_eigenvalue() >= -opts.ppt_tol;
    let report = OptimizerReport {
        iterations,
        final_log_likelihood: f,
        gradient_certificate: probe_gain,
        duality_gap: Some(if gap.is_finite() { gap } else { separable_gap(obj, &rho) }),
        converged: feasible && probe_gain <= opts.improve_tol,
        trace,
    };
    (state, f, report)
}

/// PPT-constrained optimum given the unconstrained one. If the
/// unconstrained maximizer is already PPT the constraint is inactive.
fn separable_from_mle(
    obj: &Objective,
    rho_mle: &DensityMatrix,
    f_mle: f64,
    opts: &OptimizerOptions,
) -> (DensityMatrix, f64, OptimizerReport) {
    if rho_mle.min_pt_eigenvalue() >= -opts.ppt_tol {
        let report = OptimizerReport {
            iterations: 0,
            final_log_likelihood: f_mle,
            gradient_certificate: 0.0,
            duality_gap: Some(0.0),
            converged: true,
            trace: if opts.record_trace { vec![f_mle] } else { Vec::new() },
        };
        return (*rho_mle, f_mle, report);
    }
    maximize_separable(obj, rho_mle, opts)
}

/// Maximum-likelihood state among PPT (separable) states.
pub fn mle_separable(
    povm: &Povm,
    data: &CountData,
    opts: &OptimizerOptions,
) -> Result<(DensityMatrix, OptimizerReport)> {
    let obj = Objective::from_counts(povm, data)?;
    let (rho_mle, f_mle, _) = mle_weighted(povm, obj.weights(), opts)?;
    let (rho, _, mut report) = separable_from_mle(&obj, &rho_mle, f_mle, opts);
    report.final_log_likelihood = log_likelihood(povm, data, &rho)?;
    Ok((rho, report))
}

/// Statistic differences this far below zero are flagged rather than
/// silently clipped.
pub const NEGATIVE_LAMBDA_TOL: f64 = 1e-7;

/// λ = 2 (max ln L over all states − max ln L over PPT states).
pub fn lambda_statistic(povm: &Povm, data: &CountData, opts: &OptimizerOptions) -> Result<LrResult> {
    let obj = Objective::from_counts(povm, data)?;
    let (rho_mle, f_mle, mut mle_report) = mle_weighted(povm, obj.weights(), opts)?;
    let (rho_sep, f_sep, mut sep_report) = separable_from_mle(&obj, &rho_mle, f_mle, opts);

    let log_l_mle = log_likelihood(povm, data, &rho_mle)?;
    let log_l_sep = log_likelihood(povm, data, &rho_sep)?;
    mle_report.final_log_likelihood = log_l_mle;
    sep_report.final_log_likelihood = log_l_sep;

    // Differences of per-sample objectives avoid cancellation in N·F.
    let raw = 2.0 * data.total() as f64 * (f_mle - f_sep);
    let raw = if raw.is_finite() { raw } else { 2.0 * (log_l_mle - log_l_sep) };
    let negative = raw < -NEGATIVE_LAMBDA_TOL;
    Ok(LrResult {
        lambda: raw.max(0.0),
        log_l_mle,
        log_l_sep,
        rho_mle,
        rho_sep,
        mle_report,
        sep_report,
        caveat: negative || !(raw.is_finite()),
    })
}
