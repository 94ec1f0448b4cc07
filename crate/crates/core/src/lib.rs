//! Likelihood-ratio quantification of two-qubit entanglement evidence.
//!
//! Given outcome counts from a POVM measured on N i.i.d. copies of a
//! two-qubit state, [`lambda_statistic`] computes
//! `λ = 2 (max ln L over all states − max ln L over PPT states)`, the weight
//! of evidence that the source is entangled. [`lrtest`] converts λ into a
//! confidence level, and [`montecarlo`] simulates the distribution of λ for
//! chosen states.

pub mod error;
pub mod estimation;
pub mod linalg;
pub mod lrtest;
pub mod measurement;
pub mod montecarlo;
pub mod schema;
pub mod statemodel;

pub use error::{Error, Result};
pub use estimation::{
    empirical_entropy, lambda_statistic, log_likelihood, mle, mle_separable, CountData,
    OptimizerOptions, OptimizerReport,
};
pub use linalg::{
    eig_hermitian, partial_transpose, project_state, DensityMatrix, Eigen, HermitianMatrix, Mat4,
};
pub use lrtest::{
    chi2_ccdf, confidence_level, fit_semi_chi2_dof, lambda_witness, semi_chi2_ccdf, Ansatz,
    ConfidenceReport, LrResult, SemiChi2Fit,
};
pub use measurement::{
    born_probabilities, measurement_dimension, product_sic_povm, witness_povm, Povm,
    ProbabilityVector,
};
pub use montecarlo::{
    empirical_ccdf, run_trials, sample_counts, EmpiricalCcdf, StateSpec, TrialConfig,
    TrialOutcome, ZERO_LAMBDA,
};
pub use statemodel::{is_ppt, werner, werner_q, WernerParam};
