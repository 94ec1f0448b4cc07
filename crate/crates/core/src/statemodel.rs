//! Werner states and the PPT separability test.

use crate::error::{Error, Result};
use crate::linalg::{partial_transpose, DensityMatrix, HermitianMatrix, Mat4, C64};

/// Default tolerance for [`is_ppt`].
pub const DEFAULT_PPT_TOL: f64 = 1e-9;

/// Mixing weight of a Werner state, restricted to the range where the
/// family is positive semidefinite.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct WernerParam(f64);

impl WernerParam {
    pub const MIN: f64 = -1.0 / 3.0;
    pub const MAX: f64 = 1.0;
    /// Largest separable weight.
    pub const SEPARABLE_BOUNDARY: f64 = 1.0 / 3.0;

    pub fn new(q: f64) -> Result<Self> {
        // Small slack so that -1.0/3.0 typed by hand is accepted.
        if q.is_finite() && q >= Self::MIN - 1e-15 && q <= Self::MAX {
            Ok(WernerParam(q))
        } else {
            Err(Error::WernerOutOfRange(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Singlet (|01⟩ − |10⟩)/√2 as a state vector.
pub fn singlet_vector() -> [C64; 4] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [
        C64::new(0.0, 0.0),
        C64::new(r, 0.0),
        C64::new(-r, 0.0),
        C64::new(0.0, 0.0),
    ]
}

pub fn singlet_projector() -> HermitianMatrix {
    let psi = singlet_vector();
    HermitianMatrix::symmetrize(Mat4::outer(&psi, &psi))
}

/// ρ_q = q·Π_singlet + (1 − q)·I/4.
pub fn werner(q: WernerParam) -> DensityMatrix {
    let q = q.value();
    let m = singlet_projector()
        .scale(q)
        .add(&HermitianMatrix::identity().scale((1.0 - q) / 4.0));
    DensityMatrix::new_unchecked(m)
}

/// Convenience wrapper validating `q` first.
pub fn werner_q(q: f64) -> Result<DensityMatrix> {
    Ok(werner(WernerParam::new(q)?))
}

/// True iff the partial transpose has no eigenvalue below `-tol`.
/// For two qubits this is exactly separability.
pub fn is_ppt(rho: &DensityMatrix, tol: f64) -> bool {
    partial_transpose(rho.as_hermitian()).min_eigenvalue() >= -tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_transpose_on, Factor};
    use approx::assert_abs_diff_eq;

    #[test]
    fn werner_endpoints() {
        let id4 = HermitianMatrix::identity().scale(0.25);
        assert!(werner_q(0.0).unwrap().as_hermitian().sub(&id4).frobenius_norm() < 1e-15);
        assert!(werner_q(1.0).unwrap().as_hermitian().sub(&singlet_projector()).frobenius_norm() < 1e-15);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(WernerParam::new(1.0001).is_err());
        assert!(WernerParam::new(-0.34).is_err());
        assert!(WernerParam::new(f64::NAN).is_err());
        assert!(WernerParam::new(-1.0 / 3.0).is_ok());
    }

    #[test]
    fn boundary_state_pt_eigenvalue_vanishes() {
        let rho = werner_q(1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(rho.min_pt_eigenvalue(), 0.0, epsilon = 1e-12);
        assert!(is_ppt(&rho, DEFAULT_PPT_TOL));
    }

    #[test]
    fn ppt_examples() {
        assert!(is_ppt(&werner_q(0.25).unwrap(), DEFAULT_PPT_TOL));
        let rho = werner_q(0.6).unwrap();
        assert!(!is_ppt(&rho, DEFAULT_PPT_TOL));
        assert_abs_diff_eq!(rho.min_pt_eigenvalue(), -0.2, epsilon = 1e-12);
    }

    #[test]
    fn ppt_grid_matches_boundary() {
        for i in 0..50 {
            let q = -1.0 / 3.0 + (4.0 / 3.0) * i as f64 / 49.0;
            let rho = werner_q(q).unwrap();
            assert_eq!(is_ppt(&rho, DEFAULT_PPT_TOL), q <= 1.0 / 3.0 + 1e-9, "q = {q}");
        }
    }

    #[test]
    fn werner_spectra_closed_form() {
        for i in 0..21 {
            let q = -1.0 / 3.0 + (4.0 / 3.0) * i as f64 / 20.0;
            let rho = werner_q(q).unwrap();
            let mut want = [(1.0 - q) / 4.0, (1.0 - q) / 4.0, (1.0 - q) / 4.0, (1.0 + 3.0 * q) / 4.0];
            want.sort_by(|a, b| b.total_cmp(a));
            for (w, x) in rho.as_hermitian().eig().values.iter().zip(want) {
                assert_abs_diff_eq!(*w, x, epsilon = 1e-12);
            }
            // PT spectrum: (1+q)/4 three times and (1−3q)/4, on either factor.
            let mut want_pt = [(1.0 + q) / 4.0, (1.0 + q) / 4.0, (1.0 + q) / 4.0, (1.0 - 3.0 * q) / 4.0];
            want_pt.sort_by(|a, b| b.total_cmp(a));
            for factor in [Factor::First, Factor::Second] {
                let e = partial_transpose_on(rho.as_hermitian(), factor).eig();
                for (w, x) in e.values.iter().zip(want_pt) {
                    assert_abs_diff_eq!(*w, x, epsilon = 1e-12);
                }
            }
        }
    }
}
