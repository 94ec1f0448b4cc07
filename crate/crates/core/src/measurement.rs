//! POVMs, Born-rule probabilities and the measurement dimension.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, HermitianMatrix, Mat4, C64, DIM};
use crate::statemodel::singlet_projector;

const EFFECT_PSD_TOL: f64 = 1e-12;
const COMPLETENESS_TOL: f64 = 1e-10;
/// Singular values at or below this count as zero when computing dim(M).
pub const RANK_TOL: f64 = 1e-8;

/// Number of traceless real parameters of a two-qubit state.
pub const STATE_PARAMS: usize = DIM * DIM - 1;

/// Orthonormal Hermitian basis σ_a ⊗ σ_b / 2; index 0 is I/2, the other
/// fifteen are traceless.
fn pauli_basis() -> &'static [HermitianMatrix; 16] {
    static BASIS: OnceLock<[HermitianMatrix; 16]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let paulis = [
            [[one, z], [z, one]],
            [[z, one], [one, z]],
            [[z, -i], [i, z]],
            [[one, z], [z, -one]],
        ];
        std::array::from_fn(|k| {
            HermitianMatrix::symmetrize(Mat4::kron2(&paulis[k / 4], &paulis[k % 4]).scale(0.5))
        })
    })
}

/// Coordinates of a Hermitian matrix in the Pauli-product basis.
pub fn pauli_coordinates(m: &HermitianMatrix) -> [f64; 16] {
    let basis = pauli_basis();
    std::array::from_fn(|k| m.inner(&basis[k]))
}

/// Inverse of [`pauli_coordinates`].
pub fn from_pauli_coordinates(x: &[f64; 16]) -> HermitianMatrix {
    let basis = pauli_basis();
    let mut acc = Mat4::zero();
    for (b, &c) in basis.iter().zip(x) {
        acc = acc + b.mat().scale(c);
    }
    HermitianMatrix::symmetrize(acc)
}

/// A positive operator-valued measure on two qubits.
#[derive(Clone, Debug)]
pub struct Povm {
    name: String,
    effects: Vec<HermitianMatrix>,
    dimension: usize,
    /// Moore–Penrose pseudo-inverse of the traceless Born map, 15 × m.
    pinv: DMatrix<f64>,
    /// Tr(E_k)/4: the outcome probabilities of the maximally mixed state.
    offsets: Vec<f64>,
}

impl Povm {
    pub fn new(name: impl Into<String>, effects: Vec<HermitianMatrix>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::InvalidPovm("no effects".into()));
        }
        let mut sum = Mat4::zero();
        for (k, e) in effects.iter().enumerate() {
            let min = e.min_eigenvalue();
            if min < -EFFECT_PSD_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} has negative eigenvalue {min:e}"
                )));
            }
            sum = sum + *e.mat();
        }
        let defect = (sum - Mat4::identity()).frobenius_norm();
        if defect > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {defect:e}"
            )));
        }

        let m = effects.len();
        let born = DMatrix::from_fn(m, STATE_PARAMS, |k, a| {
            effects[k].inner(&pauli_basis()[a + 1])
        });
        let svd = born.clone().svd(true, true);
        let dimension = svd.singular_values.iter().filter(|&&s| s > RANK_TOL).count();
        let pinv = svd
            .pseudo_inverse(RANK_TOL)
            .map_err(|e| Error::InvalidPovm(format!("pseudo-inverse failed: {e}")))?;
        let offsets = effects.iter().map(|e| e.trace() / 4.0).collect();

        Ok(Povm { name: name.into(), effects, dimension, pinv, offsets })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// Number of independent state-dependent outcome probabilities.
    pub fn measurement_dimension(&self) -> usize {
        self.dimension
    }

    /// Same effects in a new order: `order[k]` is the old index placed at k.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let effects = order.iter().map(|&k| self.effects[k]).collect();
        Povm::new(format!("{}-permuted", self.name), effects)
    }

    /// Minimum-norm Hermitian unit-trace matrix whose Born probabilities
    /// best fit `freqs` in least squares. It need not be positive.
    pub fn linear_inversion(&self, freqs: &[f64]) -> HermitianMatrix {
        let rhs = nalgebra::DVector::from_iterator(
            self.len(),
            freqs.iter().zip(&self.offsets).map(|(f, c)| f - c),
        );
        let x = &self.pinv * rhs;
        let mut coords = [0.0; 16];
        coords[0] = 0.5;
        coords[1..].copy_from_slice(x.as_slice());
        from_pauli_coordinates(&coords)
    }

    /// Re Tr(E_k M) for every effect, with no clipping.
    pub fn raw_probabilities(&self, m: &HermitianMatrix) -> Vec<f64> {
        self.effects.iter().map(|e| e.inner(m)).collect()
    }
}

/// Outcome probabilities of a measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for ProbabilityVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// p_k = Tr(E_k ρ), clipped at zero and renormalized.
pub fn born_probabilities(povm: &Povm, rho: &DensityMatrix) -> ProbabilityVector {
    let mut p: Vec<f64> = povm
        .raw_probabilities(rho.as_hermitian())
        .into_iter()
        .map(|x| x.max(0.0))
        .collect();
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() < 1e-10 && total > 0.0 {
        p.iter_mut().for_each(|x| *x /= total);
    }
    ProbabilityVector(p)
}

/// Two-outcome singlet witness: index 0 is the singlet projector ("yes"),
/// index 1 its complement.
pub fn witness_povm() -> Povm {
    let yes = singlet_projector();
    let no = HermitianMatrix::identity().sub(&yes);
    Povm::new("witness", vec![yes, no]).expect("witness POVM is valid")
}

/// Tetrahedron directions of the single-qubit SIC-POVM.
pub fn tetrahedron() -> [[f64; 3]; 4] {
    let s = 1.0 / 3.0_f64.sqrt();
    [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
}

/// Single-qubit effects (1 + n·σ)/4, for each tetrahedron direction n.
pub fn qubit_sic_effects() -> [[[C64; 2]; 2]; 4] {
    tetrahedron().map(|[x, y, z]| {
        [
            [C64::new((1.0 + z) / 4.0, 0.0), C64::new(x / 4.0, -y / 4.0)],
            [C64::new(x / 4.0, y / 4.0), C64::new((1.0 - z) / 4.0, 0.0)],
        ]
    })
}

/// The 16-outcome product SIC-POVM A_j ⊗ A_k, j slow and k fast.
pub fn product_sic_povm() -> Povm {
    let a = qubit_sic_effects();
    let effects = (0..16)
        .map(|jk| HermitianMatrix::symmetrize(Mat4::kron2(&a[jk / 4], &a[jk % 4])))
        .collect();
    Povm::new("product_sic", effects).expect("product SIC-POVM is valid")
}

/// Number of independent probabilities, dim(M).
pub fn measurement_dimension(povm: &Povm) -> usize {
    povm.measurement_dimension()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statemodel::werner_q;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pauli_basis_is_orthonormal() {
        let b = pauli_basis();
        for i in 0..16 {
            for j in 0..16 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(b[i].inner(&b[j]), want, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn witness_structure() {
        let w = witness_povm();
        assert_eq!(w.len(), 2);
        assert_abs_diff_eq!(w.effects()[0].trace(), 1.0, epsilon = 1e-15);
        assert_eq!(w.measurement_dimension(), 1);
    }

    #[test]
    fn witness_born_probabilities() {
        let w = witness_povm();
        let p = born_probabilities(&w, &werner_q(0.0).unwrap());
        assert_abs_diff_eq!(p[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.75, epsilon = 1e-15);
        let p = born_probabilities(&w, &werner_q(1.0).unwrap());
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-15);
        for i in 0..=12 {
            let q = -1.0 / 3.0 + i as f64 / 9.0;
            let rho = werner_q(q).unwrap();
            // brute-force matrix product trace
            let prod = *w.effects()[0].mat() * *rho.mat();
            let p_yes = born_probabilities(&w, &rho)[0];
            assert_abs_diff_eq!(p_yes, prod.trace().re, epsilon = 1e-14);
            assert_abs_diff_eq!(p_yes, (1.0 + 3.0 * q) / 4.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn product_sic_structure() {
        let sic = product_sic_povm();
        assert_eq!(sic.len(), 16);
        assert_eq!(sic.measurement_dimension(), STATE_PARAMS);
        for a in qubit_sic_effects() {
            assert_abs_diff_eq!(a[0][0].re + a[1][1].re, 0.5, epsilon = 1e-15);
        }
        for e in sic.effects() {
            assert_abs_diff_eq!(e.trace(), 0.25, epsilon = 1e-15);
            let vals = e.eig().values;
            assert_abs_diff_eq!(vals[0], 0.25, epsilon = 1e-12);
            assert!(vals[1].abs() < 1e-12);
        }
        let p = born_probabilities(&sic, &DensityMatrix::maximally_mixed());
        for x in p.iter() {
            assert_abs_diff_eq!(*x, 1.0 / 16.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn trivial_povm_has_dimension_zero() {
        let half = HermitianMatrix::identity().scale(0.5);
        let povm = Povm::new("coin", vec![half, half]).unwrap();
        assert_eq!(measurement_dimension(&povm), 0);
    }

    #[test]
    fn invalid_povms_rejected() {
        let id = HermitianMatrix::identity();
        assert!(Povm::new("double", vec![id, id]).is_err());
        let bad = HermitianMatrix::from_real_diag([1.5, 1.0, 1.0, 1.0]);
        let fix = HermitianMatrix::from_real_diag([-0.5, 0.0, 0.0, 0.0]);
        assert!(Povm::new("negative", vec![bad, fix]).is_err());
        assert!(Povm::new("empty", vec![]).is_err());
    }

    #[test]
    fn linear_inversion_recovers_state_from_exact_sic_probabilities() {
        let sic = product_sic_povm();
        let rho = werner_q(0.8).unwrap();
        let p = born_probabilities(&sic, &rho);
        let est = sic.linear_inversion(&p);
        assert!(est.sub(rho.as_hermitian()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn pauli_round_trip() {
        let rho = werner_q(0.3).unwrap();
        let back = from_pauli_coordinates(&pauli_coordinates(rho.as_hermitian()));
        assert!(back.sub(rho.as_hermitian()).frobenius_norm() < 1e-15);
    }
}
