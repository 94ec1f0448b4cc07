//! Dense 4×4 complex linear algebra for two-qubit operators.
//!
//! Everything here is fixed-size: a two-qubit operator is a 4×4 complex
//! matrix in the ordered computational basis |00⟩, |01⟩, |10⟩, |11⟩.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Side length of every operator handled by the crate.
pub const DIM: usize = 4;

/// Tolerance for conjugate symmetry when constructing a [`HermitianMatrix`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for a [`DensityMatrix`].
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a [`DensityMatrix`].
pub const PSD_TOL: f64 = 1e-10;

const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

/// A general 4×4 complex matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat4(pub [[C64; DIM]; DIM]);

impl Mat4 {
    pub fn zero() -> Self {
        Mat4([[C64::new(0.0, 0.0); DIM]; DIM])
    }

    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_diag(d: [f64; DIM]) -> Self {
        Self::from_fn(|i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[C64; DIM], v: &[C64; DIM]) -> Self {
        Self::from_fn(|i, j| u[i] * v[j].conj())
    }

    /// Kronecker product of two 2×2 matrices.
    pub fn kron2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> Self {
        Self::from_fn(|i, j| a[i / 2][j / 2] * b[i % 2][j % 2])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..DIM).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Re Tr(A B) for Hermitian A, B this is the Frobenius inner product.
    pub fn trace_product_re(&self, other: &Mat4) -> f64 {
        let mut acc = 0.0;
        for i in 0..DIM {
            for k in 0..DIM {
                let a = self.0[i][k];
                let b = other.0[k][i];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    /// Largest deviation from conjugate symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..DIM {
            for j in i..DIM {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }
}

impl fmt::Debug for Mat4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat4[")?;
        for row in &self.0 {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, rhs: Mat4) -> Mat4 {
        Mat4::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, rhs: Mat4) -> Mat4 {
        Mat4::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

impl Neg for Mat4 {
    type Output = Mat4;
    fn neg(self) -> Mat4 {
        self.scale(-1.0)
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = Mat4::zero();
        for i in 0..DIM {
            for k in 0..DIM {
                let a = self.0[i][k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..DIM {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

/// A 4×4 complex Hermitian matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct HermitianMatrix(Mat4);

impl HermitianMatrix {
    /// Validates conjugate symmetry within [`HERMITIAN_TOL`] and stores the
    /// exactly-symmetrized matrix.
    pub fn new(m: Mat4) -> Result<Self> {
        let defect = m.hermitian_defect();
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::symmetrize(m))
    }

    /// Projects onto the Hermitian part, (M + M†)/2.
    pub fn symmetrize(m: Mat4) -> Self {
        let mut out = m;
        for i in 0..DIM {
            out.0[i][i] = C64::new(m.0[i][i].re, 0.0);
            for j in (i + 1)..DIM {
                let z = (m.0[i][j] + m.0[j][i].conj()) * 0.5;
                out.0[i][j] = z;
                out.0[j][i] = z.conj();
            }
        }
        HermitianMatrix(out)
    }

    pub fn identity() -> Self {
        HermitianMatrix(Mat4::identity())
    }

    pub fn from_real_diag(d: [f64; DIM]) -> Self {
        HermitianMatrix(Mat4::from_real_diag(d))
    }

    #[inline]
    pub fn mat(&self) -> &Mat4 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix(self.0.scale(s))
    }

    pub fn add(&self, other: &HermitianMatrix) -> Self {
        HermitianMatrix(self.0 + other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Self {
        HermitianMatrix(self.0 - other.0)
    }

    /// Tr(A B), real for Hermitian arguments.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        self.0.trace_product_re(&other.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// A · self · A†, which stays Hermitian.
    pub fn congruence(&self, a: &Mat4) -> Self {
        Self::symmetrize(*a * self.0 * a.adjoint())
    }

    pub fn eig(&self) -> Eigen {
        eig_hermitian(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().values[DIM - 1]
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Copy, Debug)]
pub struct Eigen {
    /// Eigenvalues in descending order.
    pub values: [f64; DIM],
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: Mat4,
}

impl Eigen {
    /// V · diag(w) · V†.
    pub fn reconstruct_with(&self, w: &[f64; DIM]) -> HermitianMatrix {
        let v = &self.vectors;
        let m = Mat4::from_fn(|i, j| {
            (0..DIM)
                .map(|k| v.0[i][k] * v.0[j][k].conj() * w[k])
                .sum()
        });
        HermitianMatrix::symmetrize(m)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(&self.values)
    }
}

/// Eigendecomposition by cyclic complex Jacobi rotations.
pub fn eig_hermitian(m: &HermitianMatrix) -> Eigen {
    let mut a = m.0;
    let mut v = Mat4::identity();
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..DIM)
            .flat_map(|i| (0..DIM).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.0[i][j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..DIM - 1 {
            for q in (p + 1)..DIM {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: [usize; DIM] = [0, 1, 2, 3];
    order.sort_by(|&i, &j| a.0[j][j].re.total_cmp(&a.0[i][i].re));
    let values = order.map(|k| a.0[k][k].re);
    let vectors = Mat4::from_fn(|i, j| v.0[i][order[j]]);
    Eigen { values, vectors }
}

/// Annihilates a[p][q] with the unitary J whose nontrivial block is
/// [[c, s·e^{iφ}], [−s·e^{−iφ}, c]], applying A ← J†AJ and V ← VJ.
fn rotate(a: &mut Mat4, v: &mut Mat4, p: usize, q: usize) {
    let apq = a.0[p][q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a.0[p][p].re;
    let aqq = a.0[q][q].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let jpq = phase * s; // J[p][q]
    let jqp = -phase.conj() * s; // J[q][p]

    // A ← A J (columns p, q)
    for i in 0..DIM {
        let aip = a.0[i][p];
        let aiq = a.0[i][q];
        a.0[i][p] = aip * c + aiq * jqp;
        a.0[i][q] = aip * jpq + aiq * c;
    }
    // A ← J† A (rows p, q)
    for j in 0..DIM {
        let apj = a.0[p][j];
        let aqj = a.0[q][j];
        a.0[p][j] = apj * c + aqj * jqp.conj();
        a.0[q][j] = apj * jpq.conj() + aqj * c;
    }
    a.0[p][q] = C64::new(0.0, 0.0);
    a.0[q][p] = C64::new(0.0, 0.0);
    a.0[p][p].im = 0.0;
    a.0[q][q].im = 0.0;
    for i in 0..DIM {
        let vip = v.0[i][p];
        let viq = v.0[i][q];
        v.0[i][p] = vip * c + viq * jqp;
        v.0[i][q] = vip * jpq + viq * c;
    }
}

/// Which tensor factor a partial transpose acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Partial transpose on the second qubit: ⟨ab|X^Γ|cd⟩ = ⟨ad|X|cb⟩.
pub fn partial_transpose(m: &HermitianMatrix) -> HermitianMatrix {
    partial_transpose_on(m, Factor::Second)
}

pub fn partial_transpose_on(m: &HermitianMatrix, factor: Factor) -> HermitianMatrix {
    let src = &m.0;
    let out = Mat4::from_fn(|i, j| {
        let (a, b) = (i / 2, i % 2);
        let (c, d) = (j / 2, j % 2);
        match factor {
            Factor::Second => src.0[2 * a + d][2 * c + b],
            Factor::First => src.0[2 * c + b][2 * a + d],
        }
    });
    HermitianMatrix(out)
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_simplex(v: &[f64; DIM]) -> [f64; DIM] {
    let mut sorted = *v;
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k as f64 + 1.0);
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    v.map(|x| (x - tau).max(0.0))
}

/// Frobenius-nearest unit-trace positive semidefinite matrix.
pub fn project_state(m: &HermitianMatrix) -> DensityMatrix {
    let e = m.eig();
    let w = project_simplex(&e.values);
    DensityMatrix(e.reconstruct_with(&w))
}

/// A two-qubit quantum state: unit trace and positive semidefinite.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(m: HermitianMatrix) -> Result<Self> {
        let tr = m.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = m.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityMatrix(m))
    }

    /// Wraps without validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(m: HermitianMatrix) -> Self {
        DensityMatrix(m)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(HermitianMatrix::identity().scale(0.25))
    }

    #[inline]
    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    #[inline]
    pub fn mat(&self) -> &Mat4 {
        self.0.mat()
    }

    /// (1−t)·self + t·other, a state for t ∈ [0, 1].
    pub fn mix(&self, other: &DensityMatrix, t: f64) -> Self {
        DensityMatrix(self.0.scale(1.0 - t).add(&other.0.scale(t)))
    }

    /// Smallest eigenvalue of the partial transpose.
    pub fn min_pt_eigenvalue(&self) -> f64 {
        partial_transpose(&self.0).min_eigenvalue()
    }

    /// Trace distance ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        0.5 * self.0.sub(&other.0).eig().values.iter().map(|x| x.abs()).sum::<f64>()
    }
}
