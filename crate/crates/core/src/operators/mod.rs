//! Complex matrices and the elementary operators of the spin-cavity space.
//!
//! The composite space is always ordered QD ⊗ field: basis index
//! `q * (N + 1) + n` for QD state `q` (0 = ground, 1 = excited) and Fock
//! level `n`. Density matrices are vectorized by column stacking, so
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

mod dense;
mod sparse;

use alloc::vec::Vec;

pub use dense::DenseMatrix;
pub use sparse::SparseMatrix;

use crate::{Error, Result, C64};

/// Cavity annihilation operator on Fock levels `0..=cutoff`.
pub fn fock_annihilation(cutoff: usize) -> Result<DenseMatrix> {
    if cutoff == 0 {
        return Err(Error::ZeroCutoff);
    }
    let dim = cutoff + 1;
    Ok(DenseMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            C64::new(libm::sqrt(j as f64), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// QD lowering operator σ₋ = |ground⟩⟨excited| in the (ground, excited) basis.
pub fn qd_lowering() -> DenseMatrix {
    let mut m = DenseMatrix::zeros(2, 2);
    m[(0, 1)] = C64::new(1.0, 0.0);
    m
}

/// σ_z = diag(−1, +1) in the (ground, excited) basis, so the ground state
/// has ⟨σ_z⟩ = −1.
pub fn qd_sigma_z() -> DenseMatrix {
    DenseMatrix::from_real_diagonal(&[-1.0, 1.0])
}

pub fn tensor(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a.kron(b)
}

pub fn tensor_sparse(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    a.kron(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QdState {
    Ground,
    Excited,
}

impl QdState {
    fn index(self) -> usize {
        match self {
            QdState::Ground => 0,
            QdState::Excited => 1,
        }
    }
}

/// Truncated QD ⊗ field Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertLayout {
    fock_cutoff: usize,
}

impl HilbertLayout {
    pub const QD_DIM: usize = 2;

    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff == 0 {
            return Err(Error::ZeroCutoff);
        }
        Ok(Self { fock_cutoff })
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_cutoff + 1
    }

    pub fn total_dim(&self) -> usize {
        Self::QD_DIM * self.fock_dim()
    }

    pub fn index(&self, qd: QdState, n: usize) -> usize {
        assert!(n <= self.fock_cutoff, "Fock level {n} above cutoff");
        qd.index() * self.fock_dim() + n
    }

    pub fn decompose(&self, index: usize) -> (QdState, usize) {
        assert!(index < self.total_dim());
        let qd = if index < self.fock_dim() {
            QdState::Ground
        } else {
            QdState::Excited
        };
        (qd, index % self.fock_dim())
    }

    /// Dense `(a, σ₋, σ_z)` lifted to the composite space.
    pub fn operators_dense(&self) -> SpinCavityOperators<DenseMatrix> {
        let id_field = DenseMatrix::identity(self.fock_dim());
        let id_qd = DenseMatrix::identity(Self::QD_DIM);
        let a = fock_annihilation(self.fock_cutoff).expect("cutoff validated");
        SpinCavityOperators {
            a: tensor(&id_qd, &a),
            sigma_minus: tensor(&qd_lowering(), &id_field),
            sigma_z: tensor(&qd_sigma_z(), &id_field),
        }
    }

    /// Sparse `(a, σ₋, σ_z)` lifted to the composite space.
    pub fn operators(&self) -> SpinCavityOperators<SparseMatrix> {
        let id_field = SparseMatrix::identity(self.fock_dim());
        let id_qd = SparseMatrix::identity(Self::QD_DIM);
        let a = SparseMatrix::from_dense(&fock_annihilation(self.fock_cutoff).expect("cutoff validated"));
        SpinCavityOperators {
            a: tensor_sparse(&id_qd, &a),
            sigma_minus: tensor_sparse(&SparseMatrix::from_dense(&qd_lowering()), &id_field),
            sigma_z: tensor_sparse(&SparseMatrix::from_dense(&qd_sigma_z()), &id_field),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinCavityOperators<M> {
    pub a: M,
    pub sigma_minus: M,
    pub sigma_z: M,
}

/// Linear map on column-stacked density matrices of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: SparseMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: SparseMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.rows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: SparseMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// `ρ ↦ A ρ`.
    pub fn left(a: &SparseMatrix) -> Self {
        let dim = a.rows();
        Self {
            dim,
            matrix: SparseMatrix::identity(dim).kron(a),
        }
    }

    /// `ρ ↦ ρ B`.
    pub fn right(b: &SparseMatrix) -> Self {
        let dim = b.rows();
        Self {
            dim,
            matrix: b.transpose().kron(&SparseMatrix::identity(dim)),
        }
    }

    /// `ρ ↦ A ρ B`.
    pub fn sandwich(a: &SparseMatrix, b: &SparseMatrix) -> Self {
        Self {
            dim: a.rows(),
            matrix: b.transpose().kron(a),
        }
    }

    /// `ρ ↦ −i [H, ρ]`.
    pub fn commutator(h: &SparseMatrix) -> Self {
        let minus_i = C64::new(0.0, -1.0);
        Self::left(h).sub(&Self::right(h)).scale(minus_i)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.matrix
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.matrix.to_dense()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            matrix: self.matrix.add(&other.matrix),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            matrix: self.matrix.sub(&other.matrix),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.scale(s),
        }
    }

    pub fn apply(&self, rho: &DenseMatrix) -> DenseMatrix {
        assert_eq!((rho.rows(), rho.cols()), (self.dim, self.dim));
        DenseMatrix::unvectorize(&self.matrix.matvec(&rho.vectorize()), self.dim)
    }
}

/// Lindblad dissipator `ρ ↦ C ρ C† − ½ C†C ρ − ½ ρ C†C`.
pub fn dissipator(c: &SparseMatrix) -> Result<Superoperator> {
    if c.rows() != c.cols() {
        return Err(Error::DimensionMismatch {
            expected: c.rows(),
            found: c.cols(),
        });
    }
    let c_dag = c.adjoint();
    let c_dag_c = c_dag.matmul(c);
    let half = C64::new(0.5, 0.0);
    Ok(Superoperator::sandwich(c, &c_dag)
        .sub(&Superoperator::left(&c_dag_c).scale(half))
        .sub(&Superoperator::right(&c_dag_c).scale(half)))
}

/// Dense-path dissipator matrix acting on column-stacked vectors.
pub fn dissipator_dense(c: &DenseMatrix) -> Result<DenseMatrix> {
    if !c.is_square() {
        return Err(Error::DimensionMismatch {
            expected: c.rows(),
            found: c.cols(),
        });
    }
    let id = DenseMatrix::identity(c.rows());
    let c_dag = c.adjoint();
    let c_dag_c = c_dag.matmul(c);
    let half = C64::new(0.5, 0.0);
    let sandwich = c_dag.transpose().kron(c);
    let left = id.kron(&c_dag_c).scale(half);
    let right = c_dag_c.transpose().kron(&id).scale(half);
    Ok(&(&sandwich - &left) - &right)
}

/// Dense-path `ρ ↦ −i [H, ρ]`.
pub fn commutator_dense(h: &DenseMatrix) -> DenseMatrix {
    let id = DenseMatrix::identity(h.rows());
    (&id.kron(h) - &h.transpose().kron(&id)).scale(C64::new(0.0, -1.0))
}

/// Expectation value `Tr(ρ A)`.
pub fn expect(rho: &DenseMatrix, a: &SparseMatrix) -> C64 {
    // Tr(ρA) = Σ_ij ρ_ji A_ij
    a.triplets().map(|(i, j, v)| rho[(j, i)] * v).sum()
}

/// Vectorized-index pairs `(i, j)` for every diagonal element, for trace rows.
pub fn diagonal_positions(dim: usize) -> Vec<usize> {
    (0..dim).map(|i| i + dim * i).collect()
}
