//! Dense complex operator algebra on `N` sites of local dimension `d`.
//!
//! Site 0 is the leftmost (most significant) tensor factor, so basis index
//! `r` of an `N`-site operator has site `j` digit `(r / d^(N-1-j)) % d`.

mod embed;
mod functions;
mod random;

pub use embed::{embed, LocalTerm, Partition};
pub use functions::{expm_skew, logm_unitary, logm_unitary_with, op_norm, HermitianEigen, LogOutcome};
pub(crate) use functions::matrix_op_norm;
pub use random::{haar_unitary, RngStream};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A square complex matrix acting on `n_sites` subsystems of dimension `local_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    data: Matrix,
    local_dim: usize,
    n_sites: usize,
}

/// `d^n`, or `None` on overflow.
pub(crate) fn checked_dim(local_dim: usize, n_sites: usize) -> Option<usize> {
    local_dim.checked_pow(u32::try_from(n_sites).ok()?)
}

impl Operator {
    pub fn new(data: Matrix, local_dim: usize, n_sites: usize) -> Result<Self> {
        if local_dim < 2 {
            return Err(Error::Dimension(format!("local dimension {local_dim} < 2")));
        }
        if n_sites < 1 {
            return Err(Error::Dimension("operator needs at least one site".into()));
        }
        let dim = checked_dim(local_dim, n_sites)
            .ok_or_else(|| Error::Dimension(format!("{local_dim}^{n_sites} overflows")))?;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for {n_sites} sites of dimension {local_dim} (expected {dim}x{dim})",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { data, local_dim, n_sites })
    }

    /// Wraps a matrix whose dimension is a power of `local_dim`.
    pub fn from_matrix(data: Matrix, local_dim: usize) -> Result<Self> {
        if local_dim < 2 {
            return Err(Error::Dimension(format!("local dimension {local_dim} < 2")));
        }
        let mut n_sites = 0;
        let mut dim = 1usize;
        while dim < data.nrows() {
            dim = dim.saturating_mul(local_dim);
            n_sites += 1;
        }
        Self::new(data, local_dim, n_sites.max(1))
    }

    /// Builds a matrix from row-major real/imaginary pairs.
    pub fn from_rows(rows: &[Vec<C64>], local_dim: usize) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("ragged or non-square rows".into()));
        }
        Self::from_matrix(Matrix::from_fn(n, n, |i, j| rows[i][j]), local_dim)
    }

    pub fn identity(local_dim: usize, n_sites: usize) -> Result<Self> {
        let dim = checked_dim(local_dim, n_sites)
            .ok_or_else(|| Error::Dimension(format!("{local_dim}^{n_sites} overflows")))?;
        Self::new(Matrix::identity(dim, dim), local_dim, n_sites)
    }

    pub fn zeros(local_dim: usize, n_sites: usize) -> Result<Self> {
        let dim = checked_dim(local_dim, n_sites)
            .ok_or_else(|| Error::Dimension(format!("{local_dim}^{n_sites} overflows")))?;
        Self::new(Matrix::zeros(dim, dim), local_dim, n_sites)
    }

    /// Real diagonal operator; `entries.len()` must be a power of `local_dim`.
    pub fn diagonal(entries: &[f64], local_dim: usize) -> Result<Self> {
        let n = entries.len();
        let data = Matrix::from_fn(n, n, |i, j| if i == j { C64::from(entries[i]) } else { ZERO });
        Self::from_matrix(data, local_dim)
    }

    /// Rank-one projector `|psi><psi|`.
    pub fn projector(psi: &[C64], local_dim: usize) -> Result<Self> {
        let n = psi.len();
        Self::from_matrix(Matrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj()), local_dim)
    }

    pub fn sigma_x() -> Self {
        Self::qubit([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn sigma_y() -> Self {
        Self::qubit([[ZERO, -I], [I, ZERO]])
    }

    pub fn sigma_z() -> Self {
        Self::qubit([[ONE, ZERO], [ZERO, -ONE]])
    }

    fn qubit(m: [[C64; 2]; 2]) -> Self {
        Self {
            data: Matrix::from_fn(2, 2, |i, j| m[i][j]),
            local_dim: 2,
            n_sites: 1,
        }
    }

    /// `|a><b| + |b><a|` on a single `d`-level site.
    pub fn transition(local_dim: usize, a: usize, b: usize) -> Result<Self> {
        if a >= local_dim || b >= local_dim {
            return Err(Error::Dimension(format!("level out of range for d = {local_dim}")));
        }
        let mut data = Matrix::zeros(local_dim, local_dim);
        data[(a, b)] += ONE;
        data[(b, a)] += ONE;
        Self::new(data, local_dim, 1)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    pub(crate) fn with_matrix(&self, data: Matrix) -> Self {
        debug_assert_eq!(data.nrows(), self.dim());
        Self {
            data,
            local_dim: self.local_dim,
            n_sites: self.n_sites,
        }
    }

    pub fn adjoint(&self) -> Self {
        self.with_matrix(self.data.adjoint())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.with_matrix(self.data.map(|z| z * factor))
    }

    pub fn scaled_complex(&self, factor: C64) -> Self {
        self.with_matrix(self.data.map(|z| z * factor))
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// Largest elementwise `|a_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest elementwise `|A - A^dag|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Largest elementwise `|U^dag U - 1|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.data.adjoint() * &self.data;
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { ONE } else { ZERO };
                dev = dev.max((prod[(i, j)] - target).norm());
            }
        }
        dev
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Returns the Hermitian part `(A + A^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        self.with_matrix((&self.data + self.data.adjoint()).map(|z| z * 0.5))
    }

    fn check_same_shape(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() || self.local_dim != other.local_dim {
            return Err(Error::Dimension(format!(
                "{}x{} (d = {}) vs {}x{} (d = {})",
                self.dim(),
                self.dim(),
                self.local_dim,
                other.dim(),
                other.dim(),
                other.local_dim
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Operator) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.with_matrix(&self.data + &other.data))
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.with_matrix(&self.data - &other.data))
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.with_matrix(&self.data * &other.data))
    }

    /// `U A U^dag`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Self> {
        self.check_same_shape(u)?;
        Ok(self.with_matrix(&u.data * &self.data * u.data.adjoint()))
    }

    /// `tr[A B]` without forming the product.
    pub fn trace_product(&self, other: &Operator) -> Result<C64> {
        self.check_same_shape(other)?;
        Ok(trace_product(&self.data, &other.data))
    }

    /// Frobenius norm `sqrt(tr[A^dag A])`.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `A * v` on a state vector.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension(format!("vector of length {} for {}x{} operator", v.len(), self.dim(), self.dim())));
        }
        let n = self.dim();
        Ok((0..n).map(|i| (0..n).map(|j| self.data[(i, j)] * v[j]).sum()).collect())
    }
}

pub(crate) fn trace_product(a: &Matrix, b: &Matrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Kronecker product in input order.
pub fn tensor(ops: &[Operator]) -> Result<Operator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::Dimension("tensor product of an empty list".into()))?;
    let mut data = first.data.clone();
    let mut n_sites = first.n_sites;
    for op in rest {
        if op.local_dim != first.local_dim {
            return Err(Error::Dimension(format!(
                "tensor factors with local dimensions {} and {}",
                first.local_dim, op.local_dim
            )));
        }
        data = data.kronecker(&op.data);
        n_sites += op.n_sites;
    }
    Operator::new(data, first.local_dim, n_sites)
}

/// `A^{(x)n}`.
pub fn tensor_power(op: &Operator, n: usize) -> Result<Operator> {
    tensor(&vec![op.clone(); n])
}

/// `AB - BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.check_same_shape(b)?;
    Ok(a.with_matrix(&a.data * &b.data - &b.data * &a.data))
}
