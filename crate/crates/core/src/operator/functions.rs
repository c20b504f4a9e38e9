use std::f64::consts::PI;

use nalgebra::linalg::{Schur, SymmetricEigen};

use super::{Matrix, Operator, C64, I};
use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

/// Eigendecomposition `A = V diag(values) V^dag` of a Hermitian operator,
/// eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl HermitianEigen {
    /// Decomposes `a` after checking Hermiticity against `policy`.
    pub fn new(a: &Operator, policy: &NumericPolicy) -> Result<Self> {
        let deviation = a.hermiticity_deviation();
        if deviation > policy.hermitian_tol * a.max_abs().max(1.0) {
            return Err(Error::Hermiticity { deviation });
        }
        Ok(Self::of_matrix(a.matrix()))
    }

    /// Decomposes the Hermitian part of `m` without any check.
    pub fn of_matrix(m: &Matrix) -> Self {
        let herm = (m + m.adjoint()).map(|z| z * 0.5);
        let eig = SymmetricEigen::new(herm);
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = Matrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Largest `|eigenvalue|`.
    pub fn abs_max(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// `V diag(f(values)) V^dag`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Matrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &v) in self.values.iter().enumerate() {
            let fv = f(v);
            for r in 0..n {
                scaled[(r, c)] *= fv;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i A t)`.
    pub fn propagator(&self, t: f64) -> Matrix {
        self.map(|v| (-I * v * t).exp())
    }
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn expm_skew(h: &Operator, t: f64) -> Result<Operator> {
    let eig = HermitianEigen::new(h, &NumericPolicy::default())?;
    Ok(h.with_matrix(eig.propagator(t)))
}

/// Result of a principal-branch logarithm.
#[derive(Debug, Clone)]
pub struct LogOutcome {
    /// `i log U`, Hermitian.
    pub generator: Operator,
    /// Eigenphases found within the branch-cut tolerance of `+-pi`.
    pub near_cut_phases: Vec<f64>,
}

impl LogOutcome {
    pub fn branch_warning(&self) -> bool {
        !self.near_cut_phases.is_empty()
    }
}

/// `i log U` on the principal branch, eigenphases in `(-pi, pi]`.
pub fn logm_unitary(u: &Operator) -> Result<LogOutcome> {
    logm_unitary_with(u, &NumericPolicy::default())
}

pub fn logm_unitary_with(u: &Operator, policy: &NumericPolicy) -> Result<LogOutcome> {
    let deviation = u.unitarity_deviation();
    if deviation > policy.unitary_tol {
        return Err(Error::Numerics(format!("logm_unitary on a non-unitary operator (deviation {deviation:e})")));
    }
    let n = u.dim();
    // A normal matrix has diagonal Schur form, so T's diagonal holds the eigenvalues.
    let (q, t) = Schur::new(u.matrix().clone()).unpack();
    let mut near_cut_phases = Vec::new();
    let mut phases = Vec::with_capacity(n);
    for i in 0..n {
        let mut theta = t[(i, i)].arg();
        if theta <= -PI {
            theta = PI;
        }
        if PI - theta.abs() < policy.branch_cut_tol {
            near_cut_phases.push(theta);
        }
        phases.push(theta);
    }
    let mut scaled = q.clone();
    for (c, &theta) in phases.iter().enumerate() {
        // U = e^{i theta} on this eigenvector, so i log U = -theta there.
        for r in 0..n {
            scaled[(r, c)] *= C64::from(-theta);
        }
    }
    let h = scaled * q.adjoint();
    let generator = u.with_matrix(h).hermitian_part();
    Ok(LogOutcome { generator, near_cut_phases })
}

/// Largest singular value.
pub fn op_norm(a: &Operator) -> f64 {
    matrix_op_norm(a.matrix())
}

pub(crate) fn matrix_op_norm(m: &Matrix) -> f64 {
    let scale = m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    let tol = 1e-12 * scale;
    let n = m.nrows();
    let mut herm_dev: f64 = 0.0;
    let mut anti_dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let a = m[(i, j)];
            let b = m[(j, i)].conj();
            herm_dev = herm_dev.max((a - b).norm());
            anti_dev = anti_dev.max((a + b).norm());
        }
    }
    if herm_dev <= tol {
        HermitianEigen::of_matrix(m).abs_max()
    } else if anti_dev <= tol {
        HermitianEigen::of_matrix(&m.map(|z| z * I)).abs_max()
    } else {
        let sv = m.clone().singular_values();
        sv.iter().fold(0.0f64, |acc, &s| acc.max(s))
    }
}
