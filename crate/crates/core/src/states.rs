//! Density matrices and the distances between them.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{tensor, HermitianEigen, Matrix, Operator, C64};
use crate::policy::NumericPolicy;

/// Positive semidefinite, unit-trace operator.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: Operator,
    eigvals: OnceLock<Vec<f64>>,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.op == other.op
    }
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        Self::new_with(op, &NumericPolicy::default())
    }

    pub fn new_with(op: Operator, policy: &NumericPolicy) -> Result<Self> {
        let dev = op.hermiticity_deviation();
        if dev > policy.hermitian_tol {
            return Err(Error::State(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > policy.trace_tol || tr.im.abs() > policy.trace_tol {
            return Err(Error::State(format!("trace {tr} != 1")));
        }
        let eig = HermitianEigen::of_matrix(op.matrix());
        if eig.min() < -policy.psd_tol {
            return Err(Error::State(format!("negative eigenvalue {:e}", eig.min())));
        }
        let cell = OnceLock::new();
        let _ = cell.set(eig.values);
        Ok(Self { op, eigvals: cell })
    }

    /// Wraps an operator known to be a state (e.g. the unitary image of one).
    pub(crate) fn new_unchecked(op: Operator) -> Self {
        Self { op, eigvals: OnceLock::new() }
    }

    /// `|psi><psi|` for a normalised `psi`.
    pub fn pure(psi: &[C64], local_dim: usize) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::State("zero vector".into()));
        }
        let normalized: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(Operator::projector(&normalized, local_dim)?)
    }

    /// Computational basis state `|level>` of one `d`-level site.
    pub fn basis(local_dim: usize, level: usize) -> Result<Self> {
        if level >= local_dim {
            return Err(Error::State(format!("level {level} out of range for d = {local_dim}")));
        }
        let mut psi = vec![C64::new(0.0, 0.0); local_dim];
        psi[level] = C64::new(1.0, 0.0);
        Self::pure(&psi, local_dim)
    }

    pub fn maximally_mixed(local_dim: usize, n_sites: usize) -> Result<Self> {
        let id = Operator::identity(local_dim, n_sites)?;
        let dim = id.dim() as f64;
        Self::new(id.scaled(1.0 / dim))
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &Matrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Spectrum, ascending.
    pub fn eigvals(&self) -> &[f64] {
        self.eigvals
            .get_or_init(|| HermitianEigen::of_matrix(self.op.matrix()).values)
    }

    pub fn purity(&self) -> f64 {
        crate::operator::trace_product(self.matrix(), self.matrix()).re
    }

    /// `tr[A rho]` (real part; callers pass Hermitian `A`).
    pub fn expectation(&self, a: &Operator) -> Result<f64> {
        Ok(a.trace_product(&self.op)?.re)
    }

    /// `rho^{(x)m}`.
    pub fn tensor_power(&self, m: usize) -> Result<Self> {
        let op = tensor(&vec![self.op.clone(); m])?;
        Ok(Self::new_unchecked(op))
    }

    /// `U rho U^dag`.
    pub fn evolve(&self, u: &Operator) -> Result<Self> {
        Ok(Self::new_unchecked(self.op.conjugate_by(u)?))
    }

    /// PSD square root. Eigenvalues below the eigensolver noise floor are
    /// clipped to zero, negative drift included.
    pub fn sqrt(&self) -> Matrix {
        let eig = HermitianEigen::of_matrix(self.matrix());
        let floor = noise_floor(eig.abs_max());
        eig.map(|v| C64::from(if v > floor { v.sqrt() } else { 0.0 }))
    }
}

/// Eigenvalues of magnitude below this are indistinguishable from zero.
fn noise_floor(scale: f64) -> f64 {
    64.0 * f64::EPSILON * scale
}

/// Tensor product of states in order.
pub fn tensor_states(states: &[DensityMatrix]) -> Result<DensityMatrix> {
    let ops: Vec<Operator> = states.iter().map(|s| s.op.clone()).collect();
    Ok(DensityMatrix::new_unchecked(tensor(&ops)?))
}

/// `exp(-eps I) / tr exp(-eps I)`, built in the eigenbasis of `I`.
pub fn thermal_state(internal: &Operator, inverse_temperature: f64) -> Result<DensityMatrix> {
    let n = internal.dim();
    let m = internal.matrix();
    let is_diagonal = (0..n).all(|r| (0..n).all(|c| r == c || m[(r, c)].norm() == 0.0));
    let (levels, basis) = if is_diagonal {
        ((0..n).map(|i| m[(i, i)].re).collect::<Vec<_>>(), None)
    } else {
        let eig = HermitianEigen::new(internal, &NumericPolicy::default())?;
        (eig.values, Some(eig.vectors))
    };
    // shift by the dominant exponent so no weight overflows
    let exponents: Vec<f64> = levels.iter().map(|&l| -inverse_temperature * l).collect();
    let top = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exponents.iter().map(|&e| (e - top).exp()).collect();
    let z: f64 = weights.iter().sum();
    let data = match basis {
        None => Matrix::from_fn(n, n, |r, c| if r == c { C64::from(weights[r] / z) } else { C64::new(0.0, 0.0) }),
        Some(v) => {
            let mut scaled = v.clone();
            for (c, w) in weights.iter().enumerate() {
                for r in 0..n {
                    scaled[(r, c)] *= w / z;
                }
            }
            scaled * v.adjoint()
        }
    };
    DensityMatrix::new(internal.with_matrix(data).hermitian_part())
}

/// Uhlmann fidelity `tr[sqrt(sqrt(rho) sigma sqrt(rho))]^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::State(format!("fidelity of {}- and {}-dimensional states", rho.dim(), sigma.dim())));
    }
    let s = rho.sqrt();
    let inner = &s * sigma.matrix() * &s;
    let eig = HermitianEigen::of_matrix(&inner);
    let floor = noise_floor(eig.abs_max());
    let root_sum: f64 = eig.values.iter().filter(|&&v| v > floor).map(|v| v.sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// Bures angle between `m` copies, `arccos(F(rho, sigma)^{m/2})`.
pub fn bures_angle(rho: &DensityMatrix, sigma: &DensityMatrix, copies: usize) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    Ok(f.powf(copies as f64 / 2.0).clamp(0.0, 1.0).acos())
}

/// Bures angle evaluated on the explicit `m`-copy states.
pub fn bures_angle_direct(rho: &DensityMatrix, sigma: &DensityMatrix, copies: usize) -> Result<f64> {
    let f = fidelity(&rho.tensor_power(copies)?, &sigma.tensor_power(copies)?)?;
    Ok(f.sqrt().clamp(0.0, 1.0).acos())
}

/// Half the sum of singular values of `rho - sigma`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    let diff = rho.matrix() - sigma.matrix();
    let eig = HermitianEigen::of_matrix(&diff);
    Ok(0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>())
}

/// Sorted spectra agree elementwise within `tol`.
pub fn same_spectrum(rho: &DensityMatrix, sigma: &DensityMatrix, tol: f64) -> bool {
    rho.dim() == sigma.dim()
        && rho
            .eigvals()
            .iter()
            .zip(sigma.eigvals())
            .all(|(a, b)| (a - b).abs() <= tol)
}

/// `||rho - 1/D||_F`.
pub fn radius_to_mixed(rho: &DensityMatrix) -> f64 {
    let n = rho.dim();
    let inv = 1.0 / n as f64;
    let m = rho.matrix();
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            let z = if r == c { m[(r, c)] - inv } else { m[(r, c)] };
            acc += z.norm_sqr();
        }
    }
    acc.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BallStatus {
    WithinDocumentedBound,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallVerdict {
    pub frobenius_radius: f64,
    pub threshold: f64,
    pub verdict: BallStatus,
}

/// Radius of a Frobenius ball of separable states around `1/D`.
///
/// The default is the Gurvits–Barnum multipartite lower bound: every
/// unnormalised operator `1 + X` with `||X||_F <= 2^{1 - N/2}` on `N` parties
/// is separable (L. Gurvits and H. Barnum, Phys. Rev. A 68, 042312 (2003)).
/// For unit-trace states that is `||rho - 1/D||_F <= 2^{1 - N/2} / D`.
/// It is a sufficient condition only; [`BallStatus::Inconclusive`] never
/// means entangled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct SeparableBall {
    /// Radius for the unnormalised `1 + X` form; `None` uses `2^{1 - N/2}`.
    pub unnormalized_radius: Option<f64>,
}


impl SeparableBall {
    pub fn threshold(&self, n_sites: usize, dim: usize) -> f64 {
        let r = self
            .unnormalized_radius
            .unwrap_or_else(|| 2f64.powf(1.0 - n_sites as f64 / 2.0));
        r / dim as f64
    }
}

pub fn ball_check(rho: &DensityMatrix) -> BallVerdict {
    ball_check_with(rho, &SeparableBall::default())
}

pub fn ball_check_with(rho: &DensityMatrix, ball: &SeparableBall) -> BallVerdict {
    let frobenius_radius = radius_to_mixed(rho);
    let threshold = ball.threshold(rho.op().n_sites(), rho.dim());
    let verdict = if frobenius_radius <= threshold {
        BallStatus::WithinDocumentedBound
    } else {
        BallStatus::Inconclusive
    };
    BallVerdict { frobenius_radius, threshold, verdict }
}
