use nalgebra::linalg::QR;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{checked_dim, Matrix, Operator, C64};
use crate::error::{Error, Result};

/// Counter-based random stream keyed by `(seed, stream_id)`.
///
/// Distinct stream ids select disjoint ChaCha keystreams for the same seed,
/// so parallel workers never share state.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Complex Gaussian with `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.normal() * s, self.normal() * s)
    }

    /// Fisher-Yates shuffle of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.index(i + 1);
            p.swap(i, j);
        }
        p
    }

    /// Ginibre matrix with i.i.d. standard complex Gaussian entries.
    pub fn ginibre(&mut self, dim: usize) -> Matrix {
        let mut m = Matrix::zeros(dim, dim);
        // row-major fill keeps the draw order independent of storage layout
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = self.complex_normal();
            }
        }
        m
    }

    /// Random Hermitian `(G + G^dag) / 2` from a Ginibre draw.
    pub fn hermitian(&mut self, dim: usize) -> Matrix {
        let g = self.ginibre(dim);
        (&g + g.adjoint()).map(|z| z * 0.5)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Haar-distributed unitary on `local_dim^n_sites` dimensions.
///
/// QR of a Ginibre matrix, with `Q` multiplied by the phases of `R`'s
/// diagonal so that `R` has a positive real diagonal.
pub fn haar_unitary(local_dim: usize, n_sites: usize, rng: &mut RngStream) -> Result<Operator> {
    let dim = checked_dim(local_dim, n_sites).ok_or_else(|| Error::Dimension(format!("{local_dim}^{n_sites} overflows")))?;
    let qr = QR::new(rng.ginibre(dim));
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..dim {
        let diag = r[(c, c)];
        let norm = diag.norm();
        let phase = if norm > 0.0 { diag / norm } else { C64::new(1.0, 0.0) };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    Operator::new(q, local_dim, n_sites)
}
