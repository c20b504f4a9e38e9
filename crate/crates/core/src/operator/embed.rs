use serde::{Deserialize, Serialize};

use super::{checked_dim, Matrix, Operator, ZERO};
use crate::error::{Error, Result};

/// Ordered set of distinct battery indices (0-based) that one term acts on.
///
/// The order matters: axis `i` of the term's operator is battery `indices[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    indices: Vec<usize>,
}

impl Partition {
    pub fn new(indices: Vec<usize>, n_sites: usize) -> Result<Self> {
        let p = Self { indices };
        p.validate(n_sites)?;
        Ok(p)
    }

    /// Single-site partition.
    pub fn site(index: usize, n_sites: usize) -> Result<Self> {
        Self::new(vec![index], n_sites)
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::Partition("empty partition".into()));
        }
        if self.indices.len() > n_sites {
            return Err(Error::Partition(format!("k = {} exceeds N = {n_sites}", self.indices.len())));
        }
        for (pos, &i) in self.indices.iter().enumerate() {
            if i >= n_sites {
                return Err(Error::Partition(format!("index {i} out of range for N = {n_sites}")));
            }
            if self.indices[..pos].contains(&i) {
                return Err(Error::Partition(format!("index {i} repeated in {:?}", self.indices)));
            }
        }
        Ok(())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.indices.contains(&site)
    }

    pub fn overlaps(&self, other: &Partition) -> bool {
        self.indices.iter().any(|i| other.contains(*i))
    }

    /// Relabels batteries through `perm` (`site -> perm[site]`).
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        Self {
            indices: self.indices.iter().map(|&i| perm[i]).collect(),
        }
    }
}

/// A k-body operator together with the batteries it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    pub partition: Partition,
    pub op: Operator,
}

impl LocalTerm {
    pub fn new(partition: Partition, op: Operator) -> Result<Self> {
        if op.n_sites() != partition.k() {
            return Err(Error::Dimension(format!(
                "{}-site operator on a {}-site partition",
                op.n_sites(),
                partition.k()
            )));
        }
        Ok(Self { partition, op })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            partition: self.partition.clone(),
            op: self.op.scaled(factor),
        }
    }
}

/// Embeds `term` into `n_total` sites: `term` on its partition, identity elsewhere.
pub fn embed(term: &LocalTerm, n_total: usize) -> Result<Operator> {
    term.partition.validate(n_total)?;
    let d = term.op.local_dim();
    let k = term.partition.k();
    if term.op.n_sites() != k {
        return Err(Error::Dimension(format!("{}-site operator on a {k}-site partition", term.op.n_sites())));
    }
    let dim = checked_dim(d, n_total).ok_or_else(|| Error::Dimension(format!("{d}^{n_total} overflows")))?;
    let local = term.op.dim();

    // stride of site j in the full index
    let stride = |site: usize| d.pow((n_total - 1 - site) as u32);
    let strides: Vec<usize> = term.partition.indices().iter().map(|&s| stride(s)).collect();

    // offset[c] = full-index contribution of local basis state c
    let offsets: Vec<usize> = (0..local)
        .map(|c| {
            let mut rem = c;
            let mut off = 0;
            for i in (0..k).rev() {
                off += (rem % d) * strides[i];
                rem /= d;
            }
            off
        })
        .collect();

    let src = term.op.matrix();
    let mut data = Matrix::from_element(dim, dim, ZERO);
    for r in 0..dim {
        let mut r_loc = 0;
        let mut base = r;
        for &s in &strides {
            let digit = (r / s) % d;
            r_loc = r_loc * d + digit;
            base -= digit * s;
        }
        for (c_loc, off) in offsets.iter().enumerate() {
            data[(r, base + off)] = src[(r_loc, c_loc)];
        }
    }
    Operator::new(data, d, n_total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{op_norm, tensor, ONE};

    #[test]
    fn single_site_embedding_on_second_site() {
        let term = LocalTerm::new(Partition::site(1, 2).unwrap(), Operator::sigma_x()).unwrap();
        let full = embed(&term, 2).unwrap();
        let expected = tensor(&[Operator::identity(2, 1).unwrap(), Operator::sigma_x()]).unwrap();
        assert_eq!(full, expected);
    }

    #[test]
    fn reversed_partition_matches_swap_conjugation() {
        // explicit permutation-matrix oracle for mu = (1, 0)
        let h = Operator::from_rows(
            &(0..4)
                .map(|i| (0..4).map(|j| crate::operator::C64::new((i * 4 + j) as f64, (i as f64) - (j as f64))).collect())
                .collect::<Vec<_>>(),
            2,
        )
        .unwrap();
        let term = LocalTerm::new(Partition::new(vec![1, 0], 2).unwrap(), h.clone()).unwrap();
        let full = embed(&term, 2).unwrap();
        let mut swap = Matrix::zeros(4, 4);
        for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(a, b)] = ONE;
        }
        let expected = &swap * h.matrix() * &swap;
        assert_eq!(full.matrix(), &expected);
    }

    #[test]
    fn embedding_preserves_norm() {
        let term = LocalTerm::new(Partition::new(vec![2, 0], 3).unwrap(), tensor(&[Operator::sigma_x(), Operator::sigma_z()]).unwrap().scaled(1.5)).unwrap();
        assert!((op_norm(&embed(&term, 3).unwrap()) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn partition_errors() {
        assert!(matches!(Partition::new(vec![0, 0], 3), Err(Error::Partition(_))));
        assert!(matches!(Partition::new(vec![3], 3), Err(Error::Partition(_))));
        assert!(matches!(Partition::new(vec![0, 1, 2], 2), Err(Error::Partition(_))));
        let term = LocalTerm {
            partition: Partition { indices: vec![4] },
            op: Operator::sigma_x(),
        };
        assert!(matches!(embed(&term, 2), Err(Error::Partition(_))));
    }
}
