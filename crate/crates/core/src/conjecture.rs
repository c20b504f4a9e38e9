//! Random search for violations of the commutator norm inequality
//! `|| sum_mu alpha_mu Y_mu || <= || sum_mu alpha_mu X_mu ||`.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{embed, haar_unitary, logm_unitary, matrix_op_norm, op_norm, LocalTerm, Matrix, Operator, Partition, RngStream};
use crate::protocols::InternalHamiltonian;

pub const SCHEMA_VERSION: u32 = 1;
pub const HISTOGRAM_BINS: usize = 100;
pub const HISTOGRAM_MAX: f64 = 1.1;
const NEAR_SATURATION: f64 = 1e-9;
const PATH_TOL: f64 = 1e-10;

/// `h = alpha X` with `||X||_op = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTerm {
    pub partition: Partition,
    pub x: Operator,
    pub alpha: f64,
}

impl NormalizedTerm {
    pub fn new(partition: Partition, h: &Operator) -> Result<Self> {
        if h.n_sites() != partition.k() {
            return Err(Error::Dimension(format!("{}-site term on {:?}", h.n_sites(), partition.indices())));
        }
        let alpha = op_norm(h);
        let x = if alpha > 0.0 { h.scaled(1.0 / alpha) } else { h.clone() };
        Ok(Self { partition, x, alpha })
    }
}

/// Diagonal of `sum_i I^{(i)} / (lambda_d k)` on `k` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct IotaOperator {
    pub diagonal: Vec<f64>,
    pub local_dim: usize,
    pub k: usize,
}

impl IotaOperator {
    pub fn operator(&self) -> Result<Operator> {
        Operator::diagonal(&self.diagonal, self.local_dim)
    }
}

/// Normalised local internal energy of `k` sites; the spectrum must be symmetric
/// about zero (apply [`InternalHamiltonian::symmetrized`] first).
pub fn build_iota(k: usize, internal: &InternalHamiltonian) -> Result<IotaOperator> {
    if !internal.is_symmetric() {
        return Err(Error::Spectrum("iota needs a spectrum symmetric about zero".into()));
    }
    if k == 0 {
        return Err(Error::Partition("empty partition".into()));
    }
    let d = internal.local_dim();
    let levels = internal.spectrum();
    let scale = internal.lambda_d() * k as f64;
    let dim = d.pow(k as u32);
    let diagonal = (0..dim)
        .map(|a| {
            let mut rem = a;
            let mut sum = 0.0;
            for _ in 0..k {
                sum += levels[rem % d];
                rem /= d;
            }
            sum / scale
        })
        .collect();
    Ok(IotaOperator { diagonal, local_dim: d, k })
}

/// `Y = [X, iota] / 2`, evaluated both as a commutator and entrywise.
pub fn build_y(x: &Operator, iota: &IotaOperator) -> Result<Operator> {
    let n = x.dim();
    if n != iota.diagonal.len() || x.local_dim() != iota.local_dim {
        return Err(Error::Dimension(format!("X of dimension {n}, iota of {}", iota.diagonal.len())));
    }
    let io = iota.operator()?;
    let commutator = (x.matrix() * io.matrix() - io.matrix() * x.matrix()).map(|z| z * 0.5);

    let eta = &iota.diagonal;
    let xm = x.matrix();
    let mut entrywise = Matrix::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            let w = 0.5 * (eta[b] - eta[a]);
            entrywise[(a, b)] += xm[(a, b)] * w;
            entrywise[(b, a)] -= xm[(a, b)].conj() * w;
        }
    }
    let deviation = (&commutator - &entrywise).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if deviation > PATH_TOL {
        return Err(Error::Consistency(format!("commutator and entrywise Y differ by {deviation:e}")));
    }
    Operator::new(commutator, x.local_dim(), x.n_sites())
}

/// `|| sum alpha Y || / || sum alpha X ||` over the embedded terms.
pub fn ratio_p(terms: &[NormalizedTerm], internal: &InternalHamiltonian, n_sites: usize) -> Result<f64> {
    let d = internal.local_dim();
    let dim = d.pow(n_sites as u32);
    let mut sum_x = Matrix::zeros(dim, dim);
    let mut sum_y = Matrix::zeros(dim, dim);
    let mut iotas: HashMap<usize, IotaOperator> = HashMap::new();
    for t in terms {
        let k = t.partition.k();
        if let std::collections::hash_map::Entry::Vacant(e) = iotas.entry(k) {
            e.insert(build_iota(k, internal)?);
        }
        let y = build_y(&t.x, &iotas[&k])?;
        sum_x += embed(&LocalTerm::new(t.partition.clone(), t.x.scaled(t.alpha))?, n_sites)?.matrix();
        sum_y += embed(&LocalTerm::new(t.partition.clone(), y.scaled(t.alpha))?, n_sites)?.matrix();
    }
    let denom = matrix_op_norm(&sum_x);
    if !(denom > 0.0) {
        return Err(Error::Degenerate("sum of alpha X vanishes".into()));
    }
    Ok(matrix_op_norm(&sum_y) / denom)
}

/// All `k`-subsets of `0..n_sites` in lexicographic order.
pub fn all_partitions(n_sites: usize, k: usize) -> Result<Vec<Partition>> {
    if k == 0 || k > n_sites {
        return Err(Error::Partition(format!("k = {k} for N = {n_sites}")));
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(Partition::new(idx.clone(), n_sites)?);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n_sites - k + i) else {
            return Ok(out);
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// One random instance: a Haar term on every partition.
#[derive(Debug, Clone)]
pub struct HaarInstance {
    pub terms: Vec<NormalizedTerm>,
    /// Eigenphases that fell next to the logarithm's branch cut.
    pub branch_warnings: usize,
}

pub fn haar_sample_instance(n_sites: usize, k: usize, local_dim: usize, rng: &mut RngStream) -> Result<HaarInstance> {
    haar_instance_on(&all_partitions(n_sites, k)?, local_dim, rng)
}

/// `h_mu = i log u_mu` with Haar `u_mu` on each given partition.
pub fn haar_instance_on(partitions: &[Partition], local_dim: usize, rng: &mut RngStream) -> Result<HaarInstance> {
    let mut branch_warnings = 0;
    let terms = partitions
        .iter()
        .map(|p| {
            let u = haar_unitary(local_dim, p.k(), rng)?;
            let log = logm_unitary(&u)?;
            branch_warnings += log.near_cut_phases.len();
            NormalizedTerm::new(p.clone(), &log.generator)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HaarInstance { terms, branch_warnings })
}

fn default_local_dim() -> usize {
    2
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n_sites: usize,
    pub k: usize,
    #[serde(default = "default_local_dim")]
    pub local_dim: usize,
    pub samples: u64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Internal spectrum; shifted to be symmetric before use. Defaults to
    /// evenly spaced levels on `[-1, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    /// Subset of partitions; all `k`-subsets when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partitions: Option<Vec<Partition>>,
    /// Record wall-clock times (disable for byte-stable output).
    #[serde(default = "default_true")]
    pub timing: bool,
}

fn default_true() -> bool {
    true
}

impl SearchConfig {
    pub fn new(n_sites: usize, k: usize, samples: u64, seed: u64) -> Self {
        Self { n_sites, k, local_dim: 2, samples, seed, workers: 1, spectrum: None, partitions: None, timing: true }
    }

    pub fn internal(&self) -> Result<InternalHamiltonian> {
        let h = match &self.spectrum {
            Some(s) => InternalHamiltonian::new(s.clone())?,
            None => InternalHamiltonian::symmetric_linear(self.local_dim)?,
        };
        if h.local_dim() != self.local_dim {
            return Err(Error::Config(format!("spectrum has {} levels for local_dim {}", h.local_dim(), self.local_dim)));
        }
        Ok(h.symmetrized())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RecordFlag {
    Counterexample,
    NearSaturation,
}

pub fn classify(p: f64) -> Option<RecordFlag> {
    if (p - 1.0).abs() <= NEAR_SATURATION {
        Some(RecordFlag::NearSaturation)
    } else if p > 1.0 {
        Some(RecordFlag::Counterexample)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub sample_id: u64,
    pub seed: u64,
    pub stream_id: u64,
    pub n_sites: usize,
    pub k: usize,
    pub p_value: f64,
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<RecordFlag>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub branch_warnings: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub overflow: u64,
}

impl Histogram {
    pub fn empty() -> Self {
        Self { lo: 0.0, hi: HISTOGRAM_MAX, counts: vec![0; HISTOGRAM_BINS], overflow: 0 }
    }

    pub fn add(&mut self, p: f64) {
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        let bin = ((p - self.lo) / width).floor();
        if bin >= 0.0 && (bin as usize) < self.counts.len() {
            self.counts[bin as usize] += 1;
        } else {
            self.overflow += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Argmax {
    pub sample_id: u64,
    pub seed: u64,
    pub stream_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub schema_version: u32,
    pub config: SearchConfig,
    pub samples: u64,
    pub max_p: Option<f64>,
    pub argmax: Option<Argmax>,
    pub histogram: Histogram,
    pub counterexamples: Vec<SearchRecord>,
    pub near_saturation_count: u64,
    pub branch_warnings: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_wall_time: Option<f64>,
}

impl SearchSummary {
    pub fn from_records(config: &SearchConfig, records: &[SearchRecord], total_wall_time: Option<f64>) -> Self {
        let mut histogram = Histogram::empty();
        let mut best: Option<&SearchRecord> = None;
        let mut near = 0;
        let mut warnings = 0;
        let mut counterexamples = Vec::new();
        for r in records {
            histogram.add(r.p_value);
            if best.is_none_or(|b| r.p_value > b.p_value) {
                best = Some(r);
            }
            match r.flag {
                Some(RecordFlag::Counterexample) => counterexamples.push(r.clone()),
                Some(RecordFlag::NearSaturation) => near += 1,
                None => {}
            }
            warnings += r.branch_warnings as u64;
        }
        Self {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            samples: records.len() as u64,
            max_p: best.map(|b| b.p_value),
            argmax: best.map(|b| Argmax { sample_id: b.sample_id, seed: b.seed, stream_id: b.stream_id }),
            histogram,
            counterexamples,
            near_saturation_count: near,
            branch_warnings: warnings,
            total_wall_time,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub records: Vec<SearchRecord>,
    pub summary: SearchSummary,
}

/// Evaluates one sample; its random stream is keyed by `sample_id`.
pub fn run_sample(config: &SearchConfig, internal: &InternalHamiltonian, partitions: &[Partition], sample_id: u64) -> Result<SearchRecord> {
    let start = config.timing.then(Instant::now);
    let mut rng = RngStream::new(config.seed, sample_id);
    let instance = haar_instance_on(partitions, config.local_dim, &mut rng)?;
    let p = ratio_p(&instance.terms, internal, config.n_sites)?;
    Ok(SearchRecord {
        sample_id,
        seed: config.seed,
        stream_id: rng.stream_id(),
        n_sites: config.n_sites,
        k: config.k,
        p_value: p,
        alphas: instance.terms.iter().map(|t| t.alpha).collect(),
        flag: classify(p),
        branch_warnings: instance.branch_warnings,
        wall_time: start.map(|s| s.elapsed().as_secs_f64()),
    })
}

/// Runs `config.samples` independent samples on `config.workers` threads.
///
/// Records come back ordered by `sample_id`, so the output does not depend
/// on the worker count.
pub fn search(config: &SearchConfig) -> Result<SearchOutcome> {
    let start = config.timing.then(Instant::now);
    let internal = config.internal()?;
    let partitions = match &config.partitions {
        Some(p) => {
            for q in p {
                q.validate(config.n_sites)?;
            }
            p.clone()
        }
        None => all_partitions(config.n_sites, config.k)?,
    };
    crate::operator::checked_dim(config.local_dim, config.n_sites)
        .filter(|&d| d <= 1 << 12)
        .ok_or_else(|| Error::Config(format!("{}^{} exceeds the dense budget", config.local_dim, config.n_sites)))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let records = pool.install(|| {
        (0..config.samples)
            .into_par_iter()
            .map(|id| run_sample(config, &internal, &partitions, id))
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = SearchSummary::from_records(config, &records, start.map(|s| s.elapsed().as_secs_f64()));
    Ok(SearchOutcome { records, summary })
}
