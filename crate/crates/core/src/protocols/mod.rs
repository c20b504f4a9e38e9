//! Charging schedules: parallel, global, k-local circuits and their Trotterization.

mod locality;
mod schedule;

pub use locality::{greedy_groups, locality_profile, profile_of_partitions, LocalityProfile};
pub use schedule::{internal_hamiltonian, InternalHamiltonian, Schedule, Segment};

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::operator::{commutator, embed, matrix_op_norm, tensor_power, LocalTerm, Operator, Partition, RngStream, C64};

/// Same single-site drive on every battery for time `duration`.
pub fn parallel_protocol(drive: &Operator, internal: &InternalHamiltonian, n_sites: usize, duration: f64) -> Result<Schedule> {
    check_single_site(drive, internal)?;
    let terms = (0..n_sites)
        .map(|j| LocalTerm::new(Partition::site(j, n_sites)?, drive.clone()))
        .collect::<Result<Vec<_>>>()?;
    Schedule::new(n_sites, internal.clone(), vec![Segment { duration, terms }])
}

/// Single `N`-body term `alpha H^{(x)N}` applied for `base_duration / alpha`.
pub fn global_product_protocol(
    drive: &Operator,
    internal: &InternalHamiltonian,
    n_sites: usize,
    alpha: f64,
    base_duration: f64,
) -> Result<Schedule> {
    check_single_site(drive, internal)?;
    if !(alpha > 0.0) {
        return Err(Error::Config(format!("alpha = {alpha} must be positive")));
    }
    let op = tensor_power(drive, n_sites)?.scaled(alpha);
    let term = LocalTerm::new(Partition::new((0..n_sites).collect(), n_sites)?, op)?;
    Schedule::new(
        n_sites,
        internal.clone(),
        vec![Segment { duration: base_duration / alpha, terms: vec![term] }],
    )
}

fn check_single_site(drive: &Operator, internal: &InternalHamiltonian) -> Result<()> {
    if drive.n_sites() != 1 || drive.local_dim() != internal.local_dim() {
        return Err(Error::Dimension(format!(
            "drive must be {d}x{d}, got {}x{}",
            drive.dim(),
            drive.dim(),
            d = internal.local_dim()
        )));
    }
    Ok(())
}

/// Per-step lists of pairwise-disjoint partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionPlan {
    n_sites: usize,
    steps: Vec<Vec<Partition>>,
}

impl PartitionPlan {
    pub fn new(n_sites: usize, steps: Vec<Vec<Partition>>) -> Result<Self> {
        for (l, step) in steps.iter().enumerate() {
            for (a, p) in step.iter().enumerate() {
                p.validate(n_sites)?;
                if step[..a].iter().any(|q| q.overlaps(p)) {
                    return Err(Error::Partition(format!("step {l}: partition {:?} overlaps another", p.indices())));
                }
            }
        }
        Ok(Self { n_sites, steps })
    }

    /// Brick-wall pattern generalised to blocks of `k`: step `l` cuts the ring
    /// of batteries into consecutive blocks starting at offset `l mod N`.
    pub fn round_robin(n_sites: usize, k: usize, steps: usize) -> Result<Self> {
        if k == 0 || k > n_sites {
            return Err(Error::Partition(format!("k = {k} for N = {n_sites}")));
        }
        let plan = (0..steps)
            .map(|l| {
                let ring: Vec<usize> = (0..n_sites).map(|i| (i + l) % n_sites).collect();
                ring.chunks(k).map(|c| Partition::new(c.to_vec(), n_sites)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_sites, plan)
    }

    /// Each step a random relabelling cut into blocks of `k`.
    pub fn random(n_sites: usize, k: usize, steps: usize, rng: &mut RngStream) -> Result<Self> {
        if k == 0 || k > n_sites {
            return Err(Error::Partition(format!("k = {k} for N = {n_sites}")));
        }
        let plan = (0..steps)
            .map(|_| {
                let perm = rng.permutation(n_sites);
                perm.chunks(k).map(|c| Partition::new(c.to_vec(), n_sites)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_sites, plan)
    }

    pub fn steps(&self) -> &[Vec<Partition>] {
        &self.steps
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
}

/// Piecewise circuit: step `l` applies `scaling * term(l, mu)` on every partition of the plan.
pub fn klocal_circuit_protocol(
    internal: &InternalHamiltonian,
    plan: &PartitionPlan,
    step_durations: &[f64],
    scaling: f64,
    mut term: impl FnMut(usize, &Partition) -> Result<Operator>,
) -> Result<Schedule> {
    if step_durations.len() != plan.steps().len() {
        return Err(Error::Config(format!(
            "{} durations for {} steps",
            step_durations.len(),
            plan.steps().len()
        )));
    }
    let segments = plan
        .steps()
        .iter()
        .zip(step_durations)
        .enumerate()
        .map(|(l, (parts, &duration))| {
            let terms = parts
                .iter()
                .map(|p| LocalTerm::new(p.clone(), term(l, p)?.scaled(scaling)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Segment { duration, terms })
        })
        .collect::<Result<Vec<_>>>()?;
    Schedule::new(plan.n_sites(), internal.clone(), segments)
}

/// `|1..1><d..d| + h.c.` on `k` sites of dimension `d`.
pub fn extremal_flip_term(local_dim: usize, k: usize) -> Result<Operator> {
    let mut op = Operator::zeros(local_dim, k)?.into_matrix();
    let last = op.nrows() - 1;
    op[(0, last)] = C64::new(1.0, 0.0);
    op[(last, 0)] = C64::new(1.0, 0.0);
    Operator::new(op, local_dim, k)
}

/// `sqrt(s) sum_mu h_mu` on `s = N/k` disjoint blocks with
/// `h_mu = |1..1><d..d| + h.c.`, run until `|1..1>` reaches `|d..d>`.
pub fn saturating_klocal_protocol(n_sites: usize, k: usize, internal: &InternalHamiltonian) -> Result<Schedule> {
    if k == 0 || k > n_sites || !n_sites.is_multiple_of(k) {
        return Err(Error::Divisibility { n_sites, k });
    }
    let s = n_sites / k;
    let prefactor = (s as f64).sqrt();
    let h = extremal_flip_term(internal.local_dim(), k)?.scaled(prefactor);
    let terms = (0..s)
        .map(|b| LocalTerm::new(Partition::new((b * k..(b + 1) * k).collect(), n_sites)?, h.clone()))
        .collect::<Result<Vec<_>>>()?;
    // each block is a two-level rotation; a quarter turn completes the transfer
    Schedule::new(n_sites, internal.clone(), vec![Segment { duration: FRAC_PI_2 / prefactor, terms }])
}

/// Random disjoint `k`-local circuit that still maps `rho^{(x)N}` to
/// `X^{(x)N} rho^{(x)N} X^{(x)N}` for qubits.
///
/// `steps` random brick layers `R` are followed by a parallel `sigma_x` quarter
/// turn `F` and the mirrored layers `F R^dag F`, so the net unitary is `F`
/// while the trajectory in between is entangling.
pub fn mirrored_random_circuit(
    internal: &InternalHamiltonian,
    n_sites: usize,
    k: usize,
    steps: usize,
    rng: &mut RngStream,
) -> Result<Schedule> {
    if internal.local_dim() != 2 {
        return Err(Error::Dimension("mirrored circuits are built for qubits".into()));
    }
    let plan = PartitionPlan::random(n_sites, k, steps, rng)?;
    let durations: Vec<f64> = (0..steps).map(|_| rng.uniform_in(0.05, 0.6)).collect();
    let mut random_term = |_: usize, p: &Partition| -> Result<Operator> {
        let m = rng.hermitian(1 << p.k());
        Operator::new(m, 2, p.k())
    };
    let forward = klocal_circuit_protocol(internal, &plan, &durations, 1.0, &mut random_term)?;
    let flip = parallel_protocol(&Operator::sigma_x(), internal, n_sites, FRAC_PI_2)?;
    let mirrored: Vec<Segment> = forward
        .segments()
        .iter()
        .rev()
        .map(|seg| {
            let terms = seg
                .terms
                .iter()
                .map(|t| {
                    let x = tensor_power(&Operator::sigma_x(), t.partition.k())?;
                    LocalTerm::new(t.partition.clone(), t.op.conjugate_by(&x)?.scaled(-1.0))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Segment { duration: seg.duration, terms })
        })
        .collect::<Result<Vec<_>>>()?;
    let back = Schedule::new(n_sites, internal.clone(), mirrored)?;
    forward.then(&flip)?.then(&back)
}

/// First-order Trotter circuit: step `l` runs every commuting group of
/// `H(l T / L)` one after another, each for `T / L`.
///
/// Groups are the greedy disjoint groups of each sampled segment, so the
/// result takes up to `M` times longer than `schedule`.
pub fn trotterize(schedule: &Schedule, steps: usize) -> Result<Schedule> {
    if steps == 0 {
        return Err(Error::Config("Trotterization needs at least one step".into()));
    }
    let total = schedule.duration();
    let dt = total / steps as f64;
    let mut segments = Vec::new();
    for l in 1..=steps {
        let seg = &schedule.segments()[schedule.segment_before(l as f64 * dt)];
        let partitions: Vec<Partition> = seg.terms.iter().map(|t| t.partition.clone()).collect();
        let groups = greedy_groups(&partitions);
        segments.extend(trotter_step(schedule.n_sites(), &seg.terms, &groups, dt)?);
    }
    Schedule::new(schedule.n_sites(), schedule.internal().clone(), segments)
}

/// Same as [`trotterize`] for a single-segment schedule but with caller-chosen
/// groups of term indices; each group must commute internally.
pub fn trotterize_with_groups(schedule: &Schedule, steps: usize, groups: &[Vec<usize>]) -> Result<Schedule> {
    if steps == 0 {
        return Err(Error::Config("Trotterization needs at least one step".into()));
    }
    let mut segments = Vec::new();
    let dt = schedule.duration() / steps as f64;
    for l in 1..=steps {
        let seg = &schedule.segments()[schedule.segment_before(l as f64 * dt)];
        segments.extend(trotter_step(schedule.n_sites(), &seg.terms, groups, dt)?);
    }
    Schedule::new(schedule.n_sites(), schedule.internal().clone(), segments)
}

fn trotter_step(n_sites: usize, terms: &[LocalTerm], groups: &[Vec<usize>], dt: f64) -> Result<Vec<Segment>> {
    let covered: usize = groups.iter().map(|g| g.len()).sum();
    if covered != terms.len() || groups.iter().flatten().any(|&i| i >= terms.len()) {
        return Err(Error::Config(format!("groups cover {covered} of {} terms", terms.len())));
    }
    if terms.is_empty() {
        return Ok(vec![Segment { duration: dt, terms: vec![] }]);
    }
    groups
        .iter()
        .map(|g| {
            check_commuting(n_sites, g.iter().map(|&i| &terms[i]))?;
            Ok(Segment {
                duration: dt,
                terms: g.iter().map(|&i| terms[i].clone()).collect(),
            })
        })
        .collect()
}

fn check_commuting<'a>(n_sites: usize, group: impl Iterator<Item = &'a LocalTerm>) -> Result<()> {
    let group: Vec<&LocalTerm> = group.collect();
    for (a, ta) in group.iter().enumerate() {
        for tb in &group[..a] {
            if !ta.partition.overlaps(&tb.partition) {
                continue;
            }
            let c = commutator(&embed(ta, n_sites)?, &embed(tb, n_sites)?)?;
            let deviation = matrix_op_norm(c.matrix());
            if deviation > 1e-10 {
                return Err(Error::Grouping { deviation });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{op_norm, tensor};

    #[test]
    fn parallel_profile_is_trivial() {
        let s = parallel_protocol(&Operator::sigma_x(), &InternalHamiltonian::unit_gap_qubit(), 4, FRAC_PI_2).unwrap();
        let p = locality_profile(&s);
        assert_eq!((p.k, p.m, p.groups), (1, 1, 1));
        assert_eq!(s.segments()[0].terms.len(), 4);
    }

    #[test]
    fn round_robin_matches_alternating_pairs() {
        let plan = PartitionPlan::round_robin(4, 2, 2).unwrap();
        let idx: Vec<Vec<Vec<usize>>> = plan
            .steps()
            .iter()
            .map(|s| s.iter().map(|p| p.indices().to_vec()).collect())
            .collect();
        assert_eq!(idx, vec![vec![vec![0, 1], vec![2, 3]], vec![vec![1, 2], vec![3, 0]]]);
    }

    #[test]
    fn overlapping_plan_rejected() {
        let p = |v: Vec<usize>| Partition::new(v, 3).unwrap();
        let err = PartitionPlan::new(3, vec![vec![p(vec![0, 1]), p(vec![1, 2])]]);
        assert!(matches!(err, Err(Error::Partition(_))));
    }

    #[test]
    fn full_block_circuit_is_single_global_term() {
        let plan = PartitionPlan::round_robin(3, 3, 1).unwrap();
        let s = klocal_circuit_protocol(&InternalHamiltonian::unit_gap_qubit(), &plan, &[1.0], 1.0, |_, _| {
            tensor_power(&Operator::sigma_x(), 3)
        })
        .unwrap();
        assert_eq!(s.segments()[0].terms.len(), 1);
        assert_eq!(locality_profile(&s).k, 3);
    }

    #[test]
    fn saturating_terms_commute_and_divisibility() {
        let s = saturating_klocal_protocol(6, 2, &InternalHamiltonian::symmetric_linear(2).unwrap()).unwrap();
        let terms = &s.segments()[0].terms;
        for a in terms {
            for b in terms {
                let c = commutator(&embed(a, 6).unwrap(), &embed(b, 6).unwrap()).unwrap();
                assert_eq!(c.max_abs(), 0.0);
            }
        }
        assert!(matches!(
            saturating_klocal_protocol(5, 2, &InternalHamiltonian::symmetric_linear(2).unwrap()),
            Err(Error::Divisibility { .. })
        ));
    }

    #[test]
    fn commuting_schedule_trotterizes_exactly() {
        let s = saturating_klocal_protocol(4, 2, &InternalHamiltonian::symmetric_linear(2).unwrap()).unwrap();
        let t = trotterize(&s, 5).unwrap();
        assert_eq!(t.segments().len(), 5);
        assert!((t.duration() - s.duration()).abs() < 1e-15);
    }

    #[test]
    fn explicit_grouping_must_commute() {
        let n = 2;
        let terms = vec![
            LocalTerm::new(Partition::site(0, n).unwrap(), Operator::sigma_x()).unwrap(),
            LocalTerm::new(Partition::new(vec![0, 1], n).unwrap(), tensor(&[Operator::sigma_z(), Operator::sigma_z()]).unwrap()).unwrap(),
        ];
        let s = Schedule::new(n, InternalHamiltonian::unit_gap_qubit(), vec![Segment { duration: 1.0, terms }]).unwrap();
        assert!(matches!(trotterize_with_groups(&s, 2, &[vec![0, 1]]), Err(Error::Grouping { .. })));
        let t = trotterize_with_groups(&s, 2, &[vec![0], vec![1]]).unwrap();
        assert!((t.duration() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn mirrored_circuit_is_disjoint_k_local() {
        let mut rng = RngStream::new(3, 0);
        let s = mirrored_random_circuit(&InternalHamiltonian::unit_gap_qubit(), 5, 2, 3, &mut rng).unwrap();
        let p = locality_profile(&s);
        assert_eq!((p.k, p.m, p.groups), (2, 1, 1));
        assert_eq!(s.segments().len(), 7);
        assert!(s.segments().iter().all(|seg| seg.terms.iter().all(|t| op_norm(&t.op) > 0.0)));
    }
}
