//! Ready-made charging comparisons and numerical studies.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evolution::{propagate_scalars, unitary_of};
use crate::metrics::{compare, AdvantageReport, ChargingTask, Comparison, ComparisonOptions, ConstraintKind, ConstraintValues};
use crate::operator::{op_norm, LocalTerm, Operator, Partition, RngStream};
use crate::protocols::{
    extremal_flip_term, global_product_protocol, mirrored_random_circuit, parallel_protocol, saturating_klocal_protocol, trotterize,
    InternalHamiltonian, Schedule, Segment,
};
use crate::states::{thermal_state, DensityMatrix};

/// Thermal qubit at inverse temperature `epsilon` charged to its population inversion.
pub fn thermal_flip_task(n_batteries: usize, epsilon: f64) -> Result<ChargingTask> {
    let i = InternalHamiltonian::unit_gap_qubit().site_operator();
    Ok(ChargingTask { rho: thermal_state(&i, epsilon)?, sigma: thermal_state(&i, -epsilon)?, n_batteries })
}

/// Lowest level charged to the highest one.
pub fn ground_to_top_task(n_batteries: usize, local_dim: usize) -> Result<ChargingTask> {
    Ok(ChargingTask {
        rho: DensityMatrix::basis(local_dim, 0)?,
        sigma: DensityMatrix::basis(local_dim, local_dim - 1)?,
        n_batteries,
    })
}

/// Parallel `sigma_x` flips against the global `X^{(x)N}` drive.
pub fn global_flip_comparison(n_batteries: usize, epsilon: f64, kind: ConstraintKind, options: &ComparisonOptions) -> Result<Comparison> {
    let internal = InternalHamiltonian::unit_gap_qubit();
    let x = Operator::sigma_x();
    let parallel = parallel_protocol(&x, &internal, n_batteries, FRAC_PI_2)?;
    let collective = global_product_protocol(&x, &internal, n_batteries, 1.0, FRAC_PI_2)?;
    compare(&parallel, &collective, &thermal_flip_task(n_batteries, epsilon)?, kind, options)
}

/// Parallel single-site flips against the block-saturating `k`-local drive.
pub fn saturating_comparison(n_batteries: usize, k: usize, local_dim: usize, kind: ConstraintKind, options: &ComparisonOptions) -> Result<Comparison> {
    let internal = InternalHamiltonian::symmetric_linear(local_dim)?;
    let parallel = parallel_protocol(&extremal_flip_term(local_dim, 1)?, &internal, n_batteries, FRAC_PI_2)?;
    let collective = saturating_klocal_protocol(n_batteries, k, &internal)?;
    compare(&parallel, &collective, &ground_to_top_task(n_batteries, local_dim)?, kind, options)
}

/// One randomly drawn disjoint `k`-local charging circuit, compared under every constraint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundCase {
    pub index: u64,
    pub n_batteries: usize,
    pub k: usize,
    pub layers: usize,
    pub epsilon: f64,
    pub collective_values: ConstraintValues,
    pub chain_ok: bool,
    pub reports: Vec<AdvantageReport>,
}

impl BoundCase {
    pub fn all_pass(&self) -> bool {
        self.chain_ok && self.reports.iter().all(AdvantageReport::all_pass)
    }
}

/// Draws case `index` of the random bound suite from its own stream of `seed`.
pub fn random_bound_case(seed: u64, index: u64, max_batteries: usize, options: &ComparisonOptions) -> Result<BoundCase> {
    let mut rng = RngStream::new(seed, index);
    let n = 2 + rng.index(max_batteries.max(2) - 1);
    let k = 2 + rng.index(n - 1);
    let layers = 1 + rng.index(3);
    let epsilon = rng.uniform_in(0.2, 2.0);
    let internal = InternalHamiltonian::unit_gap_qubit();
    let collective = mirrored_random_circuit(&internal, n, k, layers, &mut rng)?;
    let parallel = parallel_protocol(&Operator::sigma_x(), &internal, n, FRAC_PI_2)?;
    let task = thermal_flip_task(n, epsilon)?;

    let traj = propagate_scalars(&collective, &task.initial()?, options.samples_per_segment)?;
    let collective_values = ConstraintValues::of(&traj);
    let chain_ok = collective_values.chain_holds(options.bound_slack);
    let reports = ConstraintKind::ALL
        .iter()
        .map(|&kind| compare(&parallel, &collective, &task, kind, options).map(|c| c.report))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCase { index, n_batteries: n, k, layers, epsilon, collective_values, chain_ok, reports })
}

/// All three pair terms on three qubits with random unit-norm couplings.
pub fn random_pair_schedule(rng: &mut RngStream, duration: f64) -> Result<Schedule> {
    let terms = [[0, 1], [1, 2], [0, 2]]
        .iter()
        .map(|p| {
            let h = Operator::new(rng.hermitian(4), 2, 2)?;
            let h = h.scaled(1.0 / op_norm(&h));
            LocalTerm::new(Partition::new(p.to_vec(), 3)?, h)
        })
        .collect::<Result<Vec<_>>>()?;
    Schedule::new(3, InternalHamiltonian::unit_gap_qubit(), vec![Segment { duration, terms }])
}

/// `|| U_Trot(L) - U ||_op` for each `L`.
pub fn trotter_errors(schedule: &Schedule, steps: &[usize]) -> Result<Vec<f64>> {
    let exact = unitary_of(schedule)?;
    steps
        .iter()
        .map(|&l| {
            let approx = unitary_of(&trotterize(schedule, l)?)?;
            Ok(op_norm(&approx.try_sub(&exact)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_flip_gamma_sqrt_n_under_c1() {
        let c = global_flip_comparison(4, 0.1, ConstraintKind::C1, &ComparisonOptions::default()).unwrap();
        assert!((c.report.gamma - 2.0).abs() < 1e-9);
        assert!((c.alpha - 2.0).abs() < 1e-9);
    }

    #[test]
    fn trotter_error_first_order() {
        let mut rng = RngStream::new(1, 0);
        let s = random_pair_schedule(&mut rng, 1.0).unwrap();
        let e = trotter_errors(&s, &[8, 16]).unwrap();
        let ratio = e[0] / e[1];
        assert!(ratio > 1.7 && ratio < 2.3, "{ratio}");
    }

    #[test]
    fn bound_case_draws_valid_sizes() {
        let options = ComparisonOptions::default();
        let case = random_bound_case(7, 0, 4, &options).unwrap();
        assert!((2..=4).contains(&case.n_batteries));
        assert!(case.k >= 2 && case.k <= case.n_batteries);
        assert_eq!(case.reports.len(), 3);
    }
}
