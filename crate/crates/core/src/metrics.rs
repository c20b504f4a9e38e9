//! Work, power, constraint functionals, speed limits and advantage bounds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{first_passage_with, instantaneous_power_matrix, propagate, propagate_scalars, PassageOptions, Trajectory};
use crate::operator::Operator;
use crate::protocols::{locality_profile, LocalityProfile, Schedule};
use crate::states::{bures_angle, DensityMatrix};

/// `tr[I (rho_T - rho_0)]`.
pub fn work(i_total: &Operator, rho0: &DensityMatrix, rho_t: &DensityMatrix) -> Result<f64> {
    Ok(rho_t.expectation(i_total)? - rho0.expectation(i_total)?)
}

/// `i tr([H, I] rho)`.
pub fn instantaneous_power(h: &Operator, i_total: &Operator, rho: &DensityMatrix) -> Result<f64> {
    if h.dim() != i_total.dim() || h.dim() != rho.dim() {
        return Err(Error::Dimension(format!("H {}, I {}, rho {}", h.dim(), i_total.dim(), rho.dim())));
    }
    let comm = h.matrix() * i_total.matrix() - i_total.matrix() * h.matrix();
    instantaneous_power_matrix(&comm, rho.matrix())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// Time-averaged operator norm of the driving.
    C0,
    /// Time-averaged energy standard deviation.
    C1,
    /// Time-averaged energy above the instantaneous ground level.
    C2,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 3] = [ConstraintKind::C0, ConstraintKind::C1, ConstraintKind::C2];

    /// Growth of the allowed value with the number of batteries.
    pub fn extensive_factor(self, n_batteries: usize) -> f64 {
        match self {
            ConstraintKind::C1 => (n_batteries as f64).sqrt(),
            ConstraintKind::C0 | ConstraintKind::C2 => n_batteries as f64,
        }
    }
}

impl std::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Time averages of the three constraint integrands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintValues {
    /// Average `||H||_op`.
    pub norm: f64,
    /// Average `Delta H`.
    pub std_energy: f64,
    /// Average `<H> - h_g`.
    pub mean_energy: f64,
}

impl ConstraintValues {
    pub fn of(trajectory: &Trajectory) -> Self {
        Self {
            norm: constraint_value(trajectory, ConstraintKind::C0),
            std_energy: constraint_value(trajectory, ConstraintKind::C1),
            mean_energy: constraint_value(trajectory, ConstraintKind::C2),
        }
    }

    pub fn get(&self, kind: ConstraintKind) -> f64 {
        match kind {
            ConstraintKind::C0 => self.norm,
            ConstraintKind::C1 => self.std_energy,
            ConstraintKind::C2 => self.mean_energy,
        }
    }

    /// `Delta E <= norm` and `E <= 2 norm`, relative slack `tol`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        let slack = 1.0 + tol;
        self.std_energy <= self.norm * slack + tol && self.mean_energy <= 2.0 * self.norm * slack + tol
    }
}

/// Time average of the `kind` integrand over the whole trajectory.
pub fn constraint_value(trajectory: &Trajectory, kind: ConstraintKind) -> f64 {
    let total = trajectory.duration();
    if total <= 0.0 {
        return 0.0;
    }
    let integral = match kind {
        ConstraintKind::C0 => trajectory.segments().iter().map(|s| s.norm_h * s.duration).sum(),
        ConstraintKind::C1 => trajectory.integrate(|s| s.std_h()),
        ConstraintKind::C2 => trajectory.integrate(|s| (s.mean_h - s.ground_h).max(0.0)),
    };
    integral / total
}

/// `L_m max(1/E, 1/Delta E)` with `L_m` the Bures angle between `m` copies.
pub fn qsl_time(rho: &DensityMatrix, sigma: &DensityMatrix, copies: usize, mean_energy: f64, std_energy: f64) -> Result<f64> {
    let inv = |x: f64| if x > 0.0 { Some(1.0 / x) } else { None };
    let rate = match (inv(mean_energy), inv(std_energy)) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return Err(Error::Budget),
    };
    Ok(bures_angle(rho, sigma, copies)? * rate)
}

/// Allowed collective value for `n_batteries` given a single-battery value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintBudget {
    pub kind: ConstraintKind,
    pub single_battery_value: f64,
    pub n_batteries: usize,
}

impl ConstraintBudget {
    pub fn budget(&self) -> f64 {
        self.kind.extensive_factor(self.n_batteries) * self.single_battery_value
    }
}

/// Smallest `alpha` with `constraint(family(alpha)) = budget`.
///
/// For families linear in `alpha` the first guess `budget / value(1)` is
/// exact and only verified; otherwise the root is bracketed and bisected.
pub fn saturate_constraint(
    family: impl Fn(f64) -> Result<Schedule>,
    rho0: &DensityMatrix,
    kind: ConstraintKind,
    budget: f64,
    samples_per_segment: usize,
    tol: f64,
) -> Result<f64> {
    if !(budget > 0.0) {
        return Err(Error::Budget);
    }
    let value = |alpha: f64| -> Result<f64> {
        let traj = propagate_scalars(&family(alpha)?, rho0, samples_per_segment)?;
        Ok(constraint_value(&traj, kind))
    };
    let v1 = value(1.0)?;
    if !(v1 > 0.0) {
        return Err(Error::Saturation(format!("{kind} value vanishes at alpha = 1")));
    }
    let guess = budget / v1;
    let close = |v: f64| (v - budget).abs() <= tol * budget;
    if close(value(guess)?) {
        return Ok(guess);
    }

    let (mut lo, mut hi) = (guess, guess);
    let (mut v_lo, mut v_hi) = (value(lo)?, value(hi)?);
    for _ in 0..60 {
        if v_lo <= budget {
            break;
        }
        let next = lo / 2.0;
        let v = value(next)?;
        if v > v_lo {
            return Err(Error::Saturation(format!("{kind} value not monotone near alpha = {next}")));
        }
        (lo, v_lo) = (next, v);
    }
    for _ in 0..60 {
        if v_hi >= budget {
            break;
        }
        let next = hi * 2.0;
        let v = value(next)?;
        if v < v_hi {
            return Err(Error::Saturation(format!("{kind} value not monotone near alpha = {next}")));
        }
        (hi, v_hi) = (next, v);
    }
    if !(v_lo <= budget && budget <= v_hi) {
        return Err(Error::Saturation(format!("budget {budget} not bracketed")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = value(mid)?;
        if close(v) {
            return Ok(mid);
        }
        if v < v_lo || v > v_hi {
            return Err(Error::Saturation(format!("{kind} value not monotone near alpha = {mid}")));
        }
        if v < budget {
            (lo, v_lo) = (mid, v);
        } else {
            (hi, v_hi) = (mid, v);
        }
    }
    Err(Error::Saturation("bisection did not converge".into()))
}

pub fn bound_qsl_c1(beta: f64, n_batteries: usize, l1: f64, ln: f64) -> f64 {
    beta * (n_batteries as f64).sqrt() * l1 / ln
}

pub fn bound_qsl_c2(beta: f64, n_batteries: usize, l1: f64, ln: f64) -> f64 {
    beta * n_batteries as f64 * l1 / ln
}

/// Disjoint `k`-local circuits.
pub fn bound_klocal_disjoint(gamma: f64, k: usize) -> f64 {
    gamma * k as f64
}

/// `k`-local circuits with each battery in at most `m` terms.
pub fn bound_klocal_overlap(gamma: f64, k: usize, m: usize) -> f64 {
    let k = k as f64;
    gamma * (k * k * (m as f64 - 1.0) + k)
}

/// `beta L_1 norm / (q min(E, Delta E))`.
pub fn gamma_factor(beta: f64, l1: f64, mean_energy: f64, std_energy: f64, norm: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0 + 1e-12) {
        return Err(Error::Fraction(q));
    }
    let denom = mean_energy.min(std_energy);
    if !(denom > 0.0) {
        return Err(Error::Budget);
    }
    Ok(beta * l1 * norm / (q * denom))
}

/// `W / (2 lambda_d)`, the share of the maximal single-battery work.
pub fn work_fraction(single_work: f64, lambda_d: f64) -> f64 {
    single_work / (2.0 * lambda_d)
}

/// `2 lambda_d k N norm`.
pub fn power_upper_bound(lambda_d: f64, k: usize, n_batteries: usize, norm: f64) -> f64 {
    2.0 * lambda_d * k as f64 * n_batteries as f64 * norm
}

/// A bound value next to the measured quantity it limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub bound: f64,
    pub measured: f64,
    /// `None` when the bound does not cover this comparison.
    pub pass: Option<bool>,
}

impl BoundCheck {
    fn new(bound: f64, measured: f64, applies: bool, slack: f64) -> Self {
        let pass = applies.then_some(measured <= bound * (1.0 + slack));
        Self { bound, measured, pass }
    }
}

/// Single-battery charging task shared by both strategies.
#[derive(Debug, Clone)]
pub struct ChargingTask {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub n_batteries: usize,
}

impl ChargingTask {
    pub fn initial(&self) -> Result<DensityMatrix> {
        self.rho.tensor_power(self.n_batteries)
    }

    pub fn target(&self) -> Result<DensityMatrix> {
        self.sigma.tensor_power(self.n_batteries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QslTimes {
    pub single: f64,
    pub collective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageReport {
    pub n_batteries: usize,
    pub constraint: ConstraintKind,
    pub gamma: f64,
    pub power_ratio: f64,
    pub t_parallel: f64,
    pub t_collective: f64,
    pub work_parallel: f64,
    pub work_collective: f64,
    pub collective_values: ConstraintValues,
    pub single_values: ConstraintValues,
    pub bures_single: f64,
    pub bures_collective: f64,
    pub qsl_times: QslTimes,
    pub beta: f64,
    pub q: f64,
    pub lambda_d: f64,
    pub gamma_factor: Option<f64>,
    pub locality: LocalityProfile,
    pub bounds: BTreeMap<String, BoundCheck>,
}

impl AdvantageReport {
    pub const CSV_HEADER: &'static str = "n,constraint,gamma,t_parallel,t_collective,work_parallel,work_collective,beta,q,bound_qsl_c1,bound_qsl_c2,bound_klocal_disjoint,bound_klocal_overlap,all_pass";

    pub fn csv_row(&self) -> String {
        let b = |name: &str| self.bounds.get(name).map_or(String::new(), |c| format!("{:.12e}", c.bound));
        format!(
            "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{},{},{}",
            self.n_batteries,
            self.constraint,
            self.gamma,
            self.t_parallel,
            self.t_collective,
            self.work_parallel,
            self.work_collective,
            self.beta,
            self.q,
            b("qsl_c1"),
            b("qsl_c2"),
            b("klocal_disjoint"),
            b("klocal_overlap"),
            self.all_pass()
        )
    }

    /// Every applicable bound holds.
    pub fn all_pass(&self) -> bool {
        self.bounds.values().all(|c| c.pass != Some(false))
    }
}

/// Compares a parallel and a collective run that both end on the target.
///
/// Single-battery constraint values are read off the parallel run through
/// their extensive scaling, which is exact for identical independent batteries.
pub fn advantage(
    parallel: (&Schedule, &Trajectory),
    collective: (&Schedule, &Trajectory),
    task: &ChargingTask,
    kind: ConstraintKind,
    fairness_tol: f64,
    bound_slack: f64,
) -> Result<AdvantageReport> {
    let n = task.n_batteries;
    let (w_par, w_col) = (parallel.1.work(), collective.1.work());
    if (w_par - w_col).abs() > fairness_tol * w_par.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Fairness { parallel: w_par, collective: w_col });
    }
    let (t_par, t_col) = (parallel.1.duration(), collective.1.duration());
    let gamma = t_par / t_col;
    let power_ratio = (w_col / t_col) / (w_par / t_par);

    let par = ConstraintValues::of(parallel.1);
    let single = ConstraintValues {
        norm: par.norm / ConstraintKind::C0.extensive_factor(n),
        std_energy: par.std_energy / ConstraintKind::C1.extensive_factor(n),
        mean_energy: par.mean_energy / ConstraintKind::C2.extensive_factor(n),
    };
    let col = ConstraintValues::of(collective.1);
    let l1 = bures_angle(&task.rho, &task.sigma, 1)?;
    let ln = bures_angle(&task.rho, &task.sigma, n)?;
    let qsl_single = qsl_time(&task.rho, &task.sigma, 1, single.mean_energy, single.std_energy)?;
    let qsl_col = qsl_time(&task.rho, &task.sigma, n, col.mean_energy, col.std_energy)?;
    let t_single = t_par;
    let beta = t_single / qsl_single;

    let internal = collective.0.internal();
    let lambda_d = internal.lambda_d();
    let q = work_fraction(w_par / n as f64, lambda_d);
    let locality = locality_profile(collective.0);

    let mut bounds = BTreeMap::new();
    if ln > 0.0 {
        bounds.insert("qsl_c1".into(), BoundCheck::new(bound_qsl_c1(beta, n, l1, ln), gamma, kind == ConstraintKind::C1, bound_slack));
        bounds.insert("qsl_c2".into(), BoundCheck::new(bound_qsl_c2(beta, n, l1, ln), gamma, kind == ConstraintKind::C2, bound_slack));
    }
    let gamma_fac = match gamma_factor(beta, l1, single.mean_energy, single.std_energy, single.norm, q) {
        Ok(g) => Some(g),
        Err(e) if kind == ConstraintKind::C0 => return Err(e),
        Err(_) => None,
    };
    if let Some(g) = gamma_fac {
        let c0 = kind == ConstraintKind::C0;
        bounds.insert("klocal_disjoint".into(), BoundCheck::new(bound_klocal_disjoint(g, locality.k), gamma, c0 && locality.m <= 1, bound_slack));
        bounds.insert("klocal_overlap".into(), BoundCheck::new(bound_klocal_overlap(g, locality.k, locality.m), gamma, c0, bound_slack));
    }
    let p_up = power_upper_bound(lambda_d, locality.k, n, single.norm);
    bounds.insert(
        "power".into(),
        BoundCheck::new(p_up, w_col / t_col, kind == ConstraintKind::C0 && locality.m <= 1, bound_slack),
    );

    Ok(AdvantageReport {
        n_batteries: n,
        constraint: kind,
        gamma,
        power_ratio,
        t_parallel: t_par,
        t_collective: t_col,
        work_parallel: w_par,
        work_collective: w_col,
        collective_values: col,
        single_values: single,
        bures_single: l1,
        bures_collective: ln,
        qsl_times: QslTimes { single: qsl_single, collective: qsl_col },
        beta,
        q,
        lambda_d,
        gamma_factor: gamma_fac,
        locality,
        bounds,
    })
}

/// Settings of the comparison pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComparisonOptions {
    pub samples_per_segment: usize,
    pub passage: PassageOptions,
    pub saturation_tol: f64,
    pub fairness_tol: f64,
    pub bound_slack: f64,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        Self {
            samples_per_segment: crate::evolution::DEFAULT_SAMPLES_PER_SEGMENT,
            passage: PassageOptions::default(),
            saturation_tol: 1e-8,
            fairness_tol: 1e-8,
            bound_slack: 1e-9,
        }
    }
}

/// Both runs of a finished comparison.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: AdvantageReport,
    pub alpha: f64,
    pub parallel: Schedule,
    pub parallel_trajectory: Trajectory,
    pub collective: Schedule,
    pub collective_trajectory: Trajectory,
}

/// Cuts `schedule` at its first passage to the target.
fn charge(schedule: &Schedule, task: &ChargingTask, options: &ComparisonOptions) -> Result<Schedule> {
    let t = first_passage_with(schedule, &task.initial()?, &task.target()?, &options.passage)?;
    if t <= 0.0 {
        return Err(Error::State("initial state already equals the target".into()));
    }
    if t >= schedule.duration() {
        Ok(schedule.clone())
    } else {
        schedule.truncated(t)
    }
}

/// Full fair comparison: both schedules are cut at first passage, the
/// collective one is rescaled to saturate `kind` at the parallel value, and
/// its passage time is measured again.
pub fn compare(
    parallel: &Schedule,
    collective: &Schedule,
    task: &ChargingTask,
    kind: ConstraintKind,
    options: &ComparisonOptions,
) -> Result<Comparison> {
    let rho0 = task.initial()?;
    let parallel = charge(parallel, task, options)?;
    let par_traj = propagate(&parallel, &rho0, options.samples_per_segment)?;
    let budget = constraint_value(&par_traj, kind);

    let base = charge(collective, task, options)?;
    let alpha = saturate_constraint(|a| base.rescaled(a), &rho0, kind, budget, options.samples_per_segment, options.saturation_tol)?;
    let collective = charge(&base.rescaled(alpha)?, task, options)?;
    let col_traj = propagate(&collective, &rho0, options.samples_per_segment)?;
    let report = advantage(
        (&parallel, &par_traj),
        (&collective, &col_traj),
        task,
        kind,
        options.fairness_tol,
        options.bound_slack,
    )?;
    Ok(Comparison { report, alpha, parallel, parallel_trajectory: par_traj, collective, collective_trajectory: col_traj })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    use super::*;
    use crate::protocols::{global_product_protocol, parallel_protocol, saturating_klocal_protocol, InternalHamiltonian};
    use crate::states::thermal_state;

    fn thermal_pair_task(n: usize, eps: f64) -> ChargingTask {
        let i = Operator::diagonal(&[0.0, 1.0], 2).unwrap();
        ChargingTask { rho: thermal_state(&i, eps).unwrap(), sigma: thermal_state(&i, -eps).unwrap(), n_batteries: n }
    }

    #[test]
    fn thermal_flip_work_is_tanh() {
        let task = thermal_pair_task(3, 0.4);
        let i = InternalHamiltonian::unit_gap_qubit().total(3).unwrap();
        let w = work(&i, &task.initial().unwrap(), &task.target().unwrap()).unwrap();
        assert!((w - 3.0 * (0.2f64).tanh()).abs() < 1e-13);
        assert_eq!(work(&i, &task.initial().unwrap(), &task.initial().unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn power_mid_flip_and_shift_invariance() {
        let s = parallel_protocol(&Operator::sigma_x(), &InternalHamiltonian::unit_gap_qubit(), 1, FRAC_PI_2).unwrap();
        let rho = crate::evolution::state_at(&s, &DensityMatrix::basis(2, 0).unwrap(), FRAC_PI_4).unwrap();
        let i = Operator::diagonal(&[0.0, 1.0], 2).unwrap();
        let shifted = Operator::diagonal(&[3.0, 4.0], 2).unwrap();
        let p = instantaneous_power(&Operator::sigma_x(), &i, &rho).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!((instantaneous_power(&Operator::sigma_x(), &shifted, &rho).unwrap() - p).abs() < 1e-12);
        let diag = DensityMatrix::basis(2, 1).unwrap();
        assert_eq!(instantaneous_power(&Operator::sigma_x(), &i, &diag).unwrap(), 0.0);
    }

    #[test]
    fn global_protocol_constraint_values_equal_alpha() {
        let task = thermal_pair_task(3, 0.5);
        let alpha = 1.7;
        let s = global_product_protocol(&Operator::sigma_x(), &InternalHamiltonian::unit_gap_qubit(), 3, alpha, FRAC_PI_2).unwrap();
        let v = ConstraintValues::of(&propagate(&s, &task.initial().unwrap(), 16).unwrap());
        assert!((v.norm - alpha).abs() < 1e-12);
        assert!((v.std_energy - alpha).abs() < 1e-12);
        assert!((v.mean_energy - alpha).abs() < 1e-12);
        assert!(v.chain_holds(1e-9));
    }

    #[test]
    fn qsl_cases() {
        let g = DensityMatrix::basis(2, 0).unwrap();
        let e = DensityMatrix::basis(2, 1).unwrap();
        assert!((qsl_time(&g, &e, 1, 1.0, 1.0).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert!((qsl_time(&g, &e, 1, 2.0, 2.0).unwrap() - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(qsl_time(&g, &g, 1, 1.0, 1.0).unwrap(), 0.0);
        assert!((qsl_time(&g, &e, 1, 0.0, 2.0).unwrap() - FRAC_PI_4).abs() < 1e-12);
        assert!(matches!(qsl_time(&g, &e, 1, 0.0, 0.0), Err(Error::Budget)));
    }

    #[test]
    fn bound_formulas() {
        let h = FRAC_PI_2;
        assert!((bound_qsl_c1(1.0, 4, h, h) - 2.0).abs() < 1e-15);
        assert!((bound_qsl_c2(1.0, 4, h, h) - 4.0).abs() < 1e-15);
        assert_eq!(bound_qsl_c1(0.8, 1, 0.3, 0.3), 0.8);
        assert_eq!(bound_klocal_overlap(1.3, 3, 1), bound_klocal_disjoint(1.3, 3));
        assert!((gamma_factor(1.0, h, 1.0, 1.0, 1.0, 1.0).unwrap() - h).abs() < 1e-15);
        assert!((gamma_factor(1.0, h, 1.0, 1.0, 1.0, 0.5).unwrap() - 2.0 * h).abs() < 1e-15);
        assert!(matches!(gamma_factor(1.0, h, 1.0, 1.0, 1.0, 1.5), Err(Error::Fraction(_))));
        assert_eq!(power_upper_bound(0.5, 2, 3, 2.0), 2.0 * power_upper_bound(0.5, 2, 3, 1.0));
    }

    #[test]
    fn saturation_of_global_protocol() {
        let task = thermal_pair_task(4, 0.1);
        let base = global_product_protocol(&Operator::sigma_x(), &InternalHamiltonian::unit_gap_qubit(), 4, 1.0, FRAC_PI_2).unwrap();
        let rho0 = task.initial().unwrap();
        let a1 = saturate_constraint(|a| base.rescaled(a), &rho0, ConstraintKind::C1, 2.0, 16, 1e-8).unwrap();
        assert!((a1 - 2.0).abs() < 1e-12);
        let a0 = saturate_constraint(|a| base.rescaled(a), &rho0, ConstraintKind::C0, 1.0, 16, 1e-8).unwrap();
        assert!((a0 - 1.0).abs() < 1e-13);
        // quadratic family: the first guess misses and the bracket search takes over
        let a2 = saturate_constraint(|a| base.amplified(a * a), &rho0, ConstraintKind::C2, 4.0, 16, 1e-8).unwrap();
        assert!((a2 * a2 - 4.0).abs() < 4e-8, "{a2}");
    }

    #[test]
    fn identical_protocols_have_unit_gamma() {
        let task = thermal_pair_task(2, 0.3);
        let s = parallel_protocol(&Operator::sigma_x(), &InternalHamiltonian::unit_gap_qubit(), 2, FRAC_PI_2).unwrap();
        let c = compare(&s, &s, &task, ConstraintKind::C1, &ComparisonOptions::default()).unwrap();
        assert!((c.report.gamma - 1.0).abs() < 1e-9);
        assert!((c.alpha - 1.0).abs() < 1e-12);
        assert!(c.report.all_pass());
    }

    #[test]
    fn unfair_comparison_rejected() {
        let task = thermal_pair_task(2, 0.3);
        let s = parallel_protocol(&Operator::sigma_x(), &InternalHamiltonian::unit_gap_qubit(), 2, FRAC_PI_2).unwrap();
        let half = s.truncated(FRAC_PI_4).unwrap();
        let rho0 = task.initial().unwrap();
        let a = propagate(&s, &rho0, 8).unwrap();
        let b = propagate(&half, &rho0, 8).unwrap();
        let r = advantage((&s, &a), (&half, &b), &task, ConstraintKind::C1, 1e-8, 1e-9);
        assert!(matches!(r, Err(Error::Fairness { .. })));
    }

    #[test]
    fn saturating_pair_gamma_is_k_under_c0() {
        let internal = InternalHamiltonian::symmetric_linear(2).unwrap();
        let task = ChargingTask { rho: DensityMatrix::basis(2, 0).unwrap(), sigma: DensityMatrix::basis(2, 1).unwrap(), n_batteries: 4 };
        let par = parallel_protocol(&Operator::sigma_x(), &internal, 4, FRAC_PI_2).unwrap();
        let col = saturating_klocal_protocol(4, 2, &internal).unwrap();
        let c = compare(&par, &col, &task, ConstraintKind::C0, &ComparisonOptions::default()).unwrap();
        assert!((c.report.gamma - 2.0).abs() < 1e-9, "{}", c.report.gamma);
        assert!((c.report.beta - 1.0).abs() < 1e-9);
        assert!(c.report.all_pass(), "{:?}", c.report.bounds);
    }
}
