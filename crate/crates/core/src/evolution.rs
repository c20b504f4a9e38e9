//! Exact piecewise-constant unitary evolution, sampled trajectories and
//! first-passage times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{HermitianEigen, Matrix, Operator, C64, I};
use crate::protocols::Schedule;
use crate::states::{same_spectrum, DensityMatrix};

pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 16;

/// Scalars recorded at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub work: f64,
    pub power: f64,
    pub mean_h: f64,
    pub mean_h2: f64,
    pub norm_h: f64,
    pub ground_h: f64,
    pub radius_to_mixed: f64,
}

impl Sample {
    pub fn std_h(&self) -> f64 {
        (self.mean_h2 - self.mean_h * self.mean_h).max(0.0).sqrt()
    }
}

/// Samples of one segment on a uniform grid including both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub start: f64,
    pub duration: f64,
    pub norm_h: f64,
    pub ground_h: f64,
    pub samples: Vec<Sample>,
}

/// Sampled solution of the von Neumann equation under a schedule.
///
/// The flat sample list is right-continuous: a sample at a segment boundary
/// carries the scalars of the segment that starts there.
#[derive(Debug, Clone)]
pub struct Trajectory {
    samples: Vec<Sample>,
    states: Vec<DensityMatrix>,
    segments: Vec<SegmentRecord>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn segments(&self) -> &[SegmentRecord] {
        &self.segments
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.states[0]
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory has samples")
    }

    /// Work deposited by the end of the schedule.
    pub fn work(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.work)
    }

    /// `int f(sample) dt` by composite Simpson within every segment.
    pub fn integrate(&self, f: impl Fn(&Sample) -> f64) -> f64 {
        self.segments
            .iter()
            .map(|seg| {
                let values: Vec<f64> = seg.samples.iter().map(&f).collect();
                composite_simpson(&values, seg.duration / (values.len() - 1) as f64)
            })
            .sum()
    }
}

/// Composite Simpson rule on uniformly spaced `values`; an odd number of
/// intervals closes with the 3/8 rule, a single interval with the trapezoid.
pub fn composite_simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let (even, tail) = if n.is_multiple_of(2) { (n, 0.0) } else { (n - 3, three_eighths(&values[n - 3..], h)) };
            let mut acc = values[0] + values[even];
            for (i, v) in values.iter().enumerate().take(even).skip(1) {
                acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let head = if even > 0 { acc * h / 3.0 } else { 0.0 };
            head + tail
        }
    }
}

fn three_eighths(v: &[f64], h: f64) -> f64 {
    3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3])
}

/// One segment in the eigenbasis of its generator.
struct Frame {
    values: Vec<f64>,
    vectors: Matrix,
    // entry state expressed in this eigenbasis
    rho: Matrix,
    duration: f64,
}

impl Frame {
    /// `rho(tau)` in the eigenbasis: `rho_ab e^{-i (l_a - l_b) tau}`.
    fn rotated(&self, tau: f64) -> Matrix {
        let phases: Vec<C64> = self.values.iter().map(|&l| (-I * l * tau).exp()).collect();
        let mut m = self.rho.clone();
        for b in 0..m.ncols() {
            for a in 0..m.nrows() {
                m[(a, b)] *= phases[a] * phases[b].conj();
            }
        }
        m
    }

    fn to_lab(&self, m: &Matrix) -> Matrix {
        let out = &self.vectors * m * self.vectors.adjoint();
        (&out + out.adjoint()).map(|z| z * 0.5)
    }

    fn in_frame(&self, m: &Matrix) -> Matrix {
        self.vectors.adjoint() * m * &self.vectors
    }
}

/// Per-segment spectral data shared by every evolution routine.
struct Evolver {
    frames: Vec<Frame>,
    starts: Vec<f64>,
    total: f64,
}

impl Evolver {
    fn new(schedule: &Schedule, rho0: &DensityMatrix) -> Result<Self> {
        if rho0.dim() != schedule.dim() {
            return Err(Error::Dimension(format!(
                "state of dimension {} for a {}-dimensional schedule",
                rho0.dim(),
                schedule.dim()
            )));
        }
        let mut frames: Vec<Frame> = Vec::with_capacity(schedule.segments().len());
        let mut lab = rho0.matrix().clone();
        for (i, seg) in schedule.segments().iter().enumerate() {
            let eig = HermitianEigen::of_matrix(schedule.generator(i)?.matrix());
            let rho = eig.vectors.adjoint() * &lab * &eig.vectors;
            let frame = Frame { values: eig.values, vectors: eig.vectors, rho, duration: seg.duration };
            lab = frame.to_lab(&frame.rotated(seg.duration));
            frames.push(frame);
        }
        Ok(Self { frames, starts: schedule.segment_starts(), total: schedule.duration() })
    }

    /// Segment index and local time for global `t`, clamped to `[0, T]`.
    fn locate(&self, t: f64) -> (usize, f64) {
        if t >= self.total {
            let last = self.frames.len() - 1;
            return (last, self.frames[last].duration);
        }
        let t = t.max(0.0);
        let i = self.starts.iter().rposition(|&s| s <= t).unwrap_or(0);
        (i, t - self.starts[i])
    }

    fn state(&self, t: f64) -> Matrix {
        let (i, tau) = self.locate(t);
        self.frames[i].to_lab(&self.frames[i].rotated(tau))
    }

    fn speed(&self) -> f64 {
        self.frames.iter().flat_map(|f| f.values.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn tr_prod(a: &Matrix, b: &Matrix) -> C64 {
    crate::operator::trace_product(a, b)
}

/// `||rho - 1/D||_F`, any orthonormal basis.
fn radius_of(m: &Matrix) -> f64 {
    let inv = 1.0 / m.nrows() as f64;
    let mut acc = 0.0;
    for b in 0..m.ncols() {
        for a in 0..m.nrows() {
            let z = if a == b { m[(a, b)] - inv } else { m[(a, b)] };
            acc += z.norm_sqr();
        }
    }
    acc.sqrt()
}

/// Propagates `rho0` under `schedule`, recording `samples_per_segment + 1`
/// points per segment.
pub fn propagate(schedule: &Schedule, rho0: &DensityMatrix, samples_per_segment: usize) -> Result<Trajectory> {
    propagate_inner(schedule, rho0, samples_per_segment, true)
}

/// Same as [`propagate`] but without storing the sampled states.
pub(crate) fn propagate_scalars(schedule: &Schedule, rho0: &DensityMatrix, samples_per_segment: usize) -> Result<Trajectory> {
    propagate_inner(schedule, rho0, samples_per_segment, false)
}

fn propagate_inner(schedule: &Schedule, rho0: &DensityMatrix, samples_per_segment: usize, keep_states: bool) -> Result<Trajectory> {
    if samples_per_segment == 0 {
        return Err(Error::Config("samples_per_segment must be at least 1".into()));
    }
    let evolver = Evolver::new(schedule, rho0)?;
    let internal = schedule.internal_total()?;
    let imat = internal.matrix();
    let w0 = tr_prod(imat, rho0.matrix()).re;
    let n = samples_per_segment;

    let mut segments = Vec::with_capacity(evolver.frames.len());
    let mut flat = Vec::new();
    let mut states = Vec::new();
    let last = evolver.frames.len() - 1;
    for (i, frame) in evolver.frames.iter().enumerate() {
        let lambda = &frame.values;
        let itilde = frame.in_frame(imat);
        // [H, I] in the eigenbasis of H
        let comm = Matrix::from_fn(lambda.len(), lambda.len(), |a, b| itilde[(a, b)] * (lambda[a] - lambda[b]));
        let norm_h = lambda.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ground_h = lambda.first().copied().unwrap_or(0.0);
        let mut samples = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let tau = frame.duration * j as f64 / n as f64;
            let rho = frame.rotated(tau);
            let diag = (0..lambda.len()).map(|a| rho[(a, a)].re);
            let (mean_h, mean_h2) = diag.zip(lambda).fold((0.0, 0.0), |(m1, m2), (p, &l)| (m1 + p * l, m2 + p * l * l));
            let sample = Sample {
                t: evolver.starts[i] + tau,
                work: tr_prod(&itilde, &rho).re - w0,
                power: instantaneous_power_matrix(&comm, &rho)?,
                mean_h,
                mean_h2,
                norm_h,
                ground_h,
                radius_to_mixed: radius_of(&rho),
            };
            if j < n || i == last {
                flat.push(sample);
                if keep_states {
                    states.push(DensityMatrix::new_unchecked(internal.with_matrix(frame.to_lab(&rho))));
                }
            }
            samples.push(sample);
        }
        segments.push(SegmentRecord { start: evolver.starts[i], duration: frame.duration, norm_h, ground_h, samples });
    }
    if let Some(last) = flat.last_mut() {
        // pin the end point so that `times` lands exactly on T
        last.t = schedule.duration();
    }
    Ok(Trajectory { samples: flat, states, segments })
}

/// `i tr([H, I] rho)` given the precomputed commutator `[H, I]`.
pub(crate) fn instantaneous_power_matrix(comm: &Matrix, rho: &Matrix) -> Result<f64> {
    let p = I * tr_prod(comm, rho);
    let scale = comm.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if p.im.abs() > 1e-8 * scale {
        return Err(Error::Numerics(format!("instantaneous power has imaginary part {:e}", p.im)));
    }
    Ok(p.re)
}

/// Ordered product of segment propagators, later segments on the left.
pub fn unitary_of(schedule: &Schedule) -> Result<Operator> {
    let mut u = Operator::identity(schedule.local_dim(), schedule.n_sites())?.into_matrix();
    for (i, seg) in schedule.segments().iter().enumerate() {
        let eig = HermitianEigen::of_matrix(schedule.generator(i)?.matrix());
        u = eig.propagator(seg.duration) * u;
    }
    Operator::new(u, schedule.local_dim(), schedule.n_sites())
}

/// State at time `t` (clamped to `[0, T]`).
pub fn state_at(schedule: &Schedule, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    let evolver = Evolver::new(schedule, rho0)?;
    Ok(DensityMatrix::new_unchecked(rho0.op().with_matrix(evolver.state(t))))
}

/// Search settings for [`first_passage_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PassageOptions {
    /// Trace-distance acceptance threshold.
    pub tol: f64,
    /// Scan density used to bracket local minima of the distance.
    pub samples_per_segment: usize,
    /// Bracket width at which the refinement stops, relative to `T`.
    pub time_resolution: f64,
}

impl Default for PassageOptions {
    fn default() -> Self {
        Self { tol: 1e-8, samples_per_segment: 32, time_resolution: 1e-13 }
    }
}

/// Earliest time at which the trajectory from `rho0` reaches `target`.
pub fn first_passage(schedule: &Schedule, rho0: &DensityMatrix, target: &DensityMatrix, tol: f64) -> Result<f64> {
    first_passage_with(schedule, rho0, target, &PassageOptions { tol, ..PassageOptions::default() })
}

/// Earliest time at which the trace distance to `target` has a local minimum
/// no larger than `options.tol`.
///
/// The distance is scanned on a grid, every discrete local minimum is
/// refined by golden-section search on its two neighbouring intervals and the
/// first refined minimum under the threshold is returned. Locating the minimum
/// rather than the threshold crossing makes the result independent of `tol`
/// for exact transfers.
pub fn first_passage_with(
    schedule: &Schedule,
    rho0: &DensityMatrix,
    target: &DensityMatrix,
    options: &PassageOptions,
) -> Result<f64> {
    if !same_spectrum(rho0, target, 1e-9) {
        return Err(Error::State("target is not unitarily reachable: spectra differ".into()));
    }
    let evolver = Evolver::new(schedule, rho0)?;
    let targets: Vec<Matrix> = evolver.frames.iter().map(|f| f.in_frame(target.matrix())).collect();
    // both distances are unitarily invariant, so they are evaluated in each segment's eigenbasis
    let diff = |t: f64| -> Matrix {
        let (i, tau) = evolver.locate(t);
        evolver.frames[i].rotated(tau) - &targets[i]
    };
    let frobenius = |t: f64| -> Result<f64> { Ok(diff(t).norm()) };
    let trace_dist = |t: f64| -> f64 { 0.5 * HermitianEigen::of_matrix(&diff(t)).values.iter().map(|v| v.abs()).sum::<f64>() };

    if trace_dist(0.0) <= options.tol {
        return Ok(0.0);
    }
    let n = options.samples_per_segment.max(2);
    let mut grid = Vec::new();
    for (start, frame) in evolver.starts.iter().zip(&evolver.frames) {
        grid.extend((0..n).map(|j| start + frame.duration * j as f64 / n as f64));
    }
    let total = evolver.total;
    grid.push(total);
    let d: Vec<f64> = grid.iter().map(|&t| diff(t).norm()).collect();

    // ||A||_1 >= ||A||_F and |d/dt ||rho(t) - sigma||_F| <= 2 ||H||
    let speed = 2.0 * evolver.speed();
    let reach = 2.0 * options.tol;
    let mut closest = f64::INFINITY;
    let last = grid.len() - 1;
    for j in 1..=last {
        let rises_after = j == last || d[j] <= d[j + 1];
        if d[j] > d[j - 1] || !rises_after {
            continue;
        }
        let hi = if j == last { total } else { grid[j + 1] };
        if d[j] - speed * (hi - grid[j - 1]) > reach {
            continue;
        }
        let (t, _) = golden_min(&frobenius, grid[j - 1], hi, options.time_resolution * total.max(1.0))?;
        let v = trace_dist(t);
        closest = closest.min(v);
        if v <= options.tol {
            return Ok(t);
        }
    }
    if !closest.is_finite() {
        let j = (0..grid.len()).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap_or(0);
        closest = trace_dist(grid[j]);
    }
    Err(Error::NoPassage { tol: options.tol, duration: total, closest })
}

/// Minimum of `f` on `[a, b]` by golden-section search, endpoints included;
/// ties go to the left so that plateaus resolve to their earliest point.
fn golden_min(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, width: f64) -> Result<(f64, f64)> {
    let (a0, b0) = (a, b);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut e = a + r * (b - a);
    let (mut fc, mut fe) = (f(c)?, f(e)?);
    let mut iterations = 0;
    while b - a > width && iterations < 200 {
        if fc <= fe + 1e-15 {
            b = e;
            e = c;
            fe = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + r * (b - a);
            fe = f(e)?;
        }
        iterations += 1;
    }
    let mut candidates = vec![(a0, f(a0)?), (c, fc), (e, fe), (b0, f(b0)?)];
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    let min = candidates.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let best = candidates.into_iter().find(|x| x.1 <= min + 1e-15).expect("non-empty");
    Ok(best)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::operator::{expm_skew, tensor_power, LocalTerm, Partition};
    use crate::protocols::{parallel_protocol, InternalHamiltonian, Segment};
    use crate::states::{thermal_state, trace_distance};

    fn flip(n: usize) -> Schedule {
        parallel_protocol(&Operator::sigma_x(), &InternalHamiltonian::unit_gap_qubit(), n, FRAC_PI_2).unwrap()
    }

    #[test]
    fn starts_at_initial_state() {
        let rho = DensityMatrix::basis(2, 0).unwrap();
        let tr = propagate(&flip(1), &rho, 4).unwrap();
        assert_eq!(tr.samples()[0].t, 0.0);
        assert!((tr.states()[0].matrix() - rho.matrix()).norm() < 1e-14);
        assert_eq!(tr.samples().len(), 5);
        assert_eq!(tr.duration(), FRAC_PI_2);
    }

    #[test]
    fn qubit_flip_reaches_excited_state() {
        let tr = propagate(&flip(1), &DensityMatrix::basis(2, 0).unwrap(), 8).unwrap();
        let d = trace_distance(tr.final_state(), &DensityMatrix::basis(2, 1).unwrap()).unwrap();
        assert!(d < 1e-12);
        assert!((tr.work() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mid_flip_power_is_sin_2t() {
        // rho(t) = cos^2 t |0><0| + sin^2 t |1><1| + ..., W(t) = sin^2 t, P = sin 2t
        let tr = propagate(&flip(1), &DensityMatrix::basis(2, 0).unwrap(), 8).unwrap();
        for s in tr.samples() {
            assert!((s.power - (2.0 * s.t).sin()).abs() < 1e-12, "t = {}", s.t);
            assert!((s.work - s.t.sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn purity_and_spectrum_conserved() {
        let rho = thermal_state(&Operator::diagonal(&[0.0, 1.0, 0.0, 1.0], 2).unwrap(), 0.7).unwrap();
        let mut rng = crate::operator::RngStream::new(5, 0);
        let h = Operator::new(rng.hermitian(4), 2, 2).unwrap();
        let seg = |d| Segment { duration: d, terms: vec![LocalTerm::new(Partition::new(vec![0, 1], 2).unwrap(), h.clone()).unwrap()] };
        let s = Schedule::new(2, InternalHamiltonian::unit_gap_qubit(), vec![seg(0.4), seg(1.1)]).unwrap();
        let tr = propagate(&s, &rho, 16).unwrap();
        for st in tr.states() {
            assert!((st.purity() - rho.purity()).abs() < 1e-10);
            assert!(same_spectrum(st, &rho, 1e-9));
        }
    }

    #[test]
    fn work_matches_integrated_power() {
        let rho = DensityMatrix::basis(2, 0).unwrap().tensor_power(2).unwrap();
        let mut rng = crate::operator::RngStream::new(9, 0);
        let h = Operator::new(rng.hermitian(4), 2, 2).unwrap();
        let s = Schedule::new(
            2,
            InternalHamiltonian::unit_gap_qubit(),
            vec![Segment { duration: 1.3, terms: vec![LocalTerm::new(Partition::new(vec![0, 1], 2).unwrap(), h).unwrap()] }],
        )
        .unwrap();
        let tr = propagate(&s, &rho, 64).unwrap();
        assert!((tr.integrate(|x| x.power) - tr.work()).abs() < 1e-6);
    }

    #[test]
    fn unitary_matches_exponential_product() {
        let h = tensor_power(&Operator::sigma_x(), 2).unwrap();
        let term = LocalTerm::new(Partition::new(vec![0, 1], 2).unwrap(), h.clone()).unwrap();
        let seg = |d| Segment { duration: d, terms: vec![term.clone()] };
        let two = Schedule::new(2, InternalHamiltonian::unit_gap_qubit(), vec![seg(0.3), seg(0.5)]).unwrap();
        let one = Schedule::new(2, InternalHamiltonian::unit_gap_qubit(), vec![seg(0.8)]).unwrap();
        let u2 = unitary_of(&two).unwrap();
        let u1 = unitary_of(&one).unwrap();
        assert!((u2.matrix() - u1.matrix()).norm() < 1e-13);
        assert!((u1.matrix() - expm_skew(&h, 0.8).unwrap().matrix()).norm() < 1e-13);
    }

    #[test]
    fn zero_driving_is_identity() {
        let s = Schedule::new(1, InternalHamiltonian::unit_gap_qubit(), vec![Segment { duration: 1.0, terms: vec![] }]).unwrap();
        assert!((unitary_of(&s).unwrap().matrix() - Matrix::identity(2, 2)).norm() == 0.0);
    }

    #[test]
    fn passage_scales_inversely_with_amplitude() {
        let rho = thermal_state(&Operator::diagonal(&[0.0, 1.0], 2).unwrap(), 0.3).unwrap();
        let sigma = thermal_state(&Operator::diagonal(&[0.0, 1.0], 2).unwrap(), -0.3).unwrap();
        let s = flip(1).amplified(1.0).unwrap().then(&flip(1)).unwrap();
        let t1 = first_passage(&s, &rho, &sigma, 1e-8).unwrap();
        let t3 = first_passage(&s.amplified(3.0).unwrap(), &rho, &sigma, 1e-8).unwrap();
        assert!((t1 - FRAC_PI_2).abs() < 1e-10, "{t1}");
        assert!((t3 - FRAC_PI_2 / 3.0).abs() < 1e-10, "{t3}");
    }

    #[test]
    fn passage_to_self_is_zero() {
        let rho = DensityMatrix::basis(2, 0).unwrap();
        assert_eq!(first_passage(&flip(1), &rho, &rho, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn unreachable_target_errors() {
        let s = Schedule::new(1, InternalHamiltonian::unit_gap_qubit(), vec![Segment {
            duration: 1.0,
            terms: vec![LocalTerm::new(Partition::site(0, 1).unwrap(), Operator::sigma_z()).unwrap()],
        }])
        .unwrap();
        let r = first_passage(&s, &DensityMatrix::basis(2, 0).unwrap(), &DensityMatrix::basis(2, 1).unwrap(), 1e-8);
        assert!(matches!(r, Err(Error::NoPassage { .. })));
        let mixed = DensityMatrix::maximally_mixed(2, 1).unwrap();
        assert!(matches!(first_passage(&s, &mixed, &DensityMatrix::basis(2, 1).unwrap(), 1e-8), Err(Error::State(_))));
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        for n in [2usize, 3, 5, 8] {
            let h = 2.0 / n as f64;
            let v: Vec<f64> = (0..=n).map(|i| (i as f64 * h).powi(3)).collect();
            assert!((composite_simpson(&v, h) - 4.0).abs() < 1e-12, "n = {n}");
        }
    }
}
