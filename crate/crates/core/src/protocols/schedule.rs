use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{embed, LocalTerm, Operator, Partition};
use crate::policy::NumericPolicy;

/// Identical internal Hamiltonian `I = sum_l lambda_l |l><l|` on every battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InternalHamiltonian {
    spectrum: Vec<f64>,
}

impl TryFrom<Vec<f64>> for InternalHamiltonian {
    type Error = Error;

    fn try_from(spectrum: Vec<f64>) -> Result<Self> {
        Self::new(spectrum)
    }
}

impl From<InternalHamiltonian> for Vec<f64> {
    fn from(h: InternalHamiltonian) -> Self {
        h.spectrum
    }
}

impl InternalHamiltonian {
    pub fn new(spectrum: Vec<f64>) -> Result<Self> {
        if spectrum.len() < 2 {
            return Err(Error::Spectrum(format!("{} levels; need at least 2", spectrum.len())));
        }
        if spectrum.iter().any(|l| !l.is_finite()) {
            return Err(Error::Spectrum("non-finite level".into()));
        }
        if spectrum.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Spectrum(format!("levels {spectrum:?} are not nondecreasing")));
        }
        if spectrum[spectrum.len() - 1] == spectrum[0] {
            return Err(Error::Spectrum("zero gap".into()));
        }
        Ok(Self { spectrum })
    }

    /// `E_0 = 0, E_1 = 1` qubit.
    pub fn unit_gap_qubit() -> Self {
        Self { spectrum: vec![0.0, 1.0] }
    }

    /// Equally spaced levels from `-1` to `1`.
    pub fn symmetric_linear(local_dim: usize) -> Result<Self> {
        if local_dim < 2 {
            return Err(Error::Spectrum(format!("d = {local_dim}")));
        }
        let step = 2.0 / (local_dim - 1) as f64;
        Self::new((0..local_dim).map(|l| -1.0 + step * l as f64).collect())
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn local_dim(&self) -> usize {
        self.spectrum.len()
    }

    /// `lambda_1 = -lambda_d`.
    pub fn is_symmetric(&self) -> bool {
        let (lo, hi) = self.extremes();
        (lo + hi).abs() <= 1e-12 * hi.abs().max(lo.abs())
    }

    fn extremes(&self) -> (f64, f64) {
        (self.spectrum[0], self.spectrum[self.spectrum.len() - 1])
    }

    /// Copy shifted by a multiple of the identity so that `lambda_1 = -lambda_d`.
    pub fn symmetrized(&self) -> Self {
        let (lo, hi) = self.extremes();
        let shift = 0.5 * (lo + hi);
        Self {
            spectrum: self.spectrum.iter().map(|l| l - shift).collect(),
        }
    }

    /// Half the spectral width, the `lambda_d` of the symmetrized spectrum.
    pub fn lambda_d(&self) -> f64 {
        let (lo, hi) = self.extremes();
        0.5 * (hi - lo)
    }

    pub fn site_operator(&self) -> Operator {
        Operator::diagonal(&self.spectrum, self.local_dim()).expect("spectrum length is the local dimension")
    }

    /// `sum_j I^{(j)}` on `n_sites` batteries, diagonal.
    pub fn total(&self, n_sites: usize) -> Result<Operator> {
        let d = self.local_dim();
        let dim = crate::operator::checked_dim(d, n_sites).ok_or_else(|| Error::Dimension(format!("{d}^{n_sites} overflows")))?;
        let diag: Vec<f64> = (0..dim)
            .map(|mut idx| {
                let mut e = 0.0;
                for _ in 0..n_sites {
                    e += self.spectrum[idx % d];
                    idx /= d;
                }
                e
            })
            .collect();
        Operator::new(Operator::diagonal(&diag, d)?.into_matrix(), d, n_sites)
    }
}

/// Builds the internal Hamiltonian from a nondecreasing spectrum.
pub fn internal_hamiltonian(local_dim: usize, spectrum: &[f64]) -> Result<InternalHamiltonian> {
    if spectrum.len() != local_dim {
        return Err(Error::Spectrum(format!("{} levels for d = {local_dim}", spectrum.len())));
    }
    InternalHamiltonian::new(spectrum.to_vec())
}

/// Constant driving over one time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub terms: Vec<LocalTerm>,
}

/// Piecewise-constant driving `V(t)` on `[0, T]`; it vanishes outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    n_sites: usize,
    local_dim: usize,
    internal: InternalHamiltonian,
    segments: Vec<Segment>,
}

impl Schedule {
    pub fn new(n_sites: usize, internal: InternalHamiltonian, segments: Vec<Segment>) -> Result<Self> {
        let local_dim = internal.local_dim();
        if n_sites == 0 {
            return Err(Error::Dimension("schedule with zero batteries".into()));
        }
        if segments.is_empty() {
            return Err(Error::Config("schedule has no segments".into()));
        }
        let policy = NumericPolicy::default();
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.duration > 0.0 && seg.duration.is_finite()) {
                return Err(Error::Config(format!("segment {i} has duration {}", seg.duration)));
            }
            for term in &seg.terms {
                term.partition.validate(n_sites)?;
                if term.op.local_dim() != local_dim || term.op.n_sites() != term.partition.k() {
                    return Err(Error::Dimension(format!(
                        "term on {:?} has {} sites of dimension {}",
                        term.partition.indices(),
                        term.op.n_sites(),
                        term.op.local_dim()
                    )));
                }
                let dev = term.op.hermiticity_deviation();
                if dev > policy.hermitian_tol * term.op.max_abs().max(1.0) {
                    return Err(Error::Hermiticity { deviation: dev });
                }
            }
        }
        Ok(Self { n_sites, local_dim, internal, segments })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.n_sites as u32)
    }

    pub fn internal(&self) -> &InternalHamiltonian {
        &self.internal
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Start time of every segment.
    pub fn segment_starts(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let start = t;
                t += s.duration;
                start
            })
            .collect()
    }

    /// Index of the segment active just before time `t` (left limit), clamped to `[0, T]`.
    pub fn segment_before(&self, t: f64) -> usize {
        let mut end = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            end += s.duration;
            if t <= end {
                return i;
            }
        }
        self.segments.len() - 1
    }

    /// Full driving Hamiltonian of one segment.
    pub fn generator(&self, segment: usize) -> Result<Operator> {
        let mut total = Operator::zeros(self.local_dim, self.n_sites)?;
        for term in &self.segments[segment].terms {
            total = total.try_add(&embed(term, self.n_sites)?)?;
        }
        Ok(total)
    }

    /// Total internal Hamiltonian `sum_j I^{(j)}`.
    pub fn internal_total(&self) -> Result<Operator> {
        self.internal.total(self.n_sites)
    }

    /// Driving multiplied by `alpha` and time compressed by `1/alpha`: the same
    /// unitary, reached `alpha` times faster.
    pub fn rescaled(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("rescaling factor {alpha}")));
        }
        let segments = self
            .segments
            .iter()
            .map(|s| Segment {
                duration: s.duration / alpha,
                terms: s.terms.iter().map(|t| t.scaled(alpha)).collect(),
            })
            .collect();
        Self::new(self.n_sites, self.internal.clone(), segments)
    }

    /// Driving amplitude multiplied by `factor`, durations kept.
    pub fn amplified(&self, factor: f64) -> Result<Self> {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment {
                duration: s.duration,
                terms: s.terms.iter().map(|t| t.scaled(factor)).collect(),
            })
            .collect();
        Self::new(self.n_sites, self.internal.clone(), segments)
    }

    /// Restriction to `[0, t_end]`.
    pub fn truncated(&self, t_end: f64) -> Result<Self> {
        if !(t_end > 0.0) {
            return Err(Error::Config(format!("truncation time {t_end}")));
        }
        let mut out = Vec::new();
        let mut t = 0.0;
        for s in &self.segments {
            if t >= t_end {
                break;
            }
            let dur = s.duration.min(t_end - t);
            out.push(Segment { duration: dur, terms: s.terms.clone() });
            t += s.duration;
        }
        Self::new(self.n_sites, self.internal.clone(), out)
    }

    /// This schedule followed by `next`.
    pub fn then(&self, next: &Schedule) -> Result<Self> {
        if next.n_sites != self.n_sites || next.internal != self.internal {
            return Err(Error::Dimension("concatenating schedules of different systems".into()));
        }
        let mut segments = self.segments.clone();
        segments.extend(next.segments.iter().cloned());
        Self::new(self.n_sites, self.internal.clone(), segments)
    }

    /// Every partition used in any segment.
    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        self.segments.iter().flat_map(|s| s.terms.iter().map(|t| &t.partition))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn internal_hamiltonian_examples() {
        let ih = internal_hamiltonian(2, &[0.0, 1.0]).unwrap();
        assert_eq!(ih.site_operator(), Operator::diagonal(&[0.0, 1.0], 2).unwrap());
        assert!(!ih.is_symmetric());
        assert!(internal_hamiltonian(2, &[-1.0, 1.0]).unwrap().is_symmetric());
        assert!(matches!(internal_hamiltonian(2, &[1.0, 0.0]), Err(Error::Spectrum(_))));
        assert_eq!(ih.symmetrized().spectrum(), &[-0.5, 0.5]);
        assert_eq!(ih.lambda_d(), 0.5);
    }

    #[test]
    fn total_internal_is_sum_of_sites() {
        let ih = InternalHamiltonian::new(vec![0.0, 0.3, 1.0]).unwrap();
        let total = ih.total(2).unwrap();
        let mut expected = Operator::zeros(3, 2).unwrap();
        for site in 0..2 {
            let t = LocalTerm::new(Partition::site(site, 2).unwrap(), ih.site_operator()).unwrap();
            expected = expected.try_add(&embed(&t, 2).unwrap()).unwrap();
        }
        assert!(total.try_sub(&expected).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn schedule_validation() {
        let ih = InternalHamiltonian::unit_gap_qubit();
        let term = LocalTerm::new(Partition::site(0, 1).unwrap(), Operator::sigma_x()).unwrap();
        let zero = Schedule::new(1, ih.clone(), vec![Segment { duration: 0.0, terms: vec![term.clone()] }]);
        assert!(matches!(zero, Err(Error::Config(_))));
        let bad = LocalTerm {
            partition: Partition::site(0, 1).unwrap(),
            op: Operator::sigma_x(),
        };
        assert!(Schedule::new(1, ih.clone(), vec![Segment { duration: 1.0, terms: vec![bad] }]).is_ok());
        let s = Schedule::new(1, ih, vec![Segment { duration: 1.0, terms: vec![term] }]).unwrap();
        let r = s.rescaled(4.0).unwrap();
        assert_eq!(r.duration(), 0.25);
        assert!(s.rescaled(0.0).is_err());
    }

    #[test]
    fn segment_lookup_uses_left_limit() {
        let ih = InternalHamiltonian::unit_gap_qubit();
        let seg = |d| Segment { duration: d, terms: vec![] };
        let s = Schedule::new(1, ih, vec![seg(1.0), seg(2.0)]).unwrap();
        assert_eq!(s.segment_before(0.0), 0);
        assert_eq!(s.segment_before(1.0), 0);
        assert_eq!(s.segment_before(1.5), 1);
        assert_eq!(s.segment_before(9.0), 1);
        assert_eq!(s.truncated(1.5).unwrap().duration(), 1.5);
    }
}
