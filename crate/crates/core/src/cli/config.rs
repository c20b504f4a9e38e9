use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conjecture::SearchConfig;
use crate::error::{Error, Result};
use crate::evolution::{PassageOptions, DEFAULT_SAMPLES_PER_SEGMENT};
use crate::io::sha256_hex;
use crate::metrics::{ComparisonOptions, ConstraintKind};
use crate::policy::NumericPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Thermal qubits flipped by parallel `sigma_x` or the global product drive.
    #[serde(alias = "prop1")]
    GlobalFlip,
    /// Block-saturating `k`-local drive against single-site flips.
    Klocal,
    /// User-supplied schedule files.
    Custom,
    /// Random commutator-ratio search.
    Conjecture,
    /// Random disjoint circuits checked against every bound.
    Bounds,
    /// Small fixed-size conjecture search with timing disabled.
    ConjectureSmoke,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::GlobalFlip => "global-flip",
            Self::Klocal => "klocal",
            Self::Custom => "custom",
            Self::Conjecture => "conjecture",
            Self::Bounds => "bounds",
            Self::ConjectureSmoke => "conjecture-smoke",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Parallel,
    Global,
    Saturating,
}

/// JSON run configuration. Unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default = "default_local_dim")]
    pub local_dim: usize,
    /// Inverse temperature of the initial thermal state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ConstraintKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<Protocol>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Schedule file for `custom`; the collective one under `advantage`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel_schedule: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    /// Record wall-clock times in conjecture records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_samples_per_segment")]
    pub samples_per_segment: usize,
    #[serde(default)]
    pub tolerances: NumericPolicy,
    /// Output directory, overridden by `QBATTERY_OUT` and `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_local_dim() -> usize {
    2
}

fn default_samples_per_segment() -> usize {
    DEFAULT_SAMPLES_PER_SEGMENT
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            n_sites: None,
            k: None,
            local_dim: 2,
            epsilon: None,
            constraint: None,
            protocol: None,
            alpha: None,
            duration: None,
            schedule: None,
            parallel_schedule: None,
            samples: None,
            spectrum: None,
            timing: None,
            seed: 0,
            workers: None,
            samples_per_segment: DEFAULT_SAMPLES_PER_SEGMENT,
            tolerances: NumericPolicy::default(),
            out: None,
        }
    }

    /// `--seed` replaces the config seed; `--workers` beats the config, which beats `QBATTERY_WORKERS`.
    pub fn apply_overrides(&mut self, seed: Option<u64>, workers: Option<usize>) {
        if let Some(s) = seed {
            self.seed = s;
        }
        if workers.is_some() {
            self.workers = workers;
        } else if self.workers.is_none() {
            self.workers = std::env::var("QBATTERY_WORKERS").ok().and_then(|w| w.trim().parse().ok());
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.local_dim < 2 {
            return bad(format!("local_dim must be at least 2, got {}", self.local_dim));
        }
        if self.samples_per_segment == 0 {
            return bad("samples_per_segment must be positive".into());
        }
        if let Some(n) = self.n_sites {
            if n == 0 {
                return bad("n_sites must be positive".into());
            }
            if let Some(k) = self.k {
                if k == 0 || k > n {
                    return bad(format!("k must lie in 1..={n}, got {k}"));
                }
            }
        }
        for (name, v) in [("epsilon", self.epsilon), ("alpha", self.alpha), ("duration", self.duration)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return bad(format!("{name} must be finite"));
                }
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("hermitian_tol", t.hermitian_tol),
            ("unitary_tol", t.unitary_tol),
            ("trace_tol", t.trace_tol),
            ("psd_tol", t.psd_tol),
            ("branch_cut_tol", t.branch_cut_tol),
            ("passage_tol", t.passage_tol),
            ("bound_slack", t.bound_slack),
            ("fairness_tol", t.fairness_tol),
            ("saturation_tol", t.saturation_tol),
            ("imaginary_tol", t.imaginary_tol),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("tolerances.{name} must be a non-negative number"));
            }
        }
        if self.duration.is_some_and(|t| t <= 0.0) {
            return bad("duration must be positive".into());
        }
        if self.alpha.is_some_and(|a| a <= 0.0) {
            return bad("alpha must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        if self.samples == Some(0) {
            return bad("samples must be positive".into());
        }
        if self.experiment == Experiment::GlobalFlip && self.local_dim != 2 {
            return bad("global-flip acts on qubits".into());
        }
        Ok(())
    }

    /// Checks the fields a single-size run needs.
    pub fn require_sizes(&self) -> Result<()> {
        let name = self.experiment.name();
        let sized = matches!(self.experiment, Experiment::GlobalFlip | Experiment::Klocal | Experiment::Conjecture);
        if sized && self.n_sites.is_none() {
            return Err(Error::Config(format!("`{name}` needs n_sites")));
        }
        if matches!(self.experiment, Experiment::Klocal | Experiment::Conjecture) && self.k.is_none() {
            return Err(Error::Config(format!("`{name}` needs k")));
        }
        Ok(())
    }

    pub(crate) fn config_dir(&self, path: &Path) -> PathBuf {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    }

    /// SHA-256 of the effective config, without the output directory and worker count.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.workers = None;
        sha256_hex(&serde_json::to_vec(&c).expect("configs serialize"))
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites.unwrap_or(1)
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(1)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(0.1)
    }

    pub fn constraint(&self) -> ConstraintKind {
        self.constraint.unwrap_or(ConstraintKind::C0)
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or(1)
    }

    pub fn comparison_options(&self) -> ComparisonOptions {
        let t = &self.tolerances;
        ComparisonOptions {
            samples_per_segment: self.samples_per_segment,
            passage: PassageOptions { tol: t.passage_tol, ..PassageOptions::default() },
            saturation_tol: t.saturation_tol,
            fairness_tol: t.fairness_tol,
            bound_slack: t.bound_slack,
        }
    }

    pub fn search_config(&self) -> Result<SearchConfig> {
        let mut c = SearchConfig::new(self.n_sites(), self.k(), self.samples.unwrap_or(10_000), self.seed);
        c.local_dim = self.local_dim;
        c.workers = self.workers();
        c.spectrum = self.spectrum.clone();
        c.timing = self.timing.unwrap_or(true);
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let c: RunConfig = serde_json::from_str(r#"{"experiment":"global-flip","n_sites":3,"epsilon":0.5,"constraint":"C1"}"#).unwrap();
        assert_eq!(c.experiment, Experiment::GlobalFlip);
        let alias: RunConfig = serde_json::from_str(r#"{"experiment":"prop1"}"#).unwrap();
        assert_eq!(alias.experiment, Experiment::GlobalFlip);
        assert_eq!(c.constraint(), ConstraintKind::C1);
        assert_eq!(c.local_dim, 2);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"experiment":"global-flip","nsites":3}"#).is_err());
        let mut c = RunConfig::new(Experiment::GlobalFlip);
        c.n_sites = Some(2);
        c.duration = Some(-1.0);
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.duration = Some(1.0);
        c.k = Some(3);
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn hash_ignores_output_dir() {
        let mut a = RunConfig::new(Experiment::Bounds);
        let h = a.hash();
        a.out = Some("elsewhere".into());
        assert_eq!(a.hash(), h);
        a.seed = 3;
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn flag_workers_beat_config() {
        let mut c = RunConfig::new(Experiment::Bounds);
        c.workers = Some(2);
        c.apply_overrides(Some(9), Some(5));
        assert_eq!((c.seed, c.workers()), (9, 5));
    }
}
