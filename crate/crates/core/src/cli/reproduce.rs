use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{Experiment, Outcome, Provenance, RunConfig, EXIT_OK, EXIT_REPRODUCE_MISS};
use crate::conjecture::search;
use crate::error::{Error, Result};
use crate::experiments::{global_flip_comparison, random_bound_case, saturating_comparison, BoundCase};
use crate::io;
use crate::metrics::{AdvantageReport, ConstraintKind};

pub const GLOBAL_FLIP_SIZES: [usize; 5] = [2, 3, 4, 5, 6];
pub const GLOBAL_FLIP_EPSILONS: [f64; 3] = [0.01, 0.1, 1.0];
pub const KLOCAL_CASES: [(usize, usize); 3] = [(4, 2), (6, 2), (6, 3)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `|measured - expected| <= tolerance`.
    Close,
    /// `measured <= expected + tolerance`.
    AtMost,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Self::Close => "~",
            Self::AtMost => "<=",
        }
    }
}

/// One line of a reproduction table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproRow {
    pub case: String,
    pub quantity: String,
    pub relation: Relation,
    pub expected: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ReproRow {
    pub fn new(case: impl Into<String>, quantity: impl Into<String>, relation: Relation, expected: f64, measured: f64, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::Close => (measured - expected).abs() <= tolerance,
            Relation::AtMost => measured <= expected + tolerance,
        };
        Self { case: case.into(), quantity: quantity.into(), relation, expected, measured, tolerance, pass }
    }

    pub fn close_rel(case: impl Into<String>, quantity: impl Into<String>, expected: f64, measured: f64, rel: f64) -> Self {
        Self::new(case, quantity, Relation::Close, expected, measured, rel * expected.abs())
    }
}

/// Exit status of a finished table.
pub fn exit_code(rows: &[ReproRow]) -> i32 {
    if rows.iter().all(|r| r.pass) {
        EXIT_OK
    } else {
        EXIT_REPRODUCE_MISS
    }
}

pub fn table_csv(rows: &[ReproRow]) -> String {
    let mut out = String::from("case,quantity,relation,expected,measured,tolerance,pass\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{:e},{:e},{:e},{}", r.case, r.quantity, r.relation.symbol(), r.expected, r.measured, r.tolerance, r.pass);
    }
    out
}

fn expected_gamma(kind: ConstraintKind, scale: usize) -> f64 {
    match kind {
        ConstraintKind::C1 => (scale as f64).sqrt(),
        ConstraintKind::C0 | ConstraintKind::C2 => scale as f64,
    }
}

/// Global product drive on thermal qubits for every size, temperature and constraint.
pub fn global_flip_rows(config: &RunConfig) -> Result<(Vec<ReproRow>, Vec<AdvantageReport>)> {
    let options = config.comparison_options();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &n in &GLOBAL_FLIP_SIZES {
        for kind in ConstraintKind::ALL {
            let mut gammas = Vec::new();
            for &eps in &GLOBAL_FLIP_EPSILONS {
                let r = global_flip_comparison(n, eps, kind, &options)?.report;
                let case = format!("N={n} eps={eps} {kind}");
                rows.push(ReproRow::close_rel(&case, "gamma", expected_gamma(kind, n), r.gamma, 1e-6));
                rows.push(ReproRow::new(&case, "work", Relation::Close, n as f64 * (eps / 2.0).tanh(), r.work_parallel, 1e-8));
                gammas.push(r.gamma);
                reports.push(r);
            }
            let spread = gammas.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - gammas.iter().cloned().fold(f64::INFINITY, f64::min);
            rows.push(ReproRow::new(format!("N={n} {kind}"), "gamma_spread_over_eps", Relation::AtMost, 0.0, spread, 1e-9));
        }
    }
    Ok((rows, reports))
}

/// Block-saturating drive for the fixed `(N, k)` grid.
pub fn klocal_rows(config: &RunConfig) -> Result<(Vec<ReproRow>, Vec<AdvantageReport>)> {
    let options = config.comparison_options();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &(n, k) in &KLOCAL_CASES {
        for kind in ConstraintKind::ALL {
            let r = saturating_comparison(n, k, config.local_dim, kind, &options)?.report;
            let case = format!("N={n} k={k} {kind}");
            rows.push(ReproRow::close_rel(&case, "gamma", expected_gamma(kind, k), r.gamma, 1e-6));
            if kind == ConstraintKind::C0 {
                rows.push(ReproRow::new(&case, "beta", Relation::Close, 1.0, r.beta, 1e-8));
                rows.push(ReproRow::new(&case, "t_parallel", Relation::Close, FRAC_PI_2, r.t_parallel, 1e-8));
            }
            reports.push(r);
        }
    }
    Ok((rows, reports))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| Error::Numerics(format!("thread pool: {e}")))
}

/// Random disjoint circuits; every applicable bound becomes one row.
pub fn bound_rows(config: &RunConfig) -> Result<(Vec<ReproRow>, Vec<BoundCase>)> {
    let options = config.comparison_options();
    let max_batteries = config.n_sites.unwrap_or(6);
    let samples = config.samples.unwrap_or(200);
    let cases = pool(config.workers())?
        .install(|| (0..samples).into_par_iter().map(|i| random_bound_case(config.seed, i, max_batteries, &options)).collect::<Result<Vec<_>>>())?;
    let mut rows = Vec::new();
    for c in &cases {
        let case = format!("case={} N={} k={} layers={}", c.index, c.n_batteries, c.k, c.layers);
        rows.push(ReproRow::new(&case, "constraint_chain", Relation::Close, 1.0, if c.chain_ok { 1.0 } else { 0.0 }, 0.0));
        for r in &c.reports {
            for (name, b) in &r.bounds {
                if b.pass.is_some() {
                    rows.push(ReproRow::new(&case, format!("{}:{name}", r.constraint), Relation::AtMost, b.bound, b.measured, options.bound_slack * b.bound.abs()));
                }
            }
        }
    }
    Ok((rows, cases))
}

#[derive(Serialize)]
struct ReproSummary<'a> {
    #[serde(flatten)]
    provenance: Provenance,
    experiment: &'static str,
    rows: usize,
    misses: usize,
    pass: bool,
    failed: Vec<&'a ReproRow>,
}

pub(super) fn cmd_reproduce(config: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut files = Vec::new();
    let rows = match config.experiment {
        Experiment::GlobalFlip => {
            let (rows, reports) = global_flip_rows(config)?;
            files.push(out.join("reports.jsonl"));
            io::write_jsonl(&files[0], &reports)?;
            rows
        }
        Experiment::Klocal => {
            let (rows, reports) = klocal_rows(config)?;
            files.push(out.join("reports.jsonl"));
            io::write_jsonl(&files[0], &reports)?;
            rows
        }
        Experiment::Bounds => {
            let (rows, cases) = bound_rows(config)?;
            files.push(out.join("cases.jsonl"));
            io::write_jsonl(&files[0], &cases)?;
            rows
        }
        Experiment::ConjectureSmoke => {
            let mut sc = config.search_config()?;
            sc.n_sites = config.n_sites.unwrap_or(3);
            sc.k = config.k.unwrap_or(2);
            sc.samples = config.samples.unwrap_or(1000);
            sc.timing = false;
            let outcome = search(&sc)?;
            files.push(out.join("records.jsonl"));
            io::write_jsonl(&files[0], &outcome.records)?;
            let s = &outcome.summary;
            let case = format!("N={} k={} samples={}", sc.n_sites, sc.k, sc.samples);
            vec![
                ReproRow::new(&case, "max_p", Relation::AtMost, 1.0, s.max_p.unwrap_or(f64::NAN), 1e-9),
                ReproRow::new(&case, "counterexamples", Relation::Close, 0.0, s.counterexamples.len() as f64, 0.0),
            ]
        }
        other => return Err(Error::Config(format!("nothing to reproduce for `{}`", other.name()))),
    };
    let table = out.join("table.csv");
    std::fs::write(&table, table_csv(&rows))?;
    let failed: Vec<&ReproRow> = rows.iter().filter(|r| !r.pass).collect();
    let summary = out.join("summary.json");
    io::write_json(
        &summary,
        &ReproSummary {
            provenance: Provenance::of(config),
            experiment: config.experiment.name(),
            rows: rows.len(),
            misses: failed.len(),
            pass: failed.is_empty(),
            failed: failed.clone(),
        },
    )?;
    files.extend([table, summary]);
    for r in &failed {
        eprintln!(
            "MISS {} {}: measured {:e} {} expected {:e} (diff {:e}, tol {:e})",
            r.case,
            r.quantity,
            r.measured,
            r.relation.symbol(),
            r.expected,
            r.measured - r.expected,
            r.tolerance
        );
    }
    Ok(Outcome { exit_code: exit_code(&rows), files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_relations() {
        assert!(ReproRow::new("c", "q", Relation::Close, 1.0, 1.0 + 1e-9, 1e-8).pass);
        assert!(!ReproRow::new("c", "q", Relation::Close, 1.0, 1.1, 1e-8).pass);
        assert!(ReproRow::new("c", "q", Relation::AtMost, 1.0, 0.5, 0.0).pass);
        assert!(!ReproRow::new("c", "q", Relation::AtMost, 1.0, f64::NAN, 0.0).pass);
        assert!(!ReproRow::close_rel("c", "q", 2.0, 2.1, 1e-6).pass);
    }

    #[test]
    fn table_has_header_and_rows() {
        let rows = vec![ReproRow::new("a", "b", Relation::AtMost, 1.0, 0.5, 0.0)];
        let t = table_csv(&rows);
        assert_eq!(t.lines().count(), 2);
        assert!(t.ends_with("true\n"));
    }

    #[test]
    fn any_miss_exits_five() {
        let ok = ReproRow::new("a", "b", Relation::AtMost, 1.0, 0.5, 0.0);
        let miss = ReproRow::new("a", "c", Relation::Close, 1.0, 0.5, 0.0);
        assert_eq!(exit_code(std::slice::from_ref(&ok)), EXIT_OK);
        assert_eq!(exit_code(&[ok, miss]), EXIT_REPRODUCE_MISS);
    }
}
