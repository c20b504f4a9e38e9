//! Config-driven command line: `qbattery simulate|advantage|reproduce|conjecture`.

mod config;
mod reproduce;

use std::ffi::OsString;
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{Experiment, Protocol, RunConfig};
pub use reproduce::{bound_rows, exit_code as reproduce_exit_code, klocal_rows, global_flip_rows, table_csv, Relation, ReproRow};

use crate::conjecture::search;
use crate::error::{Error, Result};
use crate::evolution::propagate;
use crate::experiments::{ground_to_top_task, thermal_flip_task};
use crate::io::{self, TrajectoryMeta, ARTIFACT_VERSION, SCHEMA_VERSION};
use crate::metrics::{compare, AdvantageReport, ChargingTask, Comparison};
use crate::operator::Operator;
use crate::protocols::{extremal_flip_term, global_product_protocol, parallel_protocol, saturating_klocal_protocol, InternalHamiltonian, Schedule};
use crate::states::{tensor_states, thermal_state, DensityMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REPRODUCE_MISS: i32 = 5;
pub const EXIT_COUNTEREXAMPLE: i32 = 10;

#[derive(Debug, Parser)]
#[command(name = "qbattery", version, about = "Collective charging of quantum batteries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Propagate one schedule and write its trajectory.
    Simulate(CommonArgs),
    /// Fair parallel-versus-collective comparison.
    Advantage(CommonArgs),
    /// Rerun a named experiment against its expected values.
    Reproduce(CommonArgs),
    /// Random search on the commutator norm ratio.
    Conjecture(CommonArgs),
}

#[derive(Debug, Clone, PartialEq, Eq, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Result of a successful command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<Outcome> {
    let (args, kind) = match command {
        Command::Simulate(a) => (a, "simulate"),
        Command::Advantage(a) => (a, "advantage"),
        Command::Reproduce(a) => (a, "reproduce"),
        Command::Conjecture(a) => (a, "conjecture"),
    };
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| std::io::Error::new(e.kind(), format!("reading {}: {e}", args.config.display())))?;
    let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    config.apply_overrides(args.seed, args.workers);
    config.validate()?;
    let base = config.config_dir(&args.config);
    let out = output_dir(args.out.as_deref(), &config);
    std::fs::create_dir_all(&out)?;
    if kind != "reproduce" {
        config.require_sizes()?;
    }
    match kind {
        "simulate" => cmd_simulate(&config, &base, &out),
        "advantage" => cmd_advantage(&config, &base, &out),
        "reproduce" => reproduce::cmd_reproduce(&config, &out),
        _ => cmd_conjecture(&config, &out),
    }
}

/// `--out`, then `QBATTERY_OUT`, then the config's `out`, then `qbattery-out`.
fn output_dir(flag: Option<&Path>, config: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os("QBATTERY_OUT").map(PathBuf::from))
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("qbattery-out"))
}

/// Provenance header shared by every JSON artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub schema_version: u32,
    pub artifact_version: &'static str,
    pub config_hash: String,
}

impl Provenance {
    pub fn of(config: &RunConfig) -> Self {
        Self { schema_version: SCHEMA_VERSION, artifact_version: ARTIFACT_VERSION, config_hash: config.hash() }
    }
}

fn single_site_state(internal: &InternalHamiltonian, epsilon: Option<f64>) -> Result<DensityMatrix> {
    match epsilon {
        Some(e) => thermal_state(&internal.site_operator(), e),
        None => DensityMatrix::basis(internal.local_dim(), 0),
    }
}

fn task_for(config: &RunConfig, internal: &InternalHamiltonian, n: usize) -> Result<ChargingTask> {
    match config.experiment {
        Experiment::GlobalFlip => thermal_flip_task(n, config.epsilon()),
        Experiment::Klocal => ground_to_top_task(n, config.local_dim),
        _ => match config.epsilon {
            Some(e) => Ok(ChargingTask {
                rho: thermal_state(&internal.site_operator(), e)?,
                sigma: thermal_state(&internal.site_operator(), -e)?,
                n_batteries: n,
            }),
            None => ground_to_top_task(n, internal.local_dim()),
        },
    }
}

/// Schedule and initial state described by a simulate config.
pub fn simulation_input(config: &RunConfig, base: &Path) -> Result<(Schedule, DensityMatrix)> {
    let n = config.n_sites();
    match config.experiment {
        Experiment::GlobalFlip => {
            let internal = InternalHamiltonian::unit_gap_qubit();
            let x = Operator::sigma_x();
            let t = config.duration.unwrap_or(FRAC_PI_2);
            let schedule = match config.protocol.unwrap_or(Protocol::Parallel) {
                Protocol::Parallel => parallel_protocol(&x, &internal, n, t)?,
                Protocol::Global => global_product_protocol(&x, &internal, n, config.alpha.unwrap_or(1.0), t)?,
                Protocol::Saturating => return Err(Error::Config("global-flip has no saturating protocol".into())),
            };
            let rho = thermal_state(&internal.site_operator(), config.epsilon())?.tensor_power(n)?;
            Ok((schedule, rho))
        }
        Experiment::Klocal => {
            let internal = InternalHamiltonian::symmetric_linear(config.local_dim)?;
            let schedule = match config.protocol.unwrap_or(Protocol::Saturating) {
                Protocol::Saturating => saturating_klocal_protocol(n, config.k(), &internal)?,
                Protocol::Parallel => parallel_protocol(&extremal_flip_term(config.local_dim, 1)?, &internal, n, config.duration.unwrap_or(FRAC_PI_2))?,
                Protocol::Global => return Err(Error::Config("klocal has no global protocol".into())),
            };
            let rho = DensityMatrix::basis(config.local_dim, 0)?.tensor_power(n)?;
            Ok((schedule, rho))
        }
        Experiment::Custom => {
            let path = config.schedule.as_ref().ok_or_else(|| Error::Config("custom simulate needs `schedule`".into()))?;
            let schedule = io::read_schedule(&base.join(path))?;
            let site = single_site_state(schedule.internal(), config.epsilon)?;
            let rho = tensor_states(&vec![site; schedule.n_sites()])?;
            Ok((schedule, rho))
        }
        other => Err(Error::Config(format!("simulate does not run `{}`", other.name()))),
    }
}

fn cmd_simulate(config: &RunConfig, base: &Path, out: &Path) -> Result<Outcome> {
    let (schedule, rho) = simulation_input(config, base)?;
    let trajectory = propagate(&schedule, &rho, config.samples_per_segment)?;
    let mut meta = TrajectoryMeta::new(&schedule, &trajectory, config.samples_per_segment, Some(config.seed), config.tolerances);
    meta.config_hash = Some(config.hash());
    let (csv, json) = io::write_trajectory(out, "trajectory", &trajectory, &meta)?;
    let sched = out.join("schedule.json");
    io::write_schedule(&sched, &schedule)?;
    Ok(Outcome { exit_code: EXIT_OK, files: vec![csv, json, sched] })
}

/// Runs the comparison described by an advantage config.
pub fn advantage_comparison(config: &RunConfig, base: &Path) -> Result<Comparison> {
    let options = config.comparison_options();
    let kind = config.constraint();
    match config.experiment {
        Experiment::GlobalFlip => crate::experiments::global_flip_comparison(config.n_sites(), config.epsilon(), kind, &options),
        Experiment::Klocal => crate::experiments::saturating_comparison(config.n_sites(), config.k(), config.local_dim, kind, &options),
        Experiment::Custom => {
            let load = |p: &Option<PathBuf>, what: &str| -> Result<Schedule> {
                let p = p.as_ref().ok_or_else(|| Error::Config(format!("custom advantage needs `{what}`")))?;
                io::read_schedule(&base.join(p))
            };
            let parallel = load(&config.parallel_schedule, "parallel_schedule")?;
            let collective = load(&config.schedule, "schedule")?;
            if parallel.n_sites() != collective.n_sites() || parallel.internal() != collective.internal() {
                return Err(Error::Config("parallel and collective schedules describe different batteries".into()));
            }
            let task = task_for(config, collective.internal(), collective.n_sites())?;
            compare(&parallel, &collective, &task, kind, &options)
        }
        other => Err(Error::Config(format!("advantage does not run `{}`", other.name()))),
    }
}

#[derive(Serialize)]
struct AdvantageDoc<'a> {
    #[serde(flatten)]
    provenance: Provenance,
    alpha: f64,
    report: &'a AdvantageReport,
}

fn cmd_advantage(config: &RunConfig, base: &Path, out: &Path) -> Result<Outcome> {
    let c = advantage_comparison(config, base)?;
    let json = out.join("advantage.json");
    io::write_json(&json, &AdvantageDoc { provenance: Provenance::of(config), alpha: c.alpha, report: &c.report })?;
    let csv = out.join("advantage.csv");
    std::fs::write(&csv, format!("{}\n{}\n", AdvantageReport::CSV_HEADER, c.report.csv_row()))?;
    let mut files = vec![json, csv];
    for (stem, s, t) in [("parallel", &c.parallel, &c.parallel_trajectory), ("collective", &c.collective, &c.collective_trajectory)] {
        let mut meta = TrajectoryMeta::new(s, t, config.samples_per_segment, Some(config.seed), config.tolerances);
        meta.config_hash = Some(config.hash());
        let (a, b) = io::write_trajectory(out, stem, t, &meta)?;
        files.extend([a, b]);
    }
    if !c.report.all_pass() {
        eprintln!("warning: an applicable bound failed; see {}", files[0].display());
    }
    Ok(Outcome { exit_code: EXIT_OK, files })
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    artifact_version: &'static str,
    config_hash: String,
    #[serde(flatten)]
    summary: &'a crate::conjecture::SearchSummary,
}

fn cmd_conjecture(config: &RunConfig, out: &Path) -> Result<Outcome> {
    if config.experiment != Experiment::Conjecture {
        return Err(Error::Config(format!("conjecture does not run `{}`", config.experiment.name())));
    }
    let search_config = config.search_config()?;
    let outcome = search(&search_config)?;
    let records = out.join("records.jsonl");
    io::write_jsonl(&records, &outcome.records)?;
    let summary = out.join("summary.json");
    io::write_json(&summary, &SummaryDoc { artifact_version: ARTIFACT_VERSION, config_hash: config.hash(), summary: &outcome.summary })?;
    let code = if outcome.summary.counterexamples.is_empty() { EXIT_OK } else { EXIT_COUNTEREXAMPLE };
    if code != EXIT_OK {
        eprintln!("{} counterexample(s) recorded in {}", outcome.summary.counterexamples.len(), summary.display());
    }
    Ok(Outcome { exit_code: code, files: vec![records, summary] })
}
