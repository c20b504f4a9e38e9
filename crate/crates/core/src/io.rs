//! File formats: schedule JSON, trajectory CSV with a JSON sidecar, hashing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::operator::{LocalTerm, Matrix, Operator, Partition, C64};
use crate::policy::NumericPolicy;
use crate::protocols::{InternalHamiltonian, Schedule, Segment};

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TRAJECTORY_COLUMNS: [&str; 8] = ["t", "work", "power", "mean_H", "std_H", "norm_H", "ground_H", "radius_to_mixed"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TermDoc {
    partition: Vec<usize>,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SegmentDoc {
    duration: f64,
    terms: Vec<TermDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ScheduleDoc {
    schema_version: u32,
    n_sites: usize,
    local_dim: usize,
    internal_spectrum: Vec<f64>,
    segments: Vec<SegmentDoc>,
}

impl From<&Schedule> for ScheduleDoc {
    fn from(s: &Schedule) -> Self {
        let segments = s
            .segments()
            .iter()
            .map(|seg| SegmentDoc {
                duration: seg.duration,
                terms: seg
                    .terms
                    .iter()
                    .map(|t| {
                        let m = t.op.matrix();
                        TermDoc {
                            partition: t.partition.indices().to_vec(),
                            matrix: (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect(),
                        }
                    })
                    .collect(),
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            n_sites: s.n_sites(),
            local_dim: s.local_dim(),
            internal_spectrum: s.internal().spectrum().to_vec(),
            segments,
        }
    }
}

impl TryFrom<ScheduleDoc> for Schedule {
    type Error = Error;

    fn try_from(doc: ScheduleDoc) -> Result<Self> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schedule schema version {}", doc.schema_version)));
        }
        let internal = InternalHamiltonian::new(doc.internal_spectrum)?;
        if internal.local_dim() != doc.local_dim {
            return Err(Error::Config(format!(
                "internal spectrum has {} levels but local_dim is {}",
                internal.local_dim(),
                doc.local_dim
            )));
        }
        let segments = doc
            .segments
            .into_iter()
            .map(|seg| {
                let terms = seg
                    .terms
                    .into_iter()
                    .map(|t| {
                        let n = t.matrix.len();
                        if t.matrix.iter().any(|row| row.len() != n) {
                            return Err(Error::Config("term matrix is not square".into()));
                        }
                        let m = Matrix::from_fn(n, n, |r, c| C64::new(t.matrix[r][c][0], t.matrix[r][c][1]));
                        let op = Operator::from_matrix(m, doc.local_dim)?;
                        LocalTerm::new(Partition::new(t.partition, doc.n_sites)?, op)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Segment { duration: seg.duration, terms })
            })
            .collect::<Result<Vec<_>>>()?;
        Schedule::new(doc.n_sites, internal, segments)
    }
}

pub fn schedule_to_json(schedule: &Schedule) -> String {
    serde_json::to_string_pretty(&ScheduleDoc::from(schedule)).expect("schedule documents serialize")
}

pub fn schedule_from_json(text: &str) -> Result<Schedule> {
    let doc: ScheduleDoc = serde_json::from_str(text)?;
    doc.try_into()
}

pub fn read_schedule(path: &Path) -> Result<Schedule> {
    schedule_from_json(&fs::read_to_string(path)?)
}

pub fn write_schedule(path: &Path, schedule: &Schedule) -> Result<()> {
    fs::write(path, schedule_to_json(schedule))?;
    Ok(())
}

/// Hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the compact schedule document.
pub fn schedule_hash(schedule: &Schedule) -> String {
    sha256_hex(&serde_json::to_vec(&ScheduleDoc::from(schedule)).expect("schedule documents serialize"))
}

/// Metadata written next to a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub schema_version: u32,
    pub artifact_version: String,
    pub schedule_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub samples_per_segment: usize,
    pub n_samples: usize,
    pub duration: f64,
    pub work: f64,
    pub tolerances: NumericPolicy,
}

impl TrajectoryMeta {
    pub fn new(schedule: &Schedule, trajectory: &Trajectory, samples_per_segment: usize, seed: Option<u64>, tolerances: NumericPolicy) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.into(),
            schedule_hash: schedule_hash(schedule),
            config_hash: None,
            seed,
            samples_per_segment,
            n_samples: trajectory.samples().len(),
            duration: trajectory.duration(),
            work: trajectory.work(),
            tolerances,
        }
    }
}

pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let mut out = TRAJECTORY_COLUMNS.join(",");
    out.push('\n');
    for s in trajectory.samples() {
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            s.t,
            s.work,
            s.power,
            s.mean_h,
            s.std_h(),
            s.norm_h,
            s.ground_h,
            s.radius_to_mixed
        );
    }
    out
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns both paths.
pub fn write_trajectory(dir: &Path, stem: &str, trajectory: &Trajectory, meta: &TrajectoryMeta) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    fs::write(&csv, trajectory_csv(trajectory))?;
    write_json(&json, meta)?;
    Ok((csv, json))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// One compact JSON document per line.
pub fn write_jsonl<T: Serialize>(path: &Path, values: &[T]) -> Result<()> {
    let mut text = String::new();
    for v in values {
        text.push_str(&serde_json::to_string(v)?);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::propagate;
    use crate::operator::RngStream;
    use crate::protocols::{mirrored_random_circuit, saturating_klocal_protocol};
    use crate::states::DensityMatrix;

    #[test]
    fn schedule_round_trip_is_exact() {
        let mut rng = RngStream::new(8, 2);
        let s = mirrored_random_circuit(&InternalHamiltonian::unit_gap_qubit(), 4, 2, 2, &mut rng).unwrap();
        let back = schedule_from_json(&schedule_to_json(&s)).unwrap();
        assert_eq!(back, s);
        assert_eq!(schedule_hash(&back), schedule_hash(&s));
    }

    #[test]
    fn bad_documents_rejected() {
        let s = saturating_klocal_protocol(2, 2, &InternalHamiltonian::symmetric_linear(2).unwrap()).unwrap();
        let text = schedule_to_json(&s);
        let wrong_version = text.replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(matches!(schedule_from_json(&wrong_version), Err(Error::Config(_))));
        assert!(matches!(schedule_from_json("{"), Err(Error::Json(_))));
    }

    #[test]
    fn csv_has_fixed_columns() {
        let s = saturating_klocal_protocol(2, 1, &InternalHamiltonian::symmetric_linear(2).unwrap()).unwrap();
        let tr = propagate(&s, &DensityMatrix::basis(2, 0).unwrap().tensor_power(2).unwrap(), 4).unwrap();
        let csv = trajectory_csv(&tr);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,work,power,mean_H,std_H,norm_H,ground_H,radius_to_mixed");
        assert_eq!(lines.count(), 5);
    }

    #[test]
    fn hash_is_sha256() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
