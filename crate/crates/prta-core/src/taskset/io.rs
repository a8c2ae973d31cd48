//! Task-set JSON format.
//!
//! Probabilities are serialized as decimal strings with 17 significant
//! digits, which round-trips every finite double exactly; integer fields
//! round-trip bit-exactly by construction.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Task, TaskSet, TaskSetError};
use crate::pmf::Pmf;
use crate::time::TimeUnit;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TaskSetFile {
    schema_version: u32,
    gamma_seconds: f64,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config_hash: Option<String>,
    tasks: Vec<TaskFile>,
}

#[derive(Serialize, Deserialize)]
struct TaskFile {
    id: u32,
    period_ticks: u64,
    deadline_ticks: u64,
    priority: u32,
    wcet_ticks: u64,
    exec_pmf: PmfFile,
}

#[derive(Serialize, Deserialize)]
struct PmfFile {
    start_tick: u64,
    probs: Vec<String>,
}

fn encode_prob(p: f64) -> String {
    format!("{p:.16e}")
}

impl PmfFile {
    fn from_pmf(pmf: &Pmf) -> PmfFile {
        let start = pmf.probs().iter().position(|&p| p > 0.0).unwrap_or(0);
        PmfFile {
            start_tick: start as u64,
            probs: pmf.probs()[start..]
                .iter()
                .map(|&p| encode_prob(p))
                .collect(),
        }
    }

    fn to_pmf(&self) -> Result<Pmf, TaskSetError> {
        let mut pairs = Vec::with_capacity(self.probs.len());
        for (i, text) in self.probs.iter().enumerate() {
            let p: f64 = text.parse().map_err(|_| {
                TaskSetError::InvariantViolation(format!("unparseable probability {text:?}"))
            })?;
            pairs.push((self.start_tick + i as u64, p));
        }
        Ok(Pmf::from_pairs(&pairs)?)
    }
}

pub fn save_taskset(ts: &TaskSet, path: impl AsRef<Path>) -> Result<(), TaskSetError> {
    let file = TaskSetFile {
        schema_version: SCHEMA_VERSION,
        gamma_seconds: ts.gamma,
        seed: ts.seed,
        config_hash: ts.config_hash.clone(),
        tasks: ts
            .tasks
            .iter()
            .map(|t| TaskFile {
                id: t.id,
                period_ticks: t.period.ticks(),
                deadline_ticks: t.deadline.ticks(),
                priority: t.priority,
                wcet_ticks: t.wcet.ticks(),
                exec_pmf: PmfFile::from_pmf(&t.exec_pmf),
            })
            .collect(),
    };
    let mut body = serde_json::to_string_pretty(&file)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

pub fn load_taskset(path: impl AsRef<Path>) -> Result<TaskSet, TaskSetError> {
    let file: TaskSetFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(TaskSetError::SchemaVersionMismatch {
            found: file.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let mut tasks = Vec::with_capacity(file.tasks.len());
    for t in &file.tasks {
        tasks.push(Task {
            id: t.id,
            period: TimeUnit(t.period_ticks),
            deadline: TimeUnit(t.deadline_ticks),
            priority: t.priority,
            wcet: TimeUnit(t.wcet_ticks),
            exec_pmf: t.exec_pmf.to_pmf()?,
        });
    }
    TaskSet::new(tasks, file.gamma_seconds, file.seed, file.config_hash)
}
