//! Benchmark harness: multi-run gap tables, expected-utility ranking and
//! report emission, all reproducible from one master seed.

mod euf;
mod experiment;
mod report;

pub use euf::{expected_utility, rank_algorithms, EufStats, EUF_BETA, EUF_GAMMA, EUF_T};
pub use experiment::{
    euf_from_table, run_experiment, table_from_runs, ExperimentConfig, ExperimentOutput,
    InstanceSpec, RandomSpec, RunRecord,
};
pub use report::{emit_euf_report, emit_gap_report, ReportFormat};

use thiserror::Error;

use crate::ingest::IngestError;
use crate::oracle::OracleError;
use crate::solvers::{Algorithm, SolverError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("reference cost must be positive, got {0}")]
    NonPositiveReference(f64),
    #[error("expected utility needs at least one deviation")]
    EmptyDeviations,
    #[error("expected utility undefined for x_bar = {x_bar}, s2 = {s2}: {why}")]
    EufDomain { x_bar: f64, s2: f64, why: String },
    #[error("no reference optimum for instance '{0}': give `optimum`, list it in the reference file, or keep it small enough for the exact solver")]
    MissingReference(String),
    #[error("experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Percentage gap of a solution against a reference cost.
pub fn gap(solution_cost: f64, reference_cost: f64) -> Result<f64, BenchError> {
    if reference_cost <= 0.0 {
        return Err(BenchError::NonPositiveReference(reference_cost));
    }
    Ok(100.0 * (solution_cost - reference_cost) / reference_cost)
}

/// Gap results of one (problem, algorithm) cell: the per-run best costs
/// and their mean percentage gap against the reference optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRecord {
    pub problem: String,
    pub algorithm: Algorithm,
    pub runs: Vec<f64>,
    pub reference_optimum: f64,
    pub mean_gap: f64,
}

/// All gap records of an experiment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GapTable {
    pub records: Vec<GapRecord>,
}

impl GapTable {
    /// Problems in first-seen order.
    pub fn problems(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for record in &self.records {
            if !seen.contains(&record.problem.as_str()) {
                seen.push(record.problem.as_str());
            }
        }
        seen
    }

    /// Algorithms present, in the canonical report order.
    pub fn algorithms(&self) -> Vec<Algorithm> {
        Algorithm::ALL
            .into_iter()
            .filter(|a| self.records.iter().any(|r| r.algorithm == *a))
            .collect()
    }

    pub fn mean_gap(&self, problem: &str, algorithm: Algorithm) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.problem == problem && r.algorithm == algorithm)
            .map(|r| r.mean_gap)
    }
}
