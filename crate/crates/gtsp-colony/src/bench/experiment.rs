//! Declarative experiment configs and the seeded (instance, algorithm,
//! run) grid executor.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gap, BenchError, GapRecord, GapTable};
use crate::ingest::{generate_random_instance, parse_gtsp_instance};
use crate::model::Instance;
use crate::oracle::exact_optimum_dp;
use crate::solvers::{run, Algorithm, SolverParams};

use super::euf::{expected_utility, rank_algorithms, EufStats};

fn default_runs() -> usize {
    5
}

fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}

fn default_extent() -> f64 {
    1000.0
}

/// Experiment description, usually deserialized from a TOML file.
///
/// Per-run seeds are `master_seed + k` where `k` counts cells in
/// (instance, algorithm, run) order, so a config and one number pin the
/// whole experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    pub instances: Vec<InstanceSpec>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    /// Per-run wall-clock budget in seconds.
    #[serde(default)]
    pub time_limit: Option<f64>,
    /// Added to every deviation before the expected-utility statistics.
    #[serde(default)]
    pub translate: Option<f64>,
    /// Score per-run gaps instead of per-problem mean gaps.
    #[serde(default)]
    pub per_run: bool,
    /// Worker threads for the run grid; default: one per core.
    #[serde(default)]
    pub jobs: Option<usize>,
    /// TOML file mapping instance names to known optima.
    #[serde(default)]
    pub reference_optima: Option<PathBuf>,
    /// Where reports are written (CLI concern; relative to the config).
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Solver tunables; budget fields above override the ones in here.
    #[serde(default)]
    pub params: SolverParams,
}

/// One instance of an experiment: either a `.gtsp` file or a seeded
/// random instance, with an optional explicit reference optimum.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub random: Option<RandomSpec>,
    #[serde(default)]
    pub optimum: Option<f64>,
    /// Display-name override for reports.
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub seed: u64,
    pub clusters: usize,
    pub nodes: usize,
    #[serde(default = "default_extent")]
    pub extent: f64,
}

/// One solver execution inside an experiment, as logged to the JSONL
/// run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub algorithm: Algorithm,
    pub run: usize,
    pub seed: u64,
    pub best_cost: f64,
    pub iterations: usize,
    pub wall_time: f64,
    pub reference_optimum: f64,
    pub gap: f64,
}

/// Everything an experiment produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub gap_table: GapTable,
    pub runs: Vec<RunRecord>,
}

struct LoadedInstance {
    name: String,
    instance: Instance,
    reference: f64,
}

fn read_to_string(path: &Path) -> Result<String, BenchError> {
    fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads the reference-optima file: a TOML table of `name = cost`.
fn load_reference_file(path: &Path) -> Result<BTreeMap<String, f64>, BenchError> {
    let text = read_to_string(path)?;
    toml::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
}

fn load_instances(
    config: &ExperimentConfig,
    base_dir: &Path,
) -> Result<Vec<LoadedInstance>, BenchError> {
    let references = match &config.reference_optima {
        Some(rel) => load_reference_file(&base_dir.join(rel))?,
        None => BTreeMap::new(),
    };
    let mut out = Vec::with_capacity(config.instances.len());
    for (i, spec) in config.instances.iter().enumerate() {
        let instance = match (&spec.path, &spec.random) {
            (Some(path), None) => {
                let resolved = base_dir.join(path);
                parse_gtsp_instance(&read_to_string(&resolved)?)?
            }
            (None, Some(random)) => generate_random_instance(
                random.seed,
                random.clusters,
                random.nodes,
                random.extent,
            )?,
            _ => {
                return Err(BenchError::Config(format!(
                    "instance #{}: give exactly one of `path` or `random`",
                    i + 1
                )))
            }
        };
        let name = spec
            .name
            .clone()
            .unwrap_or_else(|| instance.name().to_string());
        let reference = match spec.optimum {
            Some(v) => v,
            None => match references.get(&name).or_else(|| references.get(instance.name())) {
                Some(&v) => v,
                None => match exact_optimum_dp(&instance) {
                    Ok(exact) => exact.optimum_cost,
                    Err(_) => return Err(BenchError::MissingReference(name)),
                },
            },
        };
        if reference <= 0.0 {
            return Err(BenchError::NonPositiveReference(reference));
        }
        out.push(LoadedInstance {
            name,
            instance,
            reference,
        });
    }
    Ok(out)
}

/// Executes the full (instance, algorithm, run) grid and aggregates gap
/// records. Cells run in parallel; the output order is fixed by sorting,
/// so a config and master seed reproduce the output exactly.
pub fn run_experiment(
    config: &ExperimentConfig,
    base_dir: &Path,
) -> Result<ExperimentOutput, BenchError> {
    if config.runs == 0 {
        return Err(BenchError::Config("runs must be >= 1".into()));
    }
    if config.algorithms.is_empty() {
        return Err(BenchError::Config("algorithms must not be empty".into()));
    }
    if config.instances.is_empty() {
        return Err(BenchError::Config("instances must not be empty".into()));
    }
    let mut params = config.params.clone();
    if let Some(iterations) = config.max_iterations {
        params.max_iterations = iterations;
    }
    params.time_limit = config.time_limit.or(params.time_limit);
    params.validate()?;

    let instances = load_instances(config, base_dir)?;

    struct Cell {
        instance_idx: usize,
        algorithm: Algorithm,
        run_idx: usize,
        seed: u64,
    }
    let mut cells = Vec::new();
    let mut counter = 0u64;
    for instance_idx in 0..instances.len() {
        for &algorithm in &config.algorithms {
            for run_idx in 0..config.runs {
                cells.push(Cell {
                    instance_idx,
                    algorithm,
                    run_idx,
                    seed: config.master_seed.wrapping_add(counter),
                });
                counter += 1;
            }
        }
    }

    let execute = |cell: &Cell| -> Result<RunRecord, BenchError> {
        let loaded = &instances[cell.instance_idx];
        let cell_params = SolverParams {
            seed: cell.seed,
            ..params.clone()
        };
        let result = run(cell.algorithm, &loaded.instance, &cell_params)?;
        Ok(RunRecord {
            instance: loaded.name.clone(),
            algorithm: cell.algorithm,
            run: cell.run_idx,
            seed: cell.seed,
            best_cost: result.best_cost,
            iterations: result.iterations_used,
            wall_time: result.wall_time,
            reference_optimum: loaded.reference,
            gap: gap(result.best_cost, loaded.reference)?,
        })
    };

    let records: Vec<RunRecord> = match config.jobs {
        Some(1) => cells.iter().map(&execute).collect::<Result<_, _>>()?,
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
            pool.install(|| cells.par_iter().map(execute).collect::<Result<_, _>>())?
        }
        None => cells.par_iter().map(execute).collect::<Result<_, _>>()?,
    };

    // Cells map one-to-one onto records in grid order already; fold them
    // into per-(instance, algorithm) gap records.
    let mut gap_records = Vec::new();
    let mut idx = 0;
    for loaded in &instances {
        for &algorithm in &config.algorithms {
            let slice = &records[idx..idx + config.runs];
            idx += config.runs;
            let costs: Vec<f64> = slice.iter().map(|r| r.best_cost).collect();
            let mean_gap = slice.iter().map(|r| r.gap).sum::<f64>() / config.runs as f64;
            gap_records.push(GapRecord {
                problem: loaded.name.clone(),
                algorithm,
                runs: costs,
                reference_optimum: loaded.reference,
                mean_gap,
            });
        }
    }

    Ok(ExperimentOutput {
        gap_table: GapTable {
            records: gap_records,
        },
        runs: records,
    })
}

/// Rebuilds a gap table from logged run records, grouping by (instance,
/// algorithm) in first-seen order.
pub fn table_from_runs(runs: &[RunRecord]) -> GapTable {
    let mut order: Vec<(String, Algorithm)> = Vec::new();
    for record in runs {
        let key = (record.instance.clone(), record.algorithm);
        if !order.contains(&key) {
            order.push(key);
        }
    }
    let records = order
        .into_iter()
        .map(|(instance, algorithm)| {
            let cell: Vec<&RunRecord> = runs
                .iter()
                .filter(|r| r.instance == instance && r.algorithm == algorithm)
                .collect();
            GapRecord {
                problem: instance,
                algorithm,
                runs: cell.iter().map(|r| r.best_cost).collect(),
                reference_optimum: cell[0].reference_optimum,
                mean_gap: cell.iter().map(|r| r.gap).sum::<f64>() / cell.len() as f64,
            }
        })
        .collect();
    GapTable { records }
}

/// Expected-utility ranking from a gap table: one deviation per problem
/// (the mean gap) or per run, optionally translated, per algorithm.
pub fn euf_from_table(
    table: &GapTable,
    per_run: bool,
    translate: Option<f64>,
) -> Result<Vec<EufStats>, BenchError> {
    let mut stats = Vec::new();
    for algorithm in table.algorithms() {
        let mut deviations = Vec::new();
        for record in table.records.iter().filter(|r| r.algorithm == algorithm) {
            if per_run {
                for &cost in &record.runs {
                    deviations.push(gap(cost, record.reference_optimum)?);
                }
            } else {
                deviations.push(record.mean_gap);
            }
        }
        if let Some(units) = translate {
            for d in &mut deviations {
                *d += units;
            }
        }
        stats.push(expected_utility(algorithm.label(), &deviations)?);
    }
    Ok(rank_algorithms(stats))
}
