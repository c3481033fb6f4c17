//! The colony engine and the five agent-based strategies.
//!
//! All strategies share the same skeleton: agents build tours one at a
//! time (so local trail updates from earlier agents steer later ones in
//! the same iteration), the iteration's incumbent is folded into the
//! global best, and an elitist global rule reinforces the best tour's
//! edges. They differ in the local rule, the population structure and how
//! agents exchange information:
//!
//! - ACS: the plain colony — local steps toward the initial trail value.
//! - RACS: local steps toward `1/(n * best)` plus a trail reset above
//!   `tau_max`, seeded with a greedy incumbent.
//! - SACS: two populations of sensitive agents (explorers below `s0`,
//!   exploiters above) sharing one damped local rule.
//! - SRM: robot teams split per move by the explore/exploit draw, with
//!   `q0` doubling as the evaporation factor in both rules.
//! - SSAS: exploiter agents announce their edges; explorer agents weight
//!   announced edges more heavily, with the reinforcing local rule.

mod construction;
mod knowledge;
mod pheromone;

pub use construction::{AgentState, Colony, ConstructSpec, MessageBias};
pub use knowledge::{EdgeReport, KnowledgeBase};
pub use pheromone::{
    clamp_pheromone, global_update, global_update_srm, local_update_acs, local_update_racs,
    local_update_sacs, local_update_srm, visibility, PheromoneMatrix, VISIBILITY_CAP,
};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, ModelError, Tour};
use crate::oracle::nearest_neighbor;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error("no candidate nodes left from node {node}; construction loop bug")]
    EmptyCandidateSet { node: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The five strategies, in the order reports list them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Acs,
    Racs,
    Sacs,
    Srm,
    Ssas,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Acs,
        Algorithm::Racs,
        Algorithm::Sacs,
        Algorithm::Srm,
        Algorithm::Ssas,
    ];

    /// Upper-case label for report tables.
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Acs => "ACS",
            Algorithm::Racs => "RACS",
            Algorithm::Sacs => "SACS",
            Algorithm::Srm => "SRM",
            Algorithm::Ssas => "SSAS",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algorithm::Acs => "acs",
            Algorithm::Racs => "racs",
            Algorithm::Sacs => "sacs",
            Algorithm::Srm => "srm",
            Algorithm::Ssas => "ssas",
        };
        f.write_str(s)
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "acs" => Ok(Algorithm::Acs),
            "racs" => Ok(Algorithm::Racs),
            "sacs" => Ok(Algorithm::Sacs),
            "srm" => Ok(Algorithm::Srm),
            "ssas" => Ok(Algorithm::Ssas),
            other => Err(format!(
                "unknown algorithm '{other}' (expected acs, racs, sacs, srm or ssas)"
            )),
        }
    }
}

/// All tunables of a solver run. Defaults follow the standard benchmark
/// configuration: `beta = 5`, `rho = 0.5`, `q0 = 0.5`, ten agents,
/// `s0 = 0.5` and a uniform agent sensitivity of `0.01`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Visibility exponent.
    pub beta: f64,
    /// Evaporation rate, in (0, 1).
    pub rho: f64,
    /// Exploitation threshold, in [0, 1]; the move exploits when the
    /// uniform draw lands at or below it.
    pub q0: f64,
    /// Sensitivity split point for the two-population strategies.
    pub s0: f64,
    /// Number of agents per iteration.
    pub ants: usize,
    /// Per-agent sensitivity level for the stigmergic strategy.
    pub psl: f64,
    /// Iteration budget.
    pub max_iterations: usize,
    /// Wall-clock budget in seconds; checked between iterations.
    pub time_limit: Option<f64>,
    /// Master seed; the whole run is a function of it.
    pub seed: u64,
    /// Robot strategy: draw the explore/exploit coin once per tour
    /// instead of once per move.
    pub srm_per_tour_q: bool,
    /// Weight multiplier (before sensitivity damping) on announced edges
    /// for explorer agents in the stigmergic strategy.
    pub message_boost: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            beta: 5.0,
            rho: 0.5,
            q0: 0.5,
            s0: 0.5,
            ants: 10,
            psl: 0.01,
            max_iterations: 1000,
            time_limit: None,
            seed: 42,
            srm_per_tour_q: false,
            message_boost: 2.0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SolverError> {
        let mut problems = Vec::new();
        if !(self.rho > 0.0 && self.rho < 1.0) {
            problems.push(format!("rho must be in (0, 1), got {}", self.rho));
        }
        for (name, v) in [("q0", self.q0), ("s0", self.s0), ("psl", self.psl)] {
            if !(0.0..=1.0).contains(&v) {
                problems.push(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            problems.push(format!("beta must be finite and >= 0, got {}", self.beta));
        }
        if self.ants == 0 {
            problems.push("ants must be >= 1".into());
        }
        if self.max_iterations == 0 {
            problems.push("max_iterations must be >= 1".into());
        }
        if let Some(limit) = self.time_limit {
            if !(limit >= 0.0 && limit.is_finite()) {
                problems.push(format!("time_limit must be finite and >= 0, got {limit}"));
            }
        }
        if !(self.message_boost > 0.0 && self.message_boost.is_finite()) {
            problems.push(format!(
                "message_boost must be finite and > 0, got {}",
                self.message_boost
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SolverError::InvalidParams(problems.join("; ")))
        }
    }
}

/// Local trail rule applied to each traversed edge during construction.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum LocalRule {
    /// Leave trails untouched.
    #[default]
    None,
    /// Step toward the initial trail value.
    Acs,
    /// Step toward `1/(n * best_cost)`.
    Racs { best_cost: f64 },
    /// Sensitivity-damped step toward `tau0 / n`.
    Sacs { sensitivity: f64 },
    /// Quadratic `q0` step toward the initial trail value.
    Srm,
}

/// Outcome of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best_tour: Tour,
    pub best_cost: f64,
    pub iterations_used: usize,
    pub wall_time: f64,
    /// Best cost after each iteration; non-increasing.
    pub cost_trace: Vec<f64>,
}

/// Per-iteration view handed to [`run_with_observer`] callbacks, taken
/// after the global update (and trail reset, where the strategy has one).
pub struct IterationSnapshot<'a> {
    pub iteration: usize,
    pub best_cost: f64,
    pub pheromone: &'a PheromoneMatrix,
}

/// Runs a strategy until the iteration budget or time limit is exhausted.
/// Identical `(algorithm, instance, params)` triples give identical
/// results; the run is a pure function of `params.seed`.
pub fn run(
    algorithm: Algorithm,
    instance: &Instance,
    params: &SolverParams,
) -> Result<SolveResult, SolverError> {
    run_with_observer(algorithm, instance, params, |_| {})
}

/// [`run`], invoking `observer` after every completed iteration.
pub fn run_with_observer(
    algorithm: Algorithm,
    instance: &Instance,
    params: &SolverParams,
    mut observer: impl FnMut(IterationSnapshot<'_>),
) -> Result<SolveResult, SolverError> {
    params.validate()?;
    let started = Instant::now();
    let n = instance.n();
    let p = instance.p();
    let m = params.ants;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let colony = Colony::new(instance, params.clone())?;

    // Greedy construction fixes the trail scale; it also seeds the
    // incumbent for the strategies whose rules consume a best cost from
    // the first iteration on.
    let start_cluster = rng.gen_range(0..p);
    let members = instance.cluster_members(start_cluster);
    let greedy_start = members[rng.gen_range(0..members.len())];
    let greedy = nearest_neighbor(instance, greedy_start)?;
    let l_nn = greedy.cost;
    let tau0 = 1.0 / (n as f64 * l_nn);
    let tau_max = 1.0 / ((1.0 - params.rho) * l_nn);
    let mut pheromone = PheromoneMatrix::new(n, tau0, tau_max);

    let mut best: Option<Tour> = match algorithm {
        Algorithm::Acs | Algorithm::Racs | Algorithm::Ssas => Some(greedy),
        Algorithm::Sacs | Algorithm::Srm => None,
    };

    // Population roles. The first half of a split population acts first:
    // explorers for the sensitive colony, exploiters for the stigmergic
    // agents.
    let half = m / 2;
    let sacs_sensitivity: Vec<f64> = if algorithm == Algorithm::Sacs {
        (0..m)
            .map(|k| {
                if k < half {
                    range_or_point(&mut rng, 0.0, params.s0)
                } else {
                    range_or_point(&mut rng, params.s0, 1.0)
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut kb = KnowledgeBase::new(n);
    let bias_factor = params.message_boost / (1.0 + params.psl);

    let mut trace = Vec::new();
    for iteration in 0..params.max_iterations {
        if iteration > 0 {
            if let Some(limit) = params.time_limit {
                if started.elapsed().as_secs_f64() >= limit {
                    break;
                }
            }
        }
        let incumbent_cost = best.as_ref().map(|t| t.cost);
        let mut iteration_best: Option<Tour> = None;
        let mut consider = |tour: Tour| {
            if iteration_best.as_ref().is_none_or(|b| tour.cost < b.cost) {
                iteration_best = Some(tour);
            }
        };

        match algorithm {
            Algorithm::Acs => {
                let spec = ConstructSpec {
                    rule: LocalRule::Acs,
                    ..ConstructSpec::default()
                };
                for _ in 0..m {
                    consider(colony.construct_tour(&mut pheromone, &mut rng, &spec)?);
                }
            }
            Algorithm::Racs => {
                let spec = ConstructSpec {
                    rule: LocalRule::Racs {
                        best_cost: incumbent_cost.expect("greedy-seeded"),
                    },
                    ..ConstructSpec::default()
                };
                for _ in 0..m {
                    consider(colony.construct_tour(&mut pheromone, &mut rng, &spec)?);
                }
            }
            Algorithm::Sacs => {
                for &sensitivity in &sacs_sensitivity {
                    let spec = ConstructSpec {
                        rule: LocalRule::Sacs { sensitivity },
                        sensitivity,
                        ..ConstructSpec::default()
                    };
                    consider(colony.construct_tour(&mut pheromone, &mut rng, &spec)?);
                }
            }
            Algorithm::Srm => {
                let spec = ConstructSpec {
                    rule: LocalRule::Srm,
                    per_tour_q: params.srm_per_tour_q,
                    ..ConstructSpec::default()
                };
                for _ in 0..m {
                    consider(colony.construct_tour(&mut pheromone, &mut rng, &spec)?);
                }
            }
            Algorithm::Ssas => {
                // Exploiters move first and announce every edge they form.
                let spec = ConstructSpec {
                    sensitivity: params.psl,
                    ..ConstructSpec::default()
                };
                for agent in 0..half {
                    let tour = colony.construct_tour(&mut pheromone, &mut rng, &spec)?;
                    for (i, j) in tour.edges() {
                        kb.publish(i, j, agent, iteration);
                    }
                    consider(tour);
                }
                // Explorers consume the announcements.
                let spec = ConstructSpec {
                    rule: LocalRule::Racs {
                        best_cost: incumbent_cost.expect("greedy-seeded"),
                    },
                    bias: Some(MessageBias {
                        knowledge: &kb,
                        factor: bias_factor,
                    }),
                    sensitivity: params.psl,
                    per_tour_q: false,
                };
                for _ in half..m {
                    consider(colony.construct_tour(&mut pheromone, &mut rng, &spec)?);
                }
                kb.end_iteration();
            }
        }

        let iteration_best = iteration_best.expect("ants >= 1");
        if best.as_ref().is_none_or(|b| iteration_best.cost < b.cost) {
            best = Some(iteration_best);
        }
        let incumbent = best.as_ref().unwrap();
        match algorithm {
            Algorithm::Srm => global_update_srm(&mut pheromone, incumbent, params.q0),
            _ => global_update(&mut pheromone, incumbent, params.rho),
        }
        if algorithm == Algorithm::Racs {
            clamp_pheromone(&mut pheromone);
        }
        trace.push(incumbent.cost);
        observer(IterationSnapshot {
            iteration,
            best_cost: incumbent.cost,
            pheromone: &pheromone,
        });
    }

    let best_tour = best.expect("at least one iteration ran");
    Ok(SolveResult {
        best_cost: best_tour.cost,
        iterations_used: trace.len(),
        wall_time: started.elapsed().as_secs_f64(),
        cost_trace: trace,
        best_tour,
    })
}

/// Uniform draw from `[lo, hi)`, degrading to `lo` when the interval is
/// empty (split points at 0 or 1).
fn range_or_point<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}
