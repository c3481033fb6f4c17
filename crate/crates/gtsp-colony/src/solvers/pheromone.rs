//! Trail state and the pheromone update rules shared by the strategies.
//!
//! All rules are convex-style combinations of a positive trail value and a
//! positive reinforcement term, so trails stay strictly positive through
//! any update sequence.

use crate::model::{Instance, Tour};

/// Visibility values are capped here so zero-cost edges stay finite while
/// still winning any argmax against a costlier edge.
pub const VISIBILITY_CAP: f64 = 1e9;

/// Visibility of an edge: the inverse of its cost, capped.
pub fn visibility(instance: &Instance, i: usize, j: usize) -> f64 {
    let c = instance.cost(i, j);
    if c > 0.0 {
        (1.0 / c).min(VISIBILITY_CAP)
    } else {
        VISIBILITY_CAP
    }
}

/// Symmetric per-edge trail intensities with their initial value and the
/// reset bound used by the reinforcing strategy.
#[derive(Debug, Clone)]
pub struct PheromoneMatrix {
    n: usize,
    tau: Vec<f64>,
    tau0: f64,
    tau_max: f64,
}

impl PheromoneMatrix {
    pub fn new(n: usize, tau0: f64, tau_max: f64) -> Self {
        assert!(tau0 > 0.0, "initial trail must be positive");
        PheromoneMatrix {
            n,
            tau: vec![tau0; n * n],
            tau0,
            tau_max,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.tau[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(value > 0.0);
        self.tau[i * self.n + j] = value;
        self.tau[j * self.n + i] = value;
    }

    /// Largest off-diagonal trail value.
    pub fn max_trail(&self) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                max = max.max(self.get(i, j));
            }
        }
        max
    }
}

/// Local rule of the plain colony strategy: a step of size `rho` from the
/// current trail toward the initial value `tau0`.
pub fn local_update_acs(tau: f64, rho: f64, tau0: f64) -> f64 {
    (1.0 - rho) * tau + rho * tau0
}

/// Reinforcing local rule: a step of size `rho` toward `1/(n * best_cost)`,
/// tying the inner reinforcement to the incumbent tour.
pub fn local_update_racs(tau: f64, rho: f64, best_cost: f64, n: usize) -> f64 {
    (1.0 - rho) * tau + rho / (n as f64 * best_cost)
}

/// Sensitivity-damped local rule: retains `s^2` of the trail and deposits
/// `(1-s)^2 * tau0 / n`.
pub fn local_update_sacs(tau: f64, s: f64, tau0: f64, n: usize) -> f64 {
    s * s * tau + (1.0 - s) * (1.0 - s) * tau0 / n as f64
}

/// Robot-team local rule: like the plain rule but with `q0` doubling as
/// the evaporation factor, weighted quadratically.
pub fn local_update_srm(tau: f64, q0: f64, tau0: f64) -> f64 {
    q0 * q0 * tau + (1.0 - q0) * (1.0 - q0) * tau0
}

/// Elitist global rule: only the edges of the best tour move, each taking
/// a step of size `rho` toward the inverse best cost.
pub fn global_update(pheromone: &mut PheromoneMatrix, best: &Tour, rho: f64) {
    let deposit = 1.0 / best.cost;
    for (i, j) in best.edges() {
        let tau = pheromone.get(i, j);
        pheromone.set(i, j, (1.0 - rho) * tau + rho * deposit);
    }
}

/// Robot-team global rule: the elitist update with quadratic `q0` weights.
pub fn global_update_srm(pheromone: &mut PheromoneMatrix, best: &Tour, q0: f64) {
    let deposit = 1.0 / best.cost;
    for (i, j) in best.edges() {
        let tau = pheromone.get(i, j);
        pheromone.set(i, j, q0 * q0 * tau + (1.0 - q0) * (1.0 - q0) * deposit);
    }
}

/// Trail reset: any edge strictly above `tau_max` is re-initialized to
/// `tau0`. Applied after the global update by the reinforcing strategy.
pub fn clamp_pheromone(pheromone: &mut PheromoneMatrix) {
    let (tau0, tau_max) = (pheromone.tau0(), pheromone.tau_max());
    for i in 0..pheromone.n() {
        for j in (i + 1)..pheromone.n() {
            if pheromone.get(i, j) > tau_max {
                pheromone.set(i, j, tau0);
            }
        }
    }
}
