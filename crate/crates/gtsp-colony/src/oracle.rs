//! Ground-truth providers: nearest-neighbor construction and exact optima
//! for small instances.
//!
//! The dynamic program fixes one cluster and sweeps subsets of the
//! remaining clusters, which is exact for any instance but exponential in
//! the cluster count. Brute force enumerates cluster orders and node
//! selections outright and exists mainly to cross-check the DP.

use thiserror::Error;

use crate::model::{Instance, ModelError, Tour};

/// Default cluster-count ceiling for [`exact_optimum_dp`]. The DP table
/// has `2^(p-1) * n` entries, so this is a memory guard, not a hard bound.
pub const DEFAULT_DP_CLUSTER_LIMIT: usize = 16;

/// Work ceiling for [`exact_optimum_bruteforce`], in enumerated tours.
pub const BRUTEFORCE_TOUR_BUDGET: f64 = 5e7;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance has {p} clusters, over the exact-solver limit of {limit}")]
    TooManyClusters { p: usize, limit: usize },
    #[error("~{estimate:.3e} tours to enumerate exceeds the brute-force budget of {budget:.1e}")]
    EnumerationTooLarge { estimate: f64, budget: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// An exact optimum together with the search effort that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub optimum_cost: f64,
    pub optimum_tour: Tour,
    pub states_expanded: u64,
}

/// Nearest-neighbor tour: from `start_node`, repeatedly move to the
/// cheapest node among all nodes of unvisited clusters (ties to the lower
/// node id), then close the cycle.
pub fn nearest_neighbor(instance: &Instance, start_node: usize) -> Result<Tour, ModelError> {
    let n = instance.n();
    if start_node >= n {
        return Err(ModelError::UnknownNode {
            node: start_node,
            n,
        });
    }
    let p = instance.p();
    let mut visited = vec![false; p];
    let mut nodes = Vec::with_capacity(p);
    let mut current = start_node;
    visited[instance.cluster_of(current)] = true;
    nodes.push(current);
    for _ in 1..p {
        let mut best = usize::MAX;
        let mut best_cost = f64::INFINITY;
        for node in 0..n {
            if visited[instance.cluster_of(node)] {
                continue;
            }
            let c = instance.cost(current, node);
            if c < best_cost {
                best_cost = c;
                best = node;
            }
        }
        visited[instance.cluster_of(best)] = true;
        nodes.push(best);
        current = best;
    }
    let cost = crate::model::tour_cost(instance, &nodes)?;
    Ok(Tour::from_parts(instance, nodes, cost))
}

/// Exact optimum via dynamic programming over cluster subsets, with the
/// default cluster limit.
pub fn exact_optimum_dp(instance: &Instance) -> Result<ExactResult, OracleError> {
    exact_optimum_dp_with_limit(instance, DEFAULT_DP_CLUSTER_LIMIT)
}

/// Exact optimum via dynamic programming over cluster subsets.
///
/// One cluster (the smallest) is fixed as home. For each candidate start
/// node in it, states are (subset of other clusters visited, last node)
/// and transitions append one node of an unvisited cluster; the cycle is
/// closed with the return edge to the start node.
pub fn exact_optimum_dp_with_limit(
    instance: &Instance,
    max_clusters: usize,
) -> Result<ExactResult, OracleError> {
    let p = instance.p();
    if p > max_clusters {
        return Err(OracleError::TooManyClusters {
            p,
            limit: max_clusters,
        });
    }

    let home = (0..p)
        .min_by_key(|&k| instance.cluster_members(k).len())
        .unwrap();
    let others: Vec<usize> = (0..p).filter(|&k| k != home).collect();
    // Flatten the nodes of the non-home clusters; `bit_of[i]` is the subset
    // bit of the cluster that `node_list[i]` belongs to.
    let mut node_list = Vec::new();
    let mut bit_of = Vec::new();
    for (bit, &k) in others.iter().enumerate() {
        for &node in instance.cluster_members(k) {
            node_list.push(node);
            bit_of.push(bit);
        }
    }
    let m = node_list.len();
    let full: usize = (1 << others.len()) - 1;

    let mut best_cost = f64::INFINITY;
    let mut best_nodes: Vec<usize> = Vec::new();
    let mut states_expanded = 0u64;

    let mut dp = vec![f64::INFINITY; (full + 1) * m];
    let mut parent = vec![usize::MAX; (full + 1) * m];

    for &start in instance.cluster_members(home) {
        dp.iter_mut().for_each(|v| *v = f64::INFINITY);
        parent.iter_mut().for_each(|v| *v = usize::MAX);

        for ui in 0..m {
            dp[(1 << bit_of[ui]) * m + ui] = instance.cost(start, node_list[ui]);
        }
        for mask in 1..=full {
            for ui in 0..m {
                let here = dp[mask * m + ui];
                if !here.is_finite() || mask & (1 << bit_of[ui]) == 0 {
                    continue;
                }
                states_expanded += 1;
                if mask == full {
                    continue; // nothing left to extend; closing handled below
                }
                for vi in 0..m {
                    let vbit = 1 << bit_of[vi];
                    if mask & vbit != 0 {
                        continue;
                    }
                    let next = here + instance.cost(node_list[ui], node_list[vi]);
                    let slot = (mask | vbit) * m + vi;
                    if next < dp[slot] {
                        dp[slot] = next;
                        parent[slot] = ui;
                    }
                }
            }
        }

        for ui in 0..m {
            let path = dp[full * m + ui];
            if !path.is_finite() {
                continue;
            }
            let cycle = path + instance.cost(node_list[ui], start);
            if cycle < best_cost {
                best_cost = cycle;
                // Walk the parents back to recover the visiting order.
                let mut rev = Vec::with_capacity(p);
                let mut mask = full;
                let mut ui = ui;
                loop {
                    rev.push(node_list[ui]);
                    let prev = parent[mask * m + ui];
                    mask &= !(1 << bit_of[ui]);
                    if prev == usize::MAX {
                        break;
                    }
                    ui = prev;
                }
                rev.push(start);
                rev.reverse();
                best_nodes = rev;
            }
        }
    }

    let optimum_tour = Tour::new(instance, best_nodes)?;
    debug_assert_eq!(optimum_tour.cost, best_cost);
    Ok(ExactResult {
        optimum_cost: best_cost,
        optimum_tour,
        states_expanded,
    })
}

/// Exact optimum by full enumeration of cluster orders and node
/// selections. Symmetric costs let us fix the orientation, halving the
/// (p-1)! cluster orders.
pub fn exact_optimum_bruteforce(instance: &Instance) -> Result<ExactResult, OracleError> {
    let p = instance.p();
    if p > 8 {
        return Err(OracleError::TooManyClusters { p, limit: 8 });
    }
    let mut estimate = (1..p).map(|k| k as f64).product::<f64>() / 2.0;
    for k in 0..p {
        estimate *= instance.cluster_members(k).len() as f64;
    }
    if estimate > BRUTEFORCE_TOUR_BUDGET {
        return Err(OracleError::EnumerationTooLarge {
            estimate,
            budget: BRUTEFORCE_TOUR_BUDGET,
        });
    }

    let mut order = Vec::with_capacity(p);
    order.push(0);
    let mut used = vec![false; p];
    used[0] = true;
    let mut best_cost = f64::INFINITY;
    let mut best_nodes = Vec::new();
    let mut states_expanded = 0u64;
    enumerate_orders(
        instance,
        &mut order,
        &mut used,
        &mut best_cost,
        &mut best_nodes,
        &mut states_expanded,
    );

    let optimum_tour = Tour::new(instance, best_nodes)?;
    Ok(ExactResult {
        optimum_cost: best_cost,
        optimum_tour,
        states_expanded,
    })
}

fn enumerate_orders(
    instance: &Instance,
    order: &mut Vec<usize>,
    used: &mut [bool],
    best_cost: &mut f64,
    best_nodes: &mut Vec<usize>,
    states_expanded: &mut u64,
) {
    let p = instance.p();
    if order.len() == p {
        // Orientation fix: keep only one of each reversed pair.
        if p > 2 && order[1] > order[p - 1] {
            return;
        }
        let mut selection = vec![0usize; p];
        enumerate_selections(
            instance,
            order,
            &mut selection,
            0,
            best_cost,
            best_nodes,
            states_expanded,
        );
        return;
    }
    for k in 1..p {
        if !used[k] {
            used[k] = true;
            order.push(k);
            enumerate_orders(instance, order, used, best_cost, best_nodes, states_expanded);
            order.pop();
            used[k] = false;
        }
    }
}

fn enumerate_selections(
    instance: &Instance,
    order: &[usize],
    selection: &mut [usize],
    depth: usize,
    best_cost: &mut f64,
    best_nodes: &mut Vec<usize>,
    states_expanded: &mut u64,
) {
    if depth == order.len() {
        *states_expanded += 1;
        let nodes: Vec<usize> = order
            .iter()
            .zip(selection.iter())
            .map(|(&k, &s)| instance.cluster_members(k)[s])
            .collect();
        let mut cost = 0.0;
        for i in 0..nodes.len() {
            cost += instance.cost(nodes[i], nodes[(i + 1) % nodes.len()]);
        }
        if cost < *best_cost {
            *best_cost = cost;
            *best_nodes = nodes;
        }
        return;
    }
    let size = instance.cluster_members(order[depth]).len();
    for s in 0..size {
        selection[depth] = s;
        enumerate_selections(
            instance,
            order,
            selection,
            depth + 1,
            best_cost,
            best_nodes,
            states_expanded,
        );
    }
}
