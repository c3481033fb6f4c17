//! Problem model for the equality generalized traveling salesman problem.
//!
//! An instance is a complete undirected graph with non-negative symmetric
//! edge costs whose node set is partitioned into clusters. A tour visits
//! exactly one node from each cluster and returns to its start; the
//! objective is the minimum-cost such cycle.

use std::fmt;

use thiserror::Error;

/// Errors raised while constructing or querying the problem model.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("instance needs at least 3 clusters, got {0}")]
    TooFewClusters(usize),
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("node {node} appears in clusters {first} and {second}")]
    OverlappingClusters {
        node: usize,
        first: usize,
        second: usize,
    },
    #[error("node {0} is not assigned to any cluster")]
    UnassignedNode(usize),
    #[error("node id {node} out of range for instance with {n} nodes")]
    UnknownNode { node: usize, n: usize },
    #[error("cost matrix is {rows}x{cols}, expected {n}x{n}")]
    BadMatrixShape { rows: usize, cols: usize, n: usize },
    #[error("cost({i},{j}) = {value} is negative")]
    NegativeCost { i: usize, j: usize, value: f64 },
    #[error("cost({i},{j}) = {ij} differs from cost({j},{i}) = {ji}")]
    AsymmetricCost { i: usize, j: usize, ij: f64, ji: f64 },
    #[error("cost({0},{0}) must be zero, got {1}")]
    NonzeroDiagonal(usize, f64),
    #[error("infeasible tour: {}", format_violations(.0))]
    InfeasibleTour(Vec<TourViolation>),
}

fn format_violations(violations: &[TourViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Dense symmetric cost matrix over node pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    /// Builds a matrix from row-major values, checking symmetry,
    /// non-negativity and a zero diagonal.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::BadMatrixShape {
                    rows: n,
                    cols: row.len(),
                    n,
                });
            }
            values.extend_from_slice(row);
            if rows[i][i] != 0.0 {
                return Err(ModelError::NonzeroDiagonal(i, rows[i][i]));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let ij = values[i * n + j];
                let ji = values[j * n + i];
                if ij < 0.0 {
                    return Err(ModelError::NegativeCost { i, j, value: ij });
                }
                if ij != ji {
                    return Err(ModelError::AsymmetricCost { i, j, ij, ji });
                }
            }
        }
        Ok(CostMatrix { n, values })
    }

    /// Builds the matrix by evaluating `cost(i, j)` for all `i < j`.
    /// The function is assumed symmetric; both triangles are filled from it.
    pub fn from_fn(n: usize, mut cost: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let c = cost(i, j);
                values[i * n + j] = c;
                values[j * n + i] = c;
            }
        }
        CostMatrix { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// An E-GTSP instance: nodes, symmetric edge costs and a cluster partition.
///
/// Immutable after construction; clusters are stored with their node lists
/// sorted ascending so that serialization is canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    costs: CostMatrix,
    clusters: Vec<Vec<usize>>,
    cluster_of: Vec<usize>,
    coords: Option<Vec<(f64, f64)>>,
}

impl Instance {
    /// Validates the partition and builds the instance.
    ///
    /// Rejects instances with fewer than 3 clusters, empty clusters,
    /// overlapping clusters or nodes left unassigned.
    pub fn new(
        name: impl Into<String>,
        costs: CostMatrix,
        clusters: Vec<Vec<usize>>,
        coords: Option<Vec<(f64, f64)>>,
    ) -> Result<Self, ModelError> {
        let n = costs.n();
        if clusters.len() < 3 {
            return Err(ModelError::TooFewClusters(clusters.len()));
        }
        let mut cluster_of = vec![usize::MAX; n];
        for (k, members) in clusters.iter().enumerate() {
            if members.is_empty() {
                return Err(ModelError::EmptyCluster(k));
            }
            for &node in members {
                if node >= n {
                    return Err(ModelError::UnknownNode { node, n });
                }
                if cluster_of[node] != usize::MAX {
                    return Err(ModelError::OverlappingClusters {
                        node,
                        first: cluster_of[node],
                        second: k,
                    });
                }
                cluster_of[node] = k;
            }
        }
        if let Some(node) = cluster_of.iter().position(|&c| c == usize::MAX) {
            return Err(ModelError::UnassignedNode(node));
        }
        let mut clusters = clusters;
        for members in &mut clusters {
            members.sort_unstable();
        }
        Ok(Instance {
            name: name.into(),
            costs,
            clusters,
            cluster_of,
            coords,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.costs.n()
    }

    /// Number of clusters.
    pub fn p(&self) -> usize {
        self.clusters.len()
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.costs.get(i, j)
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster_members(&self, cluster: usize) -> &[usize] {
        &self.clusters[cluster]
    }

    /// Cluster index of a node; total over all valid node ids.
    #[inline]
    pub fn cluster_of(&self, node: usize) -> usize {
        self.cluster_of[node]
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }
}

/// A candidate solution: one node per cluster, in visiting order, together
/// with the cost of the closed cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub nodes: Vec<usize>,
    pub cost: f64,
}

impl Tour {
    /// Builds a tour from a node sequence, validating feasibility and
    /// computing the cycle cost.
    pub fn new(instance: &Instance, nodes: Vec<usize>) -> Result<Self, ModelError> {
        match validate_tour(instance, &nodes) {
            TourValidity::Valid => {}
            TourValidity::Invalid(violations) => {
                return Err(ModelError::InfeasibleTour(violations));
            }
        }
        let cost = tour_cost(instance, &nodes)?;
        Ok(Tour { nodes, cost })
    }

    /// The cycle's edges in visiting order, closing edge included.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let len = self.nodes.len();
        (0..len).map(move |k| (self.nodes[k], self.nodes[(k + 1) % len]))
    }

    /// Builds a tour that the caller guarantees feasible (solver output).
    /// Debug builds re-validate.
    pub(crate) fn from_parts(instance: &Instance, nodes: Vec<usize>, cost: f64) -> Self {
        debug_assert!(matches!(
            validate_tour(instance, &nodes),
            TourValidity::Valid
        ));
        debug_assert_eq!(tour_cost(instance, &nodes).unwrap(), cost);
        Tour { nodes, cost }
    }
}

/// Outcome of a feasibility check.
#[derive(Debug, Clone, PartialEq)]
pub enum TourValidity {
    Valid,
    Invalid(Vec<TourViolation>),
}

impl TourValidity {
    pub fn is_valid(&self) -> bool {
        matches!(self, TourValidity::Valid)
    }
}

/// A specific way in which a node sequence fails to be a tour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TourViolation {
    /// Sequence length differs from the cluster count.
    WrongLength { expected: usize, got: usize },
    /// A node id outside the instance.
    UnknownNode { node: usize },
    /// The same node appears more than once.
    DuplicateNode { node: usize },
    /// Two distinct nodes of one cluster are visited.
    ClusterVisitedTwice { cluster: usize },
    /// No node of this cluster is visited.
    MissingCluster { cluster: usize },
}

impl fmt::Display for TourViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TourViolation::WrongLength { expected, got } => {
                write!(f, "tour has {got} nodes, expected {expected}")
            }
            TourViolation::UnknownNode { node } => write!(f, "unknown node id {node}"),
            TourViolation::DuplicateNode { node } => write!(f, "node {node} repeated"),
            TourViolation::ClusterVisitedTwice { cluster } => {
                write!(f, "cluster {cluster} visited twice")
            }
            TourViolation::MissingCluster { cluster } => {
                write!(f, "missing cluster {cluster}")
            }
        }
    }
}

/// Cost of the closed cycle through `nodes`, including the edge from the
/// last node back to the first.
pub fn tour_cost(instance: &Instance, nodes: &[usize]) -> Result<f64, ModelError> {
    let n = instance.n();
    for &node in nodes {
        if node >= n {
            return Err(ModelError::UnknownNode { node, n });
        }
    }
    if nodes.len() < 2 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for w in nodes.windows(2) {
        total += instance.cost(w[0], w[1]);
    }
    total += instance.cost(nodes[nodes.len() - 1], nodes[0]);
    Ok(total)
}

/// Checks that `nodes` visits exactly one node of every cluster with no
/// repeats. All failures are reported, not just the first.
pub fn validate_tour(instance: &Instance, nodes: &[usize]) -> TourValidity {
    let mut violations = Vec::new();
    let p = instance.p();
    if nodes.len() != p {
        violations.push(TourViolation::WrongLength {
            expected: p,
            got: nodes.len(),
        });
    }
    let mut seen_node = vec![false; instance.n()];
    let mut cluster_hits = vec![0usize; p];
    for &node in nodes {
        if node >= instance.n() {
            violations.push(TourViolation::UnknownNode { node });
            continue;
        }
        if seen_node[node] {
            violations.push(TourViolation::DuplicateNode { node });
        }
        seen_node[node] = true;
        cluster_hits[instance.cluster_of(node)] += 1;
    }
    for (cluster, &hits) in cluster_hits.iter().enumerate() {
        if hits == 0 {
            violations.push(TourViolation::MissingCluster { cluster });
        } else if hits > 1 {
            violations.push(TourViolation::ClusterVisitedTwice { cluster });
        }
    }
    if violations.is_empty() {
        TourValidity::Valid
    } else {
        TourValidity::Invalid(violations)
    }
}
