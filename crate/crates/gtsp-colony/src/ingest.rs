//! Instance ingestion: TSPLIB parsing, center-based clustering, clustered
//! instance files and seeded random instance generation.
//!
//! Supported on-disk formats:
//! - `.tsp`: TSPLIB95 keyword format with `EDGE_WEIGHT_TYPE: EUC_2D` and a
//!   `NODE_COORD_SECTION`.
//! - `.gtsp`: the same header plus `GTSP_SETS: <p>` and a
//!   `GTSP_SET_SECTION` where each cluster is a set id followed by its node
//!   ids and a `-1` terminator (the layout used by the public GTSP
//!   instance library).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{CostMatrix, Instance, ModelError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cluster count {nc} out of range (need 1 <= nc <= {n})")]
    ClusterCountOutOfRange { nc: usize, n: usize },
    #[error("cannot serialize an instance without node coordinates")]
    MissingCoords,
    #[error("random instance needs 3 <= p <= n, got p={p}, n={n}")]
    BadRandomShape { p: usize, n: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn parse_err(line: usize, msg: impl Into<String>) -> IngestError {
    IngestError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Distance rule declared by a TSPLIB file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeWeightType {
    /// Rounded planar Euclidean distance.
    Euc2d,
}

/// Planar node coordinates parsed from a TSPLIB file.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub name: String,
    pub edge_weight_type: EdgeWeightType,
    pub coords: Vec<(f64, f64)>,
}

impl NodeSet {
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Edge cost between two nodes under the declared distance rule.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match self.edge_weight_type {
            EdgeWeightType::Euc2d => euc_2d(self.coords[i], self.coords[j]),
        }
    }
}

/// TSPLIB EUC_2D distance: Euclidean distance rounded to the nearest
/// integer, halves rounding up.
pub fn euc_2d(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    ((dx * dx + dy * dy).sqrt() + 0.5).floor()
}

fn exact_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

/// Result of the center-based clustering procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    /// Node id -> cluster index.
    pub assignment: Vec<usize>,
    /// Center node of each cluster, in cluster order.
    pub centers: Vec<usize>,
}

impl Clustering {
    /// Cluster membership lists, indexed by cluster.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.centers.len()];
        for (node, &k) in self.assignment.iter().enumerate() {
            out[k].push(node);
        }
        out
    }
}

/// Center-based clustering: pick `nc` centers by farthest-point dispersion
/// (first the node farthest from the centroid, then repeatedly the node
/// maximizing the minimum distance to the chosen centers), then assign
/// every node to its nearest center.
///
/// Dispersion and assignment use exact planar distances on the
/// coordinates. Ties break toward the lower node id, and each center keeps
/// its own cluster, so the output is deterministic and every cluster is
/// non-empty.
pub fn cluster_fischetti(nodes: &NodeSet, nc: usize) -> Result<Clustering, IngestError> {
    let n = nodes.n();
    if nc == 0 || nc > n {
        return Err(IngestError::ClusterCountOutOfRange { nc, n });
    }
    let coords = &nodes.coords;
    let centroid = {
        let (sx, sy) = coords
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y));
        (sx / n as f64, sy / n as f64)
    };

    let mut is_center = vec![false; n];
    let mut centers = Vec::with_capacity(nc);

    // Strict > keeps the lowest node id among ties.
    let mut first = 0;
    let mut first_dist = f64::NEG_INFINITY;
    for (node, &xy) in coords.iter().enumerate() {
        let d = exact_dist(xy, centroid);
        if d > first_dist {
            first_dist = d;
            first = node;
        }
    }
    centers.push(first);
    is_center[first] = true;

    let mut min_dist_to_center = vec![f64::INFINITY; n];
    while centers.len() < nc {
        let last = *centers.last().unwrap();
        for (node, &xy) in coords.iter().enumerate() {
            let d = exact_dist(xy, coords[last]);
            if d < min_dist_to_center[node] {
                min_dist_to_center[node] = d;
            }
        }
        let mut next = usize::MAX;
        let mut next_dist = f64::NEG_INFINITY;
        for node in 0..n {
            if !is_center[node] && min_dist_to_center[node] > next_dist {
                next_dist = min_dist_to_center[node];
                next = node;
            }
        }
        centers.push(next);
        is_center[next] = true;
    }

    let mut assignment = vec![usize::MAX; n];
    for (k, &c) in centers.iter().enumerate() {
        assignment[c] = k;
    }
    for node in 0..n {
        if assignment[node] != usize::MAX {
            continue;
        }
        let mut best_k = 0;
        let mut best_key = (f64::INFINITY, usize::MAX);
        for (k, &c) in centers.iter().enumerate() {
            let key = (exact_dist(coords[node], coords[c]), c);
            if key < best_key {
                best_key = key;
                best_k = k;
            }
        }
        assignment[node] = best_k;
    }

    Ok(Clustering {
        assignment,
        centers,
    })
}

/// Builds an instance from parsed coordinates and a clustering, with edge
/// costs materialized under the node set's distance rule.
pub fn build_instance(nodes: &NodeSet, clustering: &Clustering) -> Result<Instance, IngestError> {
    let costs = CostMatrix::from_fn(nodes.n(), |i, j| nodes.distance(i, j));
    Ok(Instance::new(
        nodes.name.clone(),
        costs,
        clustering.clusters(),
        Some(nodes.coords.clone()),
    )?)
}

/// Uniform random planar instance: `n` points in `[0, extent)^2` with
/// EUC_2D costs, clustered into `p` clusters. Identical seeds produce
/// identical instances.
pub fn generate_random_instance(
    seed: u64,
    p: usize,
    n: usize,
    extent: f64,
) -> Result<Instance, IngestError> {
    if p < 3 || p > n {
        return Err(IngestError::BadRandomShape { p, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0.0..extent), rng.gen_range(0.0..extent)))
        .collect();
    let nodes = NodeSet {
        name: format!("rand-s{seed}-p{p}-n{n}"),
        edge_weight_type: EdgeWeightType::Euc2d,
        coords,
    };
    let clustering = cluster_fischetti(&nodes, p)?;
    build_instance(&nodes, &clustering)
}

// ---------------------------------------------------------------------------
// TSPLIB / GTSP-LIB parsing
// ---------------------------------------------------------------------------

#[derive(Default)]
struct RawFile {
    name: Option<String>,
    dimension: Option<usize>,
    edge_weight_type: Option<(String, usize)>,
    gtsp_sets: Option<(usize, usize)>,
    coords: Option<Vec<Option<(f64, f64)>>>,
    sets: Option<Vec<Vec<usize>>>,
}

/// Line-oriented scan of the TSPLIB keyword format. Sections consume the
/// following lines; everything else must be `KEY : value`, `EOF`, or blank.
fn scan(text: &str) -> Result<(RawFile, usize), IngestError> {
    let mut raw = RawFile::default();
    let lines: Vec<&str> = text.lines().collect();
    let mut idx = 0;
    let mut last_line = lines.len();
    while idx < lines.len() {
        let lineno = idx + 1;
        let line = lines[idx].trim();
        idx += 1;
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            last_line = lineno;
            break;
        }
        if line == "NODE_COORD_SECTION" {
            let dim = raw.dimension.ok_or_else(|| {
                parse_err(lineno, "DIMENSION must be declared before NODE_COORD_SECTION")
            })?;
            let mut coords = vec![None; dim];
            for _ in 0..dim {
                let lineno = idx + 1;
                let line = lines
                    .get(idx)
                    .map(|l| l.trim())
                    .ok_or_else(|| parse_err(lineno, "unexpected end of coordinate section"))?;
                idx += 1;
                let mut it = line.split_whitespace();
                let (id, x, y) = match (it.next(), it.next(), it.next(), it.next()) {
                    (Some(id), Some(x), Some(y), None) => (id, x, y),
                    _ => {
                        return Err(parse_err(
                            lineno,
                            format!("malformed coordinate line '{line}' (want '<id> <x> <y>')"),
                        ))
                    }
                };
                let id: usize = id
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad node id '{id}'")))?;
                if id == 0 || id > dim {
                    return Err(parse_err(
                        lineno,
                        format!("node id {id} out of range 1..={dim}"),
                    ));
                }
                let x: f64 = x
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad x coordinate '{x}'")))?;
                let y: f64 = y
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad y coordinate '{y}'")))?;
                if coords[id - 1].is_some() {
                    return Err(parse_err(lineno, format!("node {id} declared twice")));
                }
                coords[id - 1] = Some((x, y));
            }
            raw.coords = Some(coords);
            continue;
        }
        if line == "GTSP_SET_SECTION" {
            let (p, _) = raw.gtsp_sets.ok_or_else(|| {
                parse_err(lineno, "GTSP_SETS must be declared before GTSP_SET_SECTION")
            })?;
            let (sets, consumed) = scan_set_section(&lines, idx, p)?;
            raw.sets = Some(sets);
            idx = consumed;
            continue;
        }
        if let Some(colon) = line.find(':') {
            let key = line[..colon].trim().to_uppercase();
            let value = line[colon + 1..].trim();
            match key.as_str() {
                "NAME" => raw.name = Some(value.to_string()),
                "DIMENSION" => {
                    let dim = value
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad DIMENSION '{value}'")))?;
                    raw.dimension = Some(dim);
                }
                "EDGE_WEIGHT_TYPE" => {
                    raw.edge_weight_type = Some((value.to_string(), lineno));
                }
                "GTSP_SETS" => {
                    let p = value
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad GTSP_SETS '{value}'")))?;
                    raw.gtsp_sets = Some((p, lineno));
                }
                // Metadata keys carried by library files; irrelevant here.
                "TYPE" | "COMMENT" | "EDGE_WEIGHT_FORMAT" | "NODE_COORD_TYPE"
                | "DISPLAY_DATA_TYPE" => {}
                _ => {}
            }
            continue;
        }
        return Err(parse_err(lineno, format!("unexpected line '{line}'")));
    }
    Ok((raw, last_line))
}

/// Reads `p` cluster definitions: each is a 1-based set id followed by
/// 1-based node ids and a `-1` terminator, possibly wrapping lines.
fn scan_set_section(
    lines: &[&str],
    start: usize,
    p: usize,
) -> Result<(Vec<Vec<usize>>, usize), IngestError> {
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    let mut idx = start;
    while idx < lines.len() {
        let line = lines[idx].trim();
        if line == "EOF" {
            break;
        }
        for tok in line.split_whitespace() {
            tokens.push((idx + 1, tok));
        }
        idx += 1;
    }

    let mut sets = Vec::with_capacity(p);
    let mut pos = 0;
    let last_line = idx; // line number of the last line the section may use
    for set_no in 1..=p {
        let (lineno, tok) = *tokens
            .get(pos)
            .ok_or_else(|| parse_err(last_line, format!("expected {p} sets, found {}", set_no - 1)))?;
        pos += 1;
        let id: usize = tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad set id '{tok}'")))?;
        if id != set_no {
            return Err(parse_err(
                lineno,
                format!("set ids must be sequential: expected {set_no}, got {id}"),
            ));
        }
        let mut members = Vec::new();
        loop {
            let (lineno, tok) = *tokens.get(pos).ok_or_else(|| {
                parse_err(
                    last_line,
                    format!("set {set_no} not terminated with -1 before end of file"),
                )
            })?;
            pos += 1;
            if tok == "-1" {
                break;
            }
            let node: usize = tok.parse().map_err(|_| {
                parse_err(lineno, format!("bad node id '{tok}' in set {set_no}"))
            })?;
            members.push(node);
        }
        if members.is_empty() {
            return Err(parse_err(last_line, format!("set {set_no} is empty")));
        }
        sets.push(members);
    }
    if pos < tokens.len() {
        let (lineno, tok) = tokens[pos];
        return Err(parse_err(
            lineno,
            format!("unexpected token '{tok}' after the declared {p} sets"),
        ));
    }
    Ok((sets, idx))
}

fn finish_nodeset(raw: RawFile, eof_line: usize) -> Result<NodeSet, IngestError> {
    let dim = raw
        .dimension
        .ok_or_else(|| parse_err(eof_line, "missing DIMENSION"))?;
    let (ewt, ewt_line) = raw
        .edge_weight_type
        .ok_or_else(|| parse_err(eof_line, "missing EDGE_WEIGHT_TYPE (only EUC_2D supported)"))?;
    if ewt != "EUC_2D" {
        return Err(parse_err(
            ewt_line,
            format!("unsupported EDGE_WEIGHT_TYPE '{ewt}' (only EUC_2D supported)"),
        ));
    }
    let coords = raw
        .coords
        .ok_or_else(|| parse_err(eof_line, "missing NODE_COORD_SECTION"))?;
    let mut out = Vec::with_capacity(dim);
    for (i, c) in coords.into_iter().enumerate() {
        out.push(c.ok_or_else(|| parse_err(eof_line, format!("node {} has no coordinates", i + 1)))?);
    }
    Ok(NodeSet {
        name: raw.name.unwrap_or_default(),
        edge_weight_type: EdgeWeightType::Euc2d,
        coords: out,
    })
}

/// Parses a TSPLIB `.tsp` file with EUC_2D coordinates.
pub fn parse_tsplib(text: &str) -> Result<NodeSet, IngestError> {
    let (raw, eof_line) = scan(text)?;
    finish_nodeset(raw, eof_line)
}

/// Parses a clustered `.gtsp` file into a ready-to-solve instance.
pub fn parse_gtsp_instance(text: &str) -> Result<Instance, IngestError> {
    let (mut raw, eof_line) = scan(text)?;
    let declared_sets = raw.gtsp_sets;
    let sets = raw.sets.take();
    let nodes = finish_nodeset(raw, eof_line)?;
    let (p, sets_line) =
        declared_sets.ok_or_else(|| parse_err(eof_line, "missing GTSP_SETS"))?;
    let sets = sets.ok_or_else(|| parse_err(eof_line, "missing GTSP_SET_SECTION"))?;
    debug_assert_eq!(sets.len(), p);

    let n = nodes.n();
    let mut assigned = vec![None; n];
    let mut clusters = Vec::with_capacity(p);
    for (k, members) in sets.iter().enumerate() {
        let mut cluster = Vec::with_capacity(members.len());
        for &node in members {
            if node == 0 || node > n {
                return Err(parse_err(
                    sets_line,
                    format!("set {} references node {node}, valid ids are 1..={n}", k + 1),
                ));
            }
            let node0 = node - 1;
            if let Some(prev) = assigned[node0] {
                return Err(parse_err(
                    sets_line,
                    format!("node {node} appears in both set {} and set {}", prev + 1, k + 1),
                ));
            }
            assigned[node0] = Some(k);
            cluster.push(node0);
        }
        clusters.push(cluster);
    }
    if let Some(node0) = assigned.iter().position(|a| a.is_none()) {
        return Err(parse_err(
            sets_line,
            format!("node {} is not assigned to any set", node0 + 1),
        ));
    }

    let costs = CostMatrix::from_fn(n, |i, j| nodes.distance(i, j));
    Ok(Instance::new(
        nodes.name,
        costs,
        clusters,
        Some(nodes.coords),
    )?)
}

/// Serializes an instance (with coordinates) into the `.gtsp` format.
/// `parse_gtsp_instance(write_gtsp_instance(x)) == x`.
pub fn write_gtsp_instance(instance: &Instance) -> Result<String, IngestError> {
    let coords = instance.coords().ok_or(IngestError::MissingCoords)?;
    let mut out = String::new();
    out.push_str(&format!("NAME : {}\n", instance.name()));
    out.push_str("TYPE : GTSP\n");
    out.push_str(&format!("DIMENSION : {}\n", instance.n()));
    out.push_str(&format!("GTSP_SETS : {}\n", instance.p()));
    out.push_str("EDGE_WEIGHT_TYPE : EUC_2D\n");
    out.push_str("NODE_COORD_SECTION\n");
    for (i, (x, y)) in coords.iter().enumerate() {
        out.push_str(&format!("{} {} {}\n", i + 1, x, y));
    }
    out.push_str("GTSP_SET_SECTION\n");
    for (k, members) in instance.clusters().iter().enumerate() {
        out.push_str(&format!("{}", k + 1));
        for &node in members {
            out.push_str(&format!(" {}", node + 1));
        }
        out.push_str(" -1\n");
    }
    out.push_str("EOF\n");
    Ok(out)
}
