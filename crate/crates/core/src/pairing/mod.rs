//! Disjoint BS pairing: the local greedy rule over Delaunay neighbours and a
//! global minimum-weight maximum-cardinality matching.

pub mod blossom;
mod brute;
mod greedy;
mod timing;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::{Deployment, GeometryError};

pub use brute::{brute_force_matching, BRUTE_FORCE_MAX_VERTICES};
pub use greedy::{greedy_pair, greedy_pair_in_order};
pub use timing::{bench_pairing, write_timing_csv, TimingRow, TABLE_DENSITIES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairingError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("brute-force matching supports at most {max} vertices, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("timing needs at least 3 repetitions, got {0}")]
    TooFewRepetitions(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairingAlgorithm {
    Greedy,
    Edmonds,
}

impl FromStr for PairingAlgorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greedy" => Ok(PairingAlgorithm::Greedy),
            "edmonds" => Ok(PairingAlgorithm::Edmonds),
            other => Err(format!(
                "unknown pairing `{other}` (expected greedy or edmonds)"
            )),
        }
    }
}

impl fmt::Display for PairingAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairingAlgorithm::Greedy => "greedy",
            PairingAlgorithm::Edmonds => "edmonds",
        })
    }
}

/// Undirected graph with positive edge weights (km).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self, PairingError> {
        let mut seen = std::collections::HashSet::new();
        for &(u, v, w) in &edges {
            if u == v || u >= n || v >= n {
                return Err(PairingError::InvalidGraph(format!(
                    "bad endpoints ({u}, {v})"
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(PairingError::InvalidGraph(format!(
                    "edge ({u}, {v}) has weight {w}"
                )));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(PairingError::InvalidGraph(format!(
                    "duplicate edge ({u}, {v})"
                )));
            }
        }
        Ok(WeightedGraph { n, edges })
    }

    /// Delaunay graph of the deployment weighted by BS-BS distance.
    pub fn from_deployment(dep: &Deployment) -> Self {
        let pts = &dep.bs.coords;
        let edges = dep
            .edges()
            .into_iter()
            .map(|(u, v)| (u, v, pts[u].dist(pts[v])))
            .collect();
        WeightedGraph {
            n: dep.len(),
            edges,
        }
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.edges
            .iter()
            .find(|&&(a, b, _)| (a == u && b == v) || (a == v && b == u))
            .map(|e| e.2)
    }
}

/// Vertex-disjoint pairs plus the vertices left single.
///
/// Pairs are stored as `(low, high)` in ascending order and `unpaired` is
/// sorted, so equal matchings compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub unpaired: Vec<usize>,
}

impl Matching {
    /// Normalises `pairs` over vertices `0..n`; everything not paired is unpaired.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut pairs: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        let mut used = vec![false; n];
        for &(a, b) in &pairs {
            used[a] = true;
            used[b] = true;
        }
        let unpaired = (0..n).filter(|&v| !used[v]).collect();
        Matching { pairs, unpaired }
    }

    pub fn from_mates(mate: &[Option<usize>]) -> Self {
        let pairs = mate
            .iter()
            .enumerate()
            .filter_map(|(v, m)| m.filter(|&u| u > v).map(|u| (v, u)))
            .collect::<Vec<_>>();
        Matching::from_pairs(mate.len(), pairs)
    }

    pub fn cardinality(&self) -> usize {
        self.pairs.len()
    }

    /// True when pairs are disjoint and pairs ∪ unpaired partitions `0..n`.
    pub fn is_valid(&self, n: usize) -> bool {
        let mut seen = vec![0u8; n];
        let members = self
            .pairs
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .chain(self.unpaired.iter().copied());
        for v in members {
            if v >= n {
                return false;
            }
            seen[v] += 1;
        }
        seen.iter().all(|&c| c == 1) && self.pairs.iter().all(|&(a, b)| a != b)
    }

    /// Sum of edge weights; `None` if some pair is not an edge of `graph`.
    pub fn total_weight(&self, graph: &WeightedGraph) -> Option<f64> {
        self.pairs.iter().map(|&(a, b)| graph.weight(a, b)).sum()
    }

    /// `partner[v]` for every vertex.
    pub fn partners(&self, n: usize) -> Vec<Option<usize>> {
        let mut partner = vec![None; n];
        for &(a, b) in &self.pairs {
            partner[a] = Some(b);
            partner[b] = Some(a);
        }
        partner
    }
}

/// Largest integer weight handed to the blossom solver.
fn quantization_ceiling(n: usize) -> f64 {
    let by_size = (1u64 << 50) as f64 / (n as f64 + 1.0);
    by_size.min((1u64 << 32) as f64)
}

/// Maximum-cardinality matching of minimum total weight.
///
/// Weights are quantised to integers relative to the largest weight and
/// transformed to `C − w` with `C = 1 + n·max w`, so any extra edge
/// outweighs every possible weight saving and the maximum-weight matching
/// of the transformed graph is the desired one.
pub fn edmonds_pair(graph: &WeightedGraph) -> Matching {
    let max_w = graph.edges.iter().map(|e| e.2).fold(0.0, f64::max);
    if graph.edges.is_empty() || max_w <= 0.0 {
        return Matching::from_pairs(graph.n, []);
    }
    let ceiling = quantization_ceiling(graph.n);
    let quantized: Vec<i64> = graph
        .edges
        .iter()
        .map(|e| ((e.2 / max_w * ceiling).round() as i64).max(1))
        .collect();
    let max_q = *quantized.iter().max().unwrap();
    let big_c = 1 + graph.n as i64 * max_q;
    let edges: Vec<(usize, usize, i64)> = graph
        .edges
        .iter()
        .zip(&quantized)
        .map(|(&(u, v, _), &q)| (u, v, big_c - q))
        .collect();
    Matching::from_mates(&blossom::max_weight_matching(graph.n, &edges))
}

/// Runs the chosen pairing algorithm on the deployment's Delaunay graph.
pub fn pair_deployment<R: rand::Rng + ?Sized>(
    algorithm: PairingAlgorithm,
    dep: &Deployment,
    rng: &mut R,
) -> Matching {
    match algorithm {
        PairingAlgorithm::Greedy => greedy_pair(dep, rng),
        PairingAlgorithm::Edmonds => edmonds_pair(&WeightedGraph::from_deployment(dep)),
    }
}
