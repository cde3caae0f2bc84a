use super::{Matching, PairingError, WeightedGraph};

pub const BRUTE_FORCE_MAX_VERTICES: usize = 12;

struct Best {
    pairs: Vec<(usize, usize)>,
    weight: f64,
}

fn better(card: usize, weight: f64, pairs: &[(usize, usize)], best: &Best) -> bool {
    if card != best.pairs.len() {
        return card > best.pairs.len();
    }
    let tol = 1e-9 * (1.0 + weight.abs().max(best.weight.abs()));
    if (weight - best.weight).abs() > tol {
        return weight < best.weight;
    }
    let mut a = pairs.to_vec();
    a.sort_unstable();
    a < best.pairs
}

fn search(
    v: usize,
    adj: &[Vec<(usize, f64)>],
    used: &mut [bool],
    current: &mut Vec<(usize, usize)>,
    weight: f64,
    best: &mut Best,
) {
    let n = adj.len();
    let Some(v) = (v..n).find(|&u| !used[u]) else {
        if better(current.len(), weight, current, best) {
            let mut pairs = current.clone();
            pairs.sort_unstable();
            *best = Best { pairs, weight };
        }
        return;
    };
    used[v] = true;
    search(v + 1, adj, used, current, weight, best);
    for &(u, w) in &adj[v] {
        if !used[u] {
            used[u] = true;
            current.push((v.min(u), v.max(u)));
            search(v + 1, adj, used, current, weight + w, best);
            current.pop();
            used[u] = false;
        }
    }
    used[v] = false;
}

/// Exhaustive maximum-cardinality, minimum-weight matching.
///
/// Ties in weight go to the lexicographically smallest sorted pair list.
/// Only intended as a test oracle; rejects graphs above
/// [`BRUTE_FORCE_MAX_VERTICES`] vertices.
pub fn brute_force_matching(graph: &WeightedGraph) -> Result<Matching, PairingError> {
    if graph.n > BRUTE_FORCE_MAX_VERTICES {
        return Err(PairingError::TooLarge {
            n: graph.n,
            max: BRUTE_FORCE_MAX_VERTICES,
        });
    }
    let mut adj = vec![Vec::new(); graph.n];
    for &(u, v, w) in &graph.edges {
        adj[u].push((v, w));
        adj[v].push((u, w));
    }
    let mut best = Best {
        pairs: Vec::new(),
        weight: 0.0,
    };
    let mut used = vec![false; graph.n];
    search(0, &adj, &mut used, &mut Vec::new(), 0.0, &mut best);
    Ok(Matching::from_pairs(graph.n, best.pairs))
}
