use rand::seq::SliceRandom;
use rand::Rng;

use super::Matching;
use crate::geometry::{Deployment, Point};

/// Visits BSs in a uniformly random order and pairs each still-unpaired BS
/// with its nearest unpaired Delaunay neighbour.
pub fn greedy_pair<R: Rng + ?Sized>(dep: &Deployment, rng: &mut R) -> Matching {
    let mut order: Vec<usize> = (0..dep.len()).collect();
    order.shuffle(rng);
    greedy_pair_in_order(&dep.bs.coords, &dep.delaunay, &order)
}

/// Greedy pairing with an explicit visit order. Equal distances go to the
/// lowest BS index.
pub fn greedy_pair_in_order(
    points: &[Point],
    adjacency: &[Vec<usize>],
    order: &[usize],
) -> Matching {
    let n = points.len();
    let mut partner: Vec<Option<usize>> = vec![None; n];
    let mut pairs = Vec::with_capacity(n / 2);
    for &v in order {
        if partner[v].is_some() {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for &u in &adjacency[v] {
            if partner[u].is_some() {
                continue;
            }
            let d = points[v].dist2(points[u]);
            match best {
                Some((bd, bu)) if bd < d || (bd == d && bu < u) => {}
                _ => best = Some((d, u)),
            }
        }
        if let Some((_, u)) = best {
            partner[v] = Some(u);
            partner[u] = Some(v);
            pairs.push((v, u));
        }
    }
    Matching::from_pairs(n, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{delaunay_adjacency, sample_deployment};
    use crate::pairing::{edmonds_pair, WeightedGraph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn collinear_path_in_index_order() {
        let pts: Vec<Point> = [0.0, 1.0, 3.0, 7.0]
            .iter()
            .map(|&x| Point::new(x, 0.0))
            .collect();
        let adj = delaunay_adjacency(&pts).unwrap();
        let m = greedy_pair_in_order(&pts, &adj, &[0, 1, 2, 3]);
        assert_eq!(m.pairs, vec![(0, 1), (2, 3)]);
        assert!(m.unpaired.is_empty());
    }

    #[test]
    fn order_matters_on_a_path() {
        let pts: Vec<Point> = [0.0, 1.0, 3.0, 7.0]
            .iter()
            .map(|&x| Point::new(x, 0.0))
            .collect();
        let adj = delaunay_adjacency(&pts).unwrap();
        // Starting at 2 grabs its nearest neighbour 1 and strands 0 and 3.
        let m = greedy_pair_in_order(&pts, &adj, &[2, 0, 1, 3]);
        assert_eq!(m.pairs, vec![(1, 2)]);
        assert_eq!(m.unpaired, vec![0, 3]);
    }

    #[test]
    fn single_station() {
        let m = greedy_pair_in_order(&[Point::new(1.0, 1.0)], &[vec![]], &[0]);
        assert!(m.pairs.is_empty());
        assert_eq!(m.unpaired, vec![0]);
    }

    #[test]
    fn equal_distances_pick_lowest_index() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(-1.0, 0.0),
        ];
        let adj = vec![vec![1, 2], vec![0], vec![0]];
        let m = greedy_pair_in_order(&pts, &adj, &[0, 1, 2]);
        assert_eq!(m.pairs, vec![(0, 1)]);
    }

    #[test]
    fn random_deployments_give_valid_maximal_local_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let dep = sample_deployment(0.02, 80.0, &mut rng).unwrap();
            let m = greedy_pair(&dep, &mut rng);
            assert!(m.is_valid(dep.len()));
            for &(a, b) in &m.pairs {
                assert!(dep.are_neighbors(a, b));
            }
            for (i, &a) in m.unpaired.iter().enumerate() {
                for &b in &m.unpaired[i + 1..] {
                    assert!(!dep.are_neighbors(a, b), "{a} and {b} left single");
                }
            }
            let best = edmonds_pair(&WeightedGraph::from_deployment(&dep));
            assert!(best.cardinality() >= m.cardinality());
        }
    }
}
