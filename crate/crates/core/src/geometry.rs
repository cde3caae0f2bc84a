//! Point processes, Voronoi-cell user placement and Delaunay adjacency.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use spade::{DelaunayTriangulation, Point2, Triangulation};
use thiserror::Error;

/// Rejection attempts per MS before falling back to the inscribed disk.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("a deployment needs at least 3 base stations, got {0}")]
    TooFewStations(usize),
    #[error("base stations {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("triangulation rejected point {index}: {reason}")]
    Triangulation { index: usize, reason: String },
    #[error("inconsistent deployment: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }
}

/// Points inside the square window `[0, window_side]²` (km).
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub coords: Vec<Point>,
    pub window_side: f64,
}

impl PointSet {
    pub fn new(coords: Vec<Point>, window_side: f64) -> Self {
        PointSet {
            coords,
            window_side,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.window_side).contains(&p.x) && (0.0..=self.window_side).contains(&p.y)
    }
}

/// Draws a homogeneous PPP of `density` points per km² on the window.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, window_side: f64, rng: &mut R) -> PointSet {
    let mean = density * window_side * window_side;
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map(|d| d.sample(rng) as usize)
            .unwrap_or(0)
    } else {
        0
    };
    let coords = (0..count)
        .map(|_| {
            Point::new(
                rng.random::<f64>() * window_side,
                rng.random::<f64>() * window_side,
            )
        })
        .collect();
    PointSet::new(coords, window_side)
}

/// Guard margin `2/√λ` km separating measured BSs from the window edge.
pub fn guard_margin(lambda_b: f64) -> f64 {
    2.0 / lambda_b.sqrt()
}

/// Nearest-BS distance pdf of a PPP: `2πλ r exp(−πλr²)`.
pub fn nearest_distance_pdf(r: f64, density: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    2.0 * PI * density * r * (-PI * density * r * r).exp()
}

/// Second-nearest distance pdf of a PPP: `2(πλ)² d³ exp(−πλd²)`.
pub fn second_nearest_distance_pdf(d: f64, density: f64) -> f64 {
    if d < 0.0 {
        return 0.0;
    }
    let pl = PI * density;
    2.0 * pl * pl * d * d * d * (-pl * d * d).exp()
}

/// BS positions, one MS per BS and the Delaunay graph over the BSs.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub bs: PointSet,
    /// `ms[i]` is served by `bs[i]`.
    pub ms: PointSet,
    /// Sorted neighbour lists.
    pub delaunay: Vec<Vec<usize>>,
    /// BSs at least the guard margin away from every window edge.
    pub interior_mask: Vec<bool>,
}

impl Deployment {
    /// Assembles a deployment from precomputed parts, checking the structural
    /// invariants (equal lengths, symmetric irreflexive adjacency).
    pub fn from_parts(
        bs: PointSet,
        ms: PointSet,
        delaunay: Vec<Vec<usize>>,
        interior_mask: Vec<bool>,
    ) -> Result<Self, GeometryError> {
        let n = bs.len();
        if ms.len() != n || delaunay.len() != n || interior_mask.len() != n {
            return Err(GeometryError::Inconsistent("length mismatch".into()));
        }
        let mut delaunay = delaunay;
        for list in &mut delaunay {
            list.sort_unstable();
            list.dedup();
        }
        for (i, list) in delaunay.iter().enumerate() {
            for &j in list {
                if j == i || j >= n || delaunay[j].binary_search(&i).is_err() {
                    return Err(GeometryError::Inconsistent(format!("bad edge {i}-{j}")));
                }
            }
        }
        Ok(Deployment {
            bs,
            ms,
            delaunay,
            interior_mask,
        })
    }

    pub fn len(&self) -> usize {
        self.bs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bs.is_empty()
    }

    /// Undirected Delaunay edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.delaunay
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    pub fn are_neighbors(&self, u: usize, v: usize) -> bool {
        self.delaunay[u].binary_search(&v).is_ok()
    }

    /// Writes `kind,x_km,y_km,index` rows for every BS and MS.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "kind,x_km,y_km,index")?;
        for (kind, set) in [("bs", &self.bs), ("ms", &self.ms)] {
            for (i, p) in set.coords.iter().enumerate() {
                writeln!(out, "{kind},{},{},{i}", p.x, p.y)?;
            }
        }
        Ok(())
    }
}

/// Delaunay adjacency of `points` as sorted neighbour lists.
///
/// The triangulation uses exact orientation and in-circle predicates, so
/// collinear and cocircular inputs need no perturbation. An all-collinear
/// input yields the path through the points.
pub fn delaunay_adjacency(points: &[Point]) -> Result<Vec<Vec<usize>>, GeometryError> {
    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    for (i, p) in points.iter().enumerate() {
        let before = tri.num_vertices();
        let handle =
            tri.insert(Point2::new(p.x, p.y))
                .map_err(|e| GeometryError::Triangulation {
                    index: i,
                    reason: format!("{e:?}"),
                })?;
        if tri.num_vertices() == before {
            return Err(GeometryError::DuplicatePoint(handle.index(), i));
        }
    }
    let mut adjacency = vec![Vec::new(); points.len()];
    for edge in tri.undirected_edges() {
        let [a, b] = edge.vertices();
        let (a, b) = (a.fix().index(), b.fix().index());
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    Ok(adjacency)
}

/// Clips a convex polygon to the half-plane of points at least as close to
/// `site` as to `other`.
fn clip_to_bisector(polygon: &[Point], site: Point, other: Point) -> Vec<Point> {
    let nx = other.x - site.x;
    let ny = other.y - site.y;
    let mx = 0.5 * (other.x + site.x);
    let my = 0.5 * (other.y + site.y);
    let side = |p: Point| (p.x - mx) * nx + (p.y - my) * ny;
    let mut out = Vec::with_capacity(polygon.len() + 1);
    for (k, &cur) in polygon.iter().enumerate() {
        let prev = polygon[(k + polygon.len() - 1) % polygon.len()];
        let (sc, sp) = (side(cur), side(prev));
        if sc <= 0.0 {
            if sp > 0.0 {
                let t = sp / (sp - sc);
                out.push(Point::new(
                    prev.x + t * (cur.x - prev.x),
                    prev.y + t * (cur.y - prev.y),
                ));
            }
            out.push(cur);
        } else if sp <= 0.0 {
            let t = sp / (sp - sc);
            out.push(Point::new(
                prev.x + t * (cur.x - prev.x),
                prev.y + t * (cur.y - prev.y),
            ));
        }
    }
    out
}

fn in_cell(p: Point, i: usize, bs: &[Point], neighbors: &[usize]) -> bool {
    let d = p.dist2(bs[i]);
    neighbors.iter().all(|&j| d < p.dist2(bs[j]))
}

/// Samples one point uniformly inside the Voronoi cell of `bs[i]` clipped to the window.
fn place_in_cell<R: Rng + ?Sized>(
    i: usize,
    bs: &[Point],
    neighbors: &[usize],
    side: f64,
    rng: &mut R,
) -> Point {
    let site = bs[i];
    // The cell is the intersection of the bisector half-planes of the
    // Delaunay neighbours; its bounding box is the proposal region.
    let mut cell = vec![
        Point::new(0.0, 0.0),
        Point::new(side, 0.0),
        Point::new(side, side),
        Point::new(0.0, side),
    ];
    for &j in neighbors {
        cell = clip_to_bisector(&cell, site, bs[j]);
        if cell.is_empty() {
            break;
        }
    }
    if !cell.is_empty() {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in &cell {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = Point::new(
                x0 + rng.random::<f64>() * (x1 - x0),
                y0 + rng.random::<f64>() * (y1 - y0),
            );
            if in_cell(p, i, bs, neighbors) {
                return p;
            }
        }
    }
    let radius = neighbors
        .iter()
        .map(|&j| site.dist(bs[j]))
        .fold(f64::INFINITY, f64::min)
        .min(side)
        * 0.5;
    loop {
        let r = radius * rng.random::<f64>().sqrt();
        let phi = 2.0 * PI * rng.random::<f64>();
        let p = Point::new(site.x + r * phi.cos(), site.y + r * phi.sin());
        if p != site && (0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y) {
            return p;
        }
    }
}

/// Triangulates the BSs, places one MS uniformly in each Voronoi cell and
/// marks BSs farther than `guard` km from every window edge as interior.
pub fn build_deployment<R: Rng + ?Sized>(
    bs: PointSet,
    guard: f64,
    rng: &mut R,
) -> Result<Deployment, GeometryError> {
    if bs.len() < 3 {
        return Err(GeometryError::TooFewStations(bs.len()));
    }
    let delaunay = delaunay_adjacency(&bs.coords)?;
    let side = bs.window_side;
    let ms = (0..bs.len())
        .map(|i| place_in_cell(i, &bs.coords, &delaunay[i], side, rng))
        .collect();
    let interior_mask = bs
        .coords
        .iter()
        .map(|p| p.x >= guard && p.x <= side - guard && p.y >= guard && p.y <= side - guard)
        .collect();
    Ok(Deployment {
        bs,
        ms: PointSet::new(ms, side),
        delaunay,
        interior_mask,
    })
}

/// Samples BSs at `lambda_b` and builds a deployment with the standard guard margin.
pub fn sample_deployment<R: Rng + ?Sized>(
    lambda_b: f64,
    window_side: f64,
    rng: &mut R,
) -> Result<Deployment, GeometryError> {
    let bs = sample_ppp(lambda_b, window_side, rng);
    build_deployment(bs, guard_margin(lambda_b), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Composite Simpson rule, independent of the crate's adaptive integrator.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn pdfs_vanish_at_origin_and_normalise() {
        for lambda in [0.002, 0.02, 0.5] {
            assert_eq!(nearest_distance_pdf(0.0, lambda), 0.0);
            assert_eq!(second_nearest_distance_pdf(0.0, lambda), 0.0);
            let upper = 12.0 / (PI * lambda).sqrt();
            let n1 = simpson(|r| nearest_distance_pdf(r, lambda), 0.0, upper, 20_000);
            let n2 = simpson(
                |d| second_nearest_distance_pdf(d, lambda),
                0.0,
                upper,
                20_000,
            );
            assert!((n1 - 1.0).abs() < 1e-9, "{n1}");
            assert!((n2 - 1.0).abs() < 1e-9, "{n2}");
        }
    }

    #[test]
    fn second_nearest_mean_matches_gamma_closed_form() {
        let lambda = 0.02;
        let upper = 12.0 / (PI * lambda).sqrt();
        let mean = simpson(
            |d| d * second_nearest_distance_pdf(d, lambda),
            0.0,
            upper,
            20_000,
        );
        // Γ(2.5) / (1! · √(πλ)) = 0.75 / √λ
        let expected = 0.75 / lambda.sqrt();
        assert!(
            ((mean - expected) / expected).abs() < 1e-6,
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn ppp_count_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 10_000;
        let counts: Vec<f64> = (0..draws)
            .map(|_| sample_ppp(0.02, 150.0, &mut rng).len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / draws as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (450.0f64 / draws as f64).sqrt();
        assert!((mean - 450.0).abs() < 3.0 * se, "mean {mean}");
        // Var of the sample variance of Poisson(450) ≈ 2·450²/N.
        assert!(
            (var - 450.0).abs() < 3.0 * (2.0 * 450.0f64 * 450.0 / draws as f64).sqrt(),
            "var {var}"
        );
    }

    #[test]
    fn tiny_density_is_almost_surely_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let empty = (0..1000)
            .filter(|_| sample_ppp(1e-12, 150.0, &mut rng).is_empty())
            .count();
        assert!(empty >= 999);
        assert!(sample_ppp(0.0, 10.0, &mut rng).is_empty());
    }

    #[test]
    fn ppp_points_stay_in_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = sample_ppp(0.05, 40.0, &mut rng);
        assert!(set.coords.iter().all(|&p| set.contains(p)));
    }

    #[test]
    fn triangle_is_complete_graph() {
        let pts = PointSet::new(
            vec![
                Point::new(1.0, 1.0),
                Point::new(5.0, 1.5),
                Point::new(2.0, 4.0),
            ],
            6.0,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dep = build_deployment(pts, 0.5, &mut rng).unwrap();
        assert_eq!(dep.delaunay, vec![vec![1, 2], vec![0, 2], vec![0, 1]]);
    }

    #[test]
    fn collinear_points_give_a_path() {
        let pts: Vec<Point> = [0.0, 1.0, 3.0, 7.0]
            .iter()
            .map(|&x| Point::new(x, 0.0))
            .collect();
        let adj = delaunay_adjacency(&pts).unwrap();
        assert_eq!(adj, vec![vec![1], vec![0, 2], vec![1, 3], vec![2]]);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let two = PointSet::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)], 2.0);
        assert_eq!(
            build_deployment(two, 0.1, &mut rng),
            Err(GeometryError::TooFewStations(2))
        );
        let dup = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 1.0),
        ];
        assert_eq!(
            delaunay_adjacency(&dup),
            Err(GeometryError::DuplicatePoint(1, 2))
        );
    }

    #[test]
    fn mean_delaunay_degree_near_six() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut total = 0.0;
        for _ in 0..100 {
            let pts: Vec<Point> = (0..200)
                .map(|_| Point::new(rng.random::<f64>() * 100.0, rng.random::<f64>() * 100.0))
                .collect();
            let adj = delaunay_adjacency(&pts).unwrap();
            total += adj.iter().map(|l| l.len() as f64).sum::<f64>() / pts.len() as f64;
        }
        let mean = total / 100.0;
        assert!((5.7..=6.3).contains(&mean), "{mean}");
    }

    #[test]
    fn interior_mask_respects_guard() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let dep = sample_deployment(0.02, 150.0, &mut rng).unwrap();
        let g = guard_margin(0.02);
        for (p, &inside) in dep.bs.coords.iter().zip(&dep.interior_mask) {
            let far = p.x >= g && p.y >= g && p.x <= 150.0 - g && p.y <= 150.0 - g;
            assert_eq!(far, inside);
        }
        assert!(dep.interior_mask.iter().any(|&m| m));
    }

    #[test]
    fn nearest_distance_matches_pdf_by_ks() {
        // Probe points uniform in the window centre; their nearest-BS distance
        // has cdf 1 − exp(−πλr²).
        let lambda = 0.02;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut samples = Vec::with_capacity(100_000);
        while samples.len() < 100_000 {
            let bs = sample_ppp(lambda, 150.0, &mut rng);
            for _ in 0..500 {
                let p = Point::new(
                    30.0 + rng.random::<f64>() * 90.0,
                    30.0 + rng.random::<f64>() * 90.0,
                );
                let d = bs
                    .coords
                    .iter()
                    .map(|&b| b.dist2(p))
                    .fold(f64::INFINITY, f64::min)
                    .sqrt();
                samples.push(d);
            }
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = samples.len() as f64;
        let ks = samples
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                let cdf = 1.0 - (-PI * lambda * r * r).exp();
                (cdf - k as f64 / n)
                    .abs()
                    .max((cdf - (k + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS statistic {ks}");
    }

    #[test]
    fn deployment_csv_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let dep = sample_deployment(0.02, 50.0, &mut rng).unwrap();
        let mut buf = Vec::new();
        dep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "kind,x_km,y_km,index");
        assert_eq!(lines.len(), 1 + 2 * dep.len());
        assert!(lines[1].starts_with("bs,"));
        assert!(lines.last().unwrap().starts_with("ms,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn ms_lies_in_its_voronoi_cell(seed in any::<u64>(), side in 20.0f64..120.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bs = sample_ppp(0.02, side, &mut rng);
            prop_assume!(bs.len() >= 3);
            let dep = build_deployment(bs, 5.0, &mut rng).unwrap();
            for (i, &m) in dep.ms.coords.iter().enumerate() {
                prop_assert!(dep.ms.contains(m));
                let own = m.dist2(dep.bs.coords[i]);
                for (j, &b) in dep.bs.coords.iter().enumerate() {
                    if j != i {
                        prop_assert!(own <= m.dist2(b), "ms {} closer to bs {}", i, j);
                    }
                }
            }
        }

        #[test]
        fn delaunay_is_symmetric_and_irreflexive(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dep = sample_deployment(0.02, 60.0, &mut rng);
            prop_assume!(dep.is_ok());
            let dep = dep.unwrap();
            for (i, list) in dep.delaunay.iter().enumerate() {
                for &j in list {
                    prop_assert_ne!(i, j);
                    prop_assert!(dep.are_neighbors(j, i));
                }
            }
        }

        #[test]
        fn same_seed_same_points(seed in any::<u64>()) {
            let a = sample_ppp(0.02, 100.0, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = sample_ppp(0.02, 100.0, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(a, b);
        }
    }
}
