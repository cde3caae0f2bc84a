//! Repeated deployment drops: success probabilities and throughput.
//!
//! Drop `d` draws all of its randomness from streams keyed by `(seed, d)`;
//! per-drop partial results are collected in drop order and folded
//! serially, so results do not depend on the number of worker threads.

use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::AnalyticPoint;
use crate::geometry::{sample_deployment, GeometryError};
use crate::pairing::{pair_deployment, PairingAlgorithm};
use crate::params::{db_to_linear, DirectionSelection, SystemParams};
use crate::rng::{stream, Purpose};
use crate::scenario::{
    assign_traffic, classify_pairs, evaluate_links, BaselineFallback, Direction, LinkSample,
    ModeKind, RayleighFading, Scheme,
};

/// Operating threshold of the throughput metric.
pub const THROUGHPUT_THRESHOLD_DB: f64 = 10.0;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Recorded in CSV metadata next to throughput results.
pub const THROUGHPUT_FORMULA: &str = "duty*1[sinr>=beta]*log2(1+beta),inverse-duty-weighted";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonteCarloError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("at least one drop is required")]
    NoDrops,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimSetup {
    pub scheme: Scheme,
    pub pairing: PairingAlgorithm,
    pub fallback: BaselineFallback,
}

impl SimSetup {
    pub fn new(scheme: Scheme, pairing: PairingAlgorithm) -> Self {
        SimSetup {
            scheme,
            pairing,
            fallback: BaselineFallback::Standalone,
        }
    }
}

/// Runs one drop and returns a sample per interior BS.
///
/// A window that holds fewer than three BSs yields no samples.
pub fn simulate_drop(
    params: &SystemParams,
    setup: &SimSetup,
    drop: u64,
) -> Result<Vec<LinkSample>, MonteCarloError> {
    let mut rng = stream(params.seed, drop, Purpose::Deployment);
    let dep = match sample_deployment(params.lambda_b, params.window_side, &mut rng) {
        Ok(dep) => dep,
        Err(GeometryError::TooFewStations(_)) => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let matching = pair_deployment(
        setup.pairing,
        &dep,
        &mut stream(params.seed, drop, Purpose::PairingOrder),
    );
    let traffic = assign_traffic(
        dep.len(),
        params.delta,
        &mut stream(params.seed, drop, Purpose::Traffic),
    );
    let modes = classify_pairs(
        &matching,
        &traffic,
        setup.scheme,
        setup.fallback,
        &mut stream(params.seed, drop, Purpose::Schedule),
    );
    let fading = RayleighFading {
        seed: params.seed,
        drop,
    };
    Ok(evaluate_links(&dep, &modes, &traffic, params, &fading))
}

fn direction_slot(d: Direction) -> usize {
    match d {
        Direction::Uplink => 0,
        Direction::Downlink => 1,
    }
}

fn directions_in(selection: DirectionSelection) -> impl Iterator<Item = Direction> {
    Direction::ALL
        .into_iter()
        .filter(move |&d| selection.includes(d))
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (
        (center - half).max(0.0).min(p),
        (center + half).min(1.0).max(p),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessRow {
    /// Scheme name, optionally suffixed with the pairing algorithm.
    pub scheme: String,
    pub direction: Direction,
    pub beta_db: f64,
    pub p_success: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Zero marks an analytic row.
    pub n_samples: u64,
}

impl SuccessRow {
    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn from_analytic(scheme: &str, point: &AnalyticPoint) -> Self {
        SuccessRow {
            scheme: scheme.to_string(),
            direction: point.direction,
            beta_db: point.beta_db,
            p_success: point.p_success,
            ci_low: point.p_success,
            ci_high: point.p_success,
            n_samples: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuccessCurve {
    pub rows: Vec<SuccessRow>,
}

impl SuccessCurve {
    pub fn get(&self, direction: Direction, beta_db: f64) -> Option<&SuccessRow> {
        self.rows
            .iter()
            .find(|r| r.direction == direction && r.beta_db == beta_db)
    }

    pub fn direction(&self, direction: Direction) -> impl Iterator<Item = &SuccessRow> {
        self.rows.iter().filter(move |r| r.direction == direction)
    }
}

#[derive(Debug, Clone)]
struct SuccessCounts {
    counted: [u64; 2],
    /// `success[b][dir]`
    success: Vec<[u64; 2]>,
}

impl SuccessCounts {
    fn new(n_beta: usize) -> Self {
        SuccessCounts {
            counted: [0; 2],
            success: vec![[0; 2]; n_beta],
        }
    }

    fn add(&mut self, other: &SuccessCounts) {
        for d in 0..2 {
            self.counted[d] += other.counted[d];
        }
        for (a, b) in self.success.iter_mut().zip(&other.success) {
            a[0] += b[0];
            a[1] += b[1];
        }
    }
}

/// Empirical success probability per direction and threshold.
///
/// Only links that transmit in their slot are counted. Directions without
/// any counted link produce no rows.
pub fn estimate_success(
    params: &SystemParams,
    setup: &SimSetup,
    beta_db: &[f64],
    directions: DirectionSelection,
) -> Result<SuccessCurve, MonteCarloError> {
    estimate_success_labeled(
        params,
        setup,
        beta_db,
        directions,
        &setup.scheme.to_string(),
    )
}

fn estimate_success_labeled(
    params: &SystemParams,
    setup: &SimSetup,
    beta_db: &[f64],
    directions: DirectionSelection,
    label: &str,
) -> Result<SuccessCurve, MonteCarloError> {
    if params.iterations == 0 {
        return Err(MonteCarloError::NoDrops);
    }
    let betas: Vec<f64> = beta_db.iter().map(|&b| db_to_linear(b)).collect();
    let per_drop: Vec<SuccessCounts> = (0..params.iterations)
        .into_par_iter()
        .map(|drop| {
            let links = simulate_drop(params, setup, drop)?;
            let mut c = SuccessCounts::new(betas.len());
            for link in links.iter().filter(|l| l.counted) {
                let d = direction_slot(link.direction);
                c.counted[d] += 1;
                for (b, &beta) in betas.iter().enumerate() {
                    if link.sinr >= beta {
                        c.success[b][d] += 1;
                    }
                }
            }
            Ok(c)
        })
        .collect::<Result<_, MonteCarloError>>()?;
    let mut total = SuccessCounts::new(betas.len());
    for c in &per_drop {
        total.add(c);
    }
    let mut rows = Vec::new();
    for direction in directions_in(directions) {
        let d = direction_slot(direction);
        let n = total.counted[d];
        if n == 0 {
            continue;
        }
        for (b, &db) in beta_db.iter().enumerate() {
            let s = total.success[b][d];
            let (ci_low, ci_high) = wilson_interval(s, n);
            rows.push(SuccessRow {
                scheme: label.to_string(),
                direction,
                beta_db: db,
                p_success: s as f64 / n as f64,
                ci_low,
                ci_high,
                n_samples: n,
            });
        }
    }
    Ok(SuccessCurve { rows })
}

/// Greedy and Edmonds pairing on identical deployments, traffic and fading.
/// Rows are labelled `<scheme>-greedy` and `<scheme>-edmonds`.
pub fn sweep_greedy_vs_edmonds(
    params: &SystemParams,
    scheme: Scheme,
    beta_db: &[f64],
    directions: DirectionSelection,
) -> Result<(SuccessCurve, SuccessCurve), MonteCarloError> {
    let run = |pairing: PairingAlgorithm| {
        let setup = SimSetup::new(scheme, pairing);
        estimate_success_labeled(
            params,
            &setup,
            beta_db,
            directions,
            &format!("{scheme}-{pairing}"),
        )
    };
    Ok((
        run(PairingAlgorithm::Greedy)?,
        run(PairingAlgorithm::Edmonds)?,
    ))
}

/// Rate credited to a link in its active slot, in b/s/Hz.
pub fn link_rate(kind: ModeKind, sinr: f64, beta: f64) -> f64 {
    if sinr >= beta {
        kind.duty() * (1.0 + beta).log2()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputRow {
    pub scheme: String,
    pub direction: Direction,
    pub delta: f64,
    pub throughput: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThroughputCurve {
    pub rows: Vec<ThroughputRow>,
}

impl ThroughputCurve {
    pub fn get(&self, direction: Direction, delta: f64) -> Option<&ThroughputRow> {
        self.rows
            .iter()
            .find(|r| r.direction == direction && r.delta == delta)
    }
}

/// Weighted rate sums `(Σ w·rate, Σ w)` per direction.
///
/// An active link has weight `1/duty`, which stands in for its partner in a
/// time-shared pair that is idle this slot; the idle partner gets weight 0.
/// Silenced BSs contribute rate 0 with weight 1.
fn throughput_sums(links: &[LinkSample], beta: f64) -> [(f64, f64); 2] {
    let mut sums = [(0.0, 0.0); 2];
    for link in links {
        let d = direction_slot(link.direction);
        if link.counted {
            let w = 1.0 / link.kind.duty();
            sums[d].0 += w * link_rate(link.kind, link.sinr, beta);
            sums[d].1 += w;
        } else if link.kind == ModeKind::Silenced {
            sums[d].1 += 1.0;
        }
    }
    sums
}

/// Mean per-user throughput at the fixed operating threshold over a grid of
/// DL traffic ratios. Drops are shared across the grid, so only the traffic
/// directions change with `delta`.
pub fn estimate_throughput(
    params: &SystemParams,
    setup: &SimSetup,
    deltas: &[f64],
    directions: DirectionSelection,
) -> Result<ThroughputCurve, MonteCarloError> {
    if params.iterations == 0 {
        return Err(MonteCarloError::NoDrops);
    }
    let beta = db_to_linear(THROUGHPUT_THRESHOLD_DB);
    let per_drop: Vec<Vec<[(f64, f64); 2]>> = (0..params.iterations)
        .into_par_iter()
        .map(|drop| {
            deltas
                .iter()
                .map(|&delta| {
                    let p = SystemParams {
                        delta,
                        ..params.clone()
                    };
                    Ok(throughput_sums(&simulate_drop(&p, setup, drop)?, beta))
                })
                .collect::<Result<Vec<_>, MonteCarloError>>()
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for direction in directions_in(directions) {
        let d = direction_slot(direction);
        for (k, &delta) in deltas.iter().enumerate() {
            let (mut num, mut den) = (0.0, 0.0);
            for drop in &per_drop {
                num += drop[k][d].0;
                den += drop[k][d].1;
            }
            if den == 0.0 {
                continue;
            }
            rows.push(ThroughputRow {
                scheme: setup.scheme.to_string(),
                direction,
                delta,
                throughput: num / den,
            });
        }
    }
    Ok(ThroughputCurve { rows })
}

/// `scheme,direction,beta_db,p_success,ci_low,ci_high,n_samples` after a `# meta:` line.
pub fn write_success_csv<W: Write>(rows: &[SuccessRow], meta: &str, mut out: W) -> io::Result<()> {
    writeln!(out, "# meta: {meta}")?;
    writeln!(
        out,
        "scheme,direction,beta_db,p_success,ci_low,ci_high,n_samples"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scheme, r.direction, r.beta_db, r.p_success, r.ci_low, r.ci_high, r.n_samples
        )?;
    }
    Ok(())
}

/// `scheme,direction,delta,throughput_bps_hz` after a `# meta:` line.
pub fn write_throughput_csv<W: Write>(
    rows: &[ThroughputRow],
    meta: &str,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "# meta: {meta}")?;
    writeln!(out, "scheme,direction,delta,throughput_bps_hz")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.scheme, r.direction, r.delta, r.throughput
        )?;
    }
    Ok(())
}
