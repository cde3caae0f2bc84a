//! Traffic directions, cooperation modes and per-link SINR for one slot.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::geometry::{Deployment, Point};
use crate::pairing::Matching;
use crate::params::SystemParams;
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Downlink,
    Uplink,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Uplink, Direction::Downlink];
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Downlink => "dl",
            Direction::Uplink => "ul",
        })
    }
}

/// Cooperation policy applied to every BS pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Same-direction pairs time-share, cross-direction pairs use CoMPflex.
    Comp2flex,
    /// Only same-direction pairs cooperate.
    CompOnly,
    /// Only cross-direction pairs cooperate.
    CompflexOnly,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Comp2flex, Scheme::CompOnly, Scheme::CompflexOnly];
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "comp2flex" => Ok(Scheme::Comp2flex),
            "comp-only" => Ok(Scheme::CompOnly),
            "compflex-only" => Ok(Scheme::CompflexOnly),
            other => Err(format!(
                "unknown scheme `{other}` (expected comp2flex, comp-only or compflex-only)"
            )),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Comp2flex => "comp2flex",
            Scheme::CompOnly => "comp-only",
            Scheme::CompflexOnly => "compflex-only",
        })
    }
}

/// What a baseline scheme does with a pair whose traffic it cannot serve cooperatively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BaselineFallback {
    /// Both BSs operate alone every slot.
    #[default]
    Standalone,
    /// Both BSs stay silent.
    Silent,
}

impl FromStr for BaselineFallback {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standalone" => Ok(BaselineFallback::Standalone),
            "silent" => Ok(BaselineFallback::Silent),
            other => Err(format!(
                "unknown fallback `{other}` (expected standalone or silent)"
            )),
        }
    }
}

impl fmt::Display for BaselineFallback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineFallback::Standalone => "standalone",
            BaselineFallback::Silent => "silent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficAssignment {
    pub direction: Vec<Direction>,
}

/// Independent per-BS directions, DL with probability `delta`.
///
/// One uniform is drawn per BS, so assignments for different `delta` on the
/// same stream are nested: raising `delta` only turns UL users into DL users.
pub fn assign_traffic<R: Rng + ?Sized>(n: usize, delta: f64, rng: &mut R) -> TrafficAssignment {
    let direction = (0..n)
        .map(|_| {
            if rng.random::<f64>() < delta {
                Direction::Downlink
            } else {
                Direction::Uplink
            }
        })
        .collect();
    TrafficAssignment { direction }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    /// Two DL BSs, dynamic cell selection: one transmits per slot.
    DlComp,
    /// Two UL BSs, coordinated scheduling: one MS transmits per slot.
    UlComp,
    /// One DL and one UL BS; the UL BS cancels its partner's signal.
    CompFlex,
    Standalone,
    /// Incompatible pair switched off by a baseline scheme.
    Silenced,
}

impl ModeKind {
    /// Fraction of slots in which a member link is active.
    pub fn duty(self) -> f64 {
        match self {
            ModeKind::DlComp | ModeKind::UlComp => 0.5,
            ModeKind::CompFlex | ModeKind::Standalone => 1.0,
            ModeKind::Silenced => 0.0,
        }
    }

    pub fn is_time_shared(self) -> bool {
        matches!(self, ModeKind::DlComp | ModeKind::UlComp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairMode {
    pub kind: ModeKind,
    /// One or two BS indices.
    pub members: Vec<usize>,
    /// The member served this slot; set only for time-shared modes.
    pub active_member: Option<usize>,
}

/// Assigns every pair its cooperation mode under `scheme` and picks the
/// active member of time-shared pairs.
///
/// One fair coin is drawn per pair whatever its mode, so every scheme sees
/// the same schedule for the pairs it time-shares.
pub fn classify_pairs<R: Rng + ?Sized>(
    matching: &Matching,
    traffic: &TrafficAssignment,
    scheme: Scheme,
    fallback: BaselineFallback,
    rng: &mut R,
) -> Vec<PairMode> {
    let mut modes = Vec::with_capacity(matching.pairs.len() + matching.unpaired.len());
    for &(a, b) in &matching.pairs {
        let active = if rng.random::<bool>() { a } else { b };
        let (da, db) = (traffic.direction[a], traffic.direction[b]);
        let natural = match (da, db) {
            (Direction::Downlink, Direction::Downlink) => ModeKind::DlComp,
            (Direction::Uplink, Direction::Uplink) => ModeKind::UlComp,
            _ => ModeKind::CompFlex,
        };
        let cooperates = match scheme {
            Scheme::Comp2flex => true,
            Scheme::CompOnly => natural != ModeKind::CompFlex,
            Scheme::CompflexOnly => natural == ModeKind::CompFlex,
        };
        if cooperates {
            let active_member = natural.is_time_shared().then_some(active);
            modes.push(PairMode {
                kind: natural,
                members: vec![a, b],
                active_member,
            });
        } else {
            let kind = match fallback {
                BaselineFallback::Standalone => ModeKind::Standalone,
                BaselineFallback::Silent => ModeKind::Silenced,
            };
            for m in [a, b] {
                modes.push(PairMode {
                    kind,
                    members: vec![m],
                    active_member: None,
                });
            }
        }
    }
    for &v in &matching.unpaired {
        modes.push(PairMode {
            kind: ModeKind::Standalone,
            members: vec![v],
            active_member: None,
        });
    }
    modes
}

/// Source of small-scale fading power gains.
///
/// Node ids: BS `i` is node `i`, its MS is node `n + i`.
pub trait FadingModel {
    /// Fills `out[tx]` with the gain from every node `tx` to receiver `rx`.
    fn fill_gains(&self, rx: usize, out: &mut [f64]);
}

/// Unit gains everywhere (no fading).
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitFading;

impl FadingModel for UnitFading {
    fn fill_gains(&self, _rx: usize, out: &mut [f64]) {
        out.fill(1.0);
    }
}

/// I.i.d. Exp(1) power gains (Rayleigh amplitude), drawn from the
/// receiver's own stream so the gain of a link does not depend on which
/// other transmitters are active.
#[derive(Debug, Clone, Copy)]
pub struct RayleighFading {
    pub seed: u64,
    pub drop: u64,
}

impl FadingModel for RayleighFading {
    fn fill_gains(&self, rx: usize, out: &mut [f64]) {
        let mut rng = stream(self.seed, self.drop, Purpose::Fading(rx));
        for g in out.iter_mut() {
            *g = Exp1.sample(&mut rng);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSample {
    pub bs_index: usize,
    pub direction: Direction,
    pub kind: ModeKind,
    /// Interior BS whose link is active this slot.
    pub counted: bool,
    /// Linear SINR; `f64::INFINITY` when nothing interferes and there is no
    /// noise. Zero for links that are not active.
    pub sinr: f64,
    pub serving_distance: f64,
}

impl LinkSample {
    pub fn succeeds(&self, beta: f64) -> bool {
        self.counted && self.sinr >= beta
    }
}

/// `d^(−α)` from a squared distance.
#[inline]
pub fn path_gain(d2: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        1.0 / (d2 * d2)
    } else {
        d2.powf(-0.5 * alpha)
    }
}

struct Transmitter {
    node: usize,
    at: Point,
    power: f64,
}

/// Evaluates the SINR of every interior BS's link in this slot.
///
/// Active transmitters: DL BSs that are not the idle member of a DCS pair,
/// and MSs of UL BSs that are not the idle member of a coordinated-scheduling
/// pair. A CompFlex UL BS removes its partner DL BS from its interference.
/// Non-interior BSs only act as interferers and produce no samples.
pub fn evaluate_links<F: FadingModel + ?Sized>(
    dep: &Deployment,
    modes: &[PairMode],
    traffic: &TrafficAssignment,
    params: &SystemParams,
    fading: &F,
) -> Vec<LinkSample> {
    let n = dep.len();
    let mut kind = vec![ModeKind::Standalone; n];
    let mut active = vec![false; n];
    let mut cancelled: Vec<Option<usize>> = vec![None; n];
    for mode in modes {
        for &m in &mode.members {
            kind[m] = mode.kind;
            active[m] = match mode.kind {
                ModeKind::DlComp | ModeKind::UlComp => mode.active_member == Some(m),
                ModeKind::CompFlex | ModeKind::Standalone => true,
                ModeKind::Silenced => false,
            };
        }
        if mode.kind == ModeKind::CompFlex {
            let (a, b) = (mode.members[0], mode.members[1]);
            if traffic.direction[a] == Direction::Uplink {
                cancelled[a] = Some(b);
            } else {
                cancelled[b] = Some(a);
            }
        }
    }

    let transmitters: Vec<Transmitter> = (0..n)
        .filter(|&i| active[i])
        .map(|i| match traffic.direction[i] {
            Direction::Downlink => Transmitter {
                node: i,
                at: dep.bs.coords[i],
                power: params.p_b,
            },
            Direction::Uplink => Transmitter {
                node: n + i,
                at: dep.ms.coords[i],
                power: params.p_m,
            },
        })
        .collect();

    let mut gains = vec![0.0; 2 * n];
    let mut samples = Vec::new();
    for i in (0..n).filter(|&i| dep.interior_mask[i]) {
        let direction = traffic.direction[i];
        let (bs, ms) = (dep.bs.coords[i], dep.ms.coords[i]);
        let serving_distance = bs.dist(ms);
        if !active[i] {
            samples.push(LinkSample {
                bs_index: i,
                direction,
                kind: kind[i],
                counted: false,
                sinr: 0.0,
                serving_distance,
            });
            continue;
        }
        let (rx_node, rx_at, tx_node, tx_power) = match direction {
            Direction::Downlink => (n + i, ms, i, params.p_b),
            Direction::Uplink => (i, bs, n + i, params.p_m),
        };
        fading.fill_gains(rx_node, &mut gains);
        let signal = gains[tx_node]
            * tx_power
            * path_gain(serving_distance * serving_distance, params.alpha);
        let mut interference = 0.0;
        for t in &transmitters {
            if t.node == tx_node || Some(t.node) == cancelled[i] {
                continue;
            }
            interference += gains[t.node] * t.power * path_gain(t.at.dist2(rx_at), params.alpha);
        }
        let denominator = interference + params.noise;
        let sinr = if denominator == 0.0 {
            f64::INFINITY
        } else {
            signal / denominator
        };
        samples.push(LinkSample {
            bs_index: i,
            direction,
            kind: kind[i],
            counted: true,
            sinr,
            serving_distance,
        });
    }
    samples
}
