//! Stochastic-geometry simulation and analysis of paired-cell cooperation
//! in dynamic TDD networks.

pub mod analytic;
pub mod geometry;
pub mod montecarlo;
pub mod pairing;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod scenario;

pub use analytic::{AnalyticError, AnalyticPoint, InterfererDensities, QuadratureSpec};
pub use geometry::{Deployment, GeometryError, Point, PointSet};
pub use montecarlo::{
    MonteCarloError, SimSetup, SuccessCurve, SuccessRow, ThroughputCurve, ThroughputRow,
};
pub use pairing::{Matching, PairingAlgorithm, PairingError, WeightedGraph};
pub use params::{
    default_paper_params, ConfigError, DirectionSelection, ExperimentConfig, SystemParams,
};
pub use scenario::{BaselineFallback, Direction, LinkSample, ModeKind, Scheme};
