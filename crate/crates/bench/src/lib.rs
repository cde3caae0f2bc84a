//! Shared fixtures for the benchmarks.

use comp2flex::geometry::{sample_deployment, sample_ppp, PointSet};
use comp2flex::rng::{stream, Purpose};
use comp2flex::Deployment;

/// Reference window side, km.
pub const WINDOW_KM: f64 = 150.0;

/// Deployment of drop 0 at `density` on the reference window.
pub fn deployment(density: f64, seed: u64) -> Deployment {
    sample_deployment(
        density,
        WINDOW_KM,
        &mut stream(seed, 0, Purpose::Deployment),
    )
    .expect("reference window holds enough stations")
}

pub fn stations(density: f64, seed: u64) -> PointSet {
    sample_ppp(
        density,
        WINDOW_KM,
        &mut stream(seed, 0, Purpose::Deployment),
    )
}
