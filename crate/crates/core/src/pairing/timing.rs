use std::io::{self, Write};
use std::time::Instant;

use super::{edmonds_pair, greedy_pair, PairingError, WeightedGraph};
use crate::geometry::sample_deployment;
use crate::params::SystemParams;
use crate::rng::{stream, Purpose};

/// BS densities of the reference timing table, BS/km².
pub const TABLE_DENSITIES: [f64; 5] = [0.002, 0.0115, 0.021, 0.0305, 0.04];

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub density: f64,
    pub mean_stations: f64,
    pub greedy_seconds: f64,
    pub edmonds_seconds: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Median wall-clock time of each pairing algorithm per density.
///
/// Deployments (including the Delaunay graph) are built outside the timed
/// region; the Edmonds time includes building its weighted graph.
pub fn bench_pairing(
    params: &SystemParams,
    densities: &[f64],
    repetitions: usize,
) -> Result<Vec<TimingRow>, PairingError> {
    if repetitions < 3 {
        return Err(PairingError::TooFewRepetitions(repetitions));
    }
    let mut rows = Vec::with_capacity(densities.len());
    for &density in densities {
        let mut greedy = Vec::with_capacity(repetitions);
        let mut edmonds = Vec::with_capacity(repetitions);
        let mut stations = 0usize;
        for rep in 0..repetitions as u64 {
            let mut rng = stream(params.seed, rep, Purpose::Deployment);
            let dep = sample_deployment(density, params.window_side, &mut rng)?;
            stations += dep.len();
            let mut order_rng = stream(params.seed, rep, Purpose::PairingOrder);

            let start = Instant::now();
            let g = greedy_pair(&dep, &mut order_rng);
            greedy.push(start.elapsed().as_secs_f64());

            let start = Instant::now();
            let e = edmonds_pair(&WeightedGraph::from_deployment(&dep));
            edmonds.push(start.elapsed().as_secs_f64());

            std::hint::black_box((g, e));
        }
        rows.push(TimingRow {
            density,
            mean_stations: stations as f64 / repetitions as f64,
            greedy_seconds: median(&mut greedy),
            edmonds_seconds: median(&mut edmonds),
        });
    }
    Ok(rows)
}

/// Writes `density,greedy_seconds,edmonds_seconds` preceded by a `# meta:` line.
pub fn write_timing_csv<W: Write>(rows: &[TimingRow], meta: &str, mut out: W) -> io::Result<()> {
    writeln!(out, "# meta: {meta}")?;
    writeln!(out, "density,greedy_seconds,edmonds_seconds")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{}",
            row.density, row.greedy_seconds, row.edmonds_seconds
        )?;
    }
    Ok(())
}
