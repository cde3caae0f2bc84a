//! Command-line front end: resolves configuration, runs one experiment and
//! writes its CSV.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use comp2flex::analytic::analytic_curve;
use comp2flex::geometry::sample_deployment;
use comp2flex::montecarlo::{
    estimate_success, estimate_throughput, sweep_greedy_vs_edmonds, write_success_csv,
    write_throughput_csv, SuccessRow, ThroughputRow, THROUGHPUT_FORMULA, THROUGHPUT_THRESHOLD_DB,
};
use comp2flex::pairing::{bench_pairing, write_timing_csv, TABLE_DENSITIES};
use comp2flex::params::parse_list;
use comp2flex::rng::{stream, Purpose};
use comp2flex::{
    AnalyticError, ConfigError, DirectionSelection, ExperimentConfig, GeometryError,
    MonteCarloError, PairingError, QuadratureSpec, Scheme, SimSetup,
};

const DEFAULT_DELTAS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    MonteCarlo(#[from] MonteCarloError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl CliError {
    /// 2 for numerical non-convergence, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analytic(AnalyticError::Quadrature(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Success probability over SINR thresholds.
    SweepBeta,
    /// Throughput over DL traffic ratios at the 10 dB operating threshold.
    SweepDelta,
    /// Success curves under greedy and Edmonds pairing on matched drops.
    ComparePairing,
    /// Wall-clock time of both pairing algorithms over the reference densities.
    BenchPairing,
    /// Analytic success probability over SINR thresholds.
    Analytic,
    /// BS and MS positions of one drop.
    DumpDeployment,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::SweepBeta => "sweep-beta",
            Command::SweepDelta => "sweep-delta",
            Command::ComparePairing => "compare-pairing",
            Command::BenchPairing => "bench-pairing",
            Command::Analytic => "analytic",
            Command::DumpDeployment => "dump-deployment",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// UL success of all schemes plus analytic curve.
    Fig2,
    /// DL success of all schemes plus analytic curve.
    Fig3,
    /// Greedy versus Edmonds pairing.
    Fig4,
    /// Throughput versus DL traffic ratio for all schemes.
    Fig5,
    /// Pairing run times.
    Table2,
}

impl Preset {
    fn command(self) -> Command {
        match self {
            Preset::Fig2 | Preset::Fig3 => Command::SweepBeta,
            Preset::Fig4 => Command::ComparePairing,
            Preset::Fig5 => Command::SweepDelta,
            Preset::Table2 => Command::BenchPairing,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "comp2flex",
    version,
    about = "Paired-BS cooperation in dynamic TDD networks"
)]
struct Args {
    #[command(subcommand)]
    command: Option<Command>,
    /// `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master RNG seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<String>,
    /// comp2flex, comp-only or compflex-only.
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// greedy or edmonds.
    #[arg(long, global = true)]
    pairing: Option<String>,
    /// ul, dl or both.
    #[arg(long, global = true)]
    direction: Option<String>,
    /// Comma-separated SINR thresholds in dB.
    #[arg(
        long = "beta-db",
        global = true,
        value_name = "LIST",
        allow_hyphen_values = true
    )]
    beta_db: Option<String>,
    /// Comma-separated DL traffic ratios; other commands use the first.
    #[arg(long, global = true, value_name = "LIST")]
    delta: Option<String>,
    /// Number of drops.
    #[arg(long, global = true, value_name = "N")]
    iterations: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    /// Worker threads for Monte Carlo drops.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Repetitions per density for bench-pairing.
    #[arg(long, global = true, value_name = "N", default_value_t = 5)]
    repetitions: usize,
    /// Drop index for dump-deployment.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    drop: u64,
}

/// Fully resolved experiment.
#[derive(Debug, Clone)]
struct Plan {
    command: Command,
    preset: Option<Preset>,
    config: ExperimentConfig,
    deltas: Vec<f64>,
    schemes: Vec<Scheme>,
    repetitions: usize,
    drop: u64,
}

fn resolve(args: &Args) -> Result<Plan, CliError> {
    let command = match (args.command, args.preset) {
        (Some(c), Some(p)) if c != p.command() => {
            return Err(CliError::Usage(format!(
                "preset {:?} runs {}, not {}",
                p,
                p.command().name(),
                c.name()
            )))
        }
        (Some(c), _) => c,
        (None, Some(p)) => p.command(),
        (None, None) => return Err(CliError::Usage("no subcommand given (try --help)".into())),
    };
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let mut schemes = None;
    match args.preset {
        Some(Preset::Fig2) => {
            config.direction = DirectionSelection::Ul;
            schemes = Some(Scheme::ALL.to_vec());
        }
        Some(Preset::Fig3) => {
            config.direction = DirectionSelection::Dl;
            schemes = Some(Scheme::ALL.to_vec());
        }
        Some(Preset::Fig4) => {
            config.scheme = Scheme::Comp2flex;
            config.direction = DirectionSelection::Both;
        }
        Some(Preset::Fig5) => {
            config.direction = DirectionSelection::Both;
            schemes = Some(Scheme::ALL.to_vec());
        }
        Some(Preset::Table2) | None => {}
    }
    let flags = [
        ("seed", &args.seed),
        ("scheme", &args.scheme),
        ("pairing", &args.pairing),
        ("direction", &args.direction),
        ("beta_db", &args.beta_db),
        ("iterations", &args.iterations),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, v)?;
        }
    }
    if args.scheme.is_some() {
        schemes = None;
    }
    let mut deltas = DEFAULT_DELTAS.to_vec();
    if let Some(list) = &args.delta {
        deltas = parse_list("delta", list)?;
        config.set("delta", &deltas[0].to_string())?;
        if let Some(&bad) = deltas.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(ConfigError::BadValue {
                key: "delta".into(),
                value: bad.to_string(),
            }
            .into());
        }
    }
    config.params.validate()?;
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    Ok(Plan {
        command,
        preset: args.preset,
        schemes: schemes.unwrap_or_else(|| vec![config.scheme]),
        config,
        deltas,
        repetitions: args.repetitions,
        drop: args.drop,
    })
}

fn meta(plan: &Plan, extra: &[(&str, String)]) -> String {
    let mut parts: Vec<String> = plan
        .config
        .render()
        .lines()
        .filter_map(|l| {
            l.split_once('=')
                .map(|(k, v)| format!("{}={}", k.trim(), v.trim()))
        })
        .collect();
    parts.push(format!("command={}", plan.command.name()));
    if let Some(p) = plan.preset {
        parts.push(format!("preset={p:?}").to_lowercase());
    }
    for (k, v) in extra {
        parts.push(format!("{k}={v}"));
    }
    parts.join(";")
}

fn summarize_success(rows: &[SuccessRow]) {
    let mut start = 0;
    while start < rows.len() {
        let key = (
            &rows[start].scheme,
            rows[start].direction,
            rows[start].n_samples == 0,
        );
        let end = rows[start..]
            .iter()
            .position(|r| (&r.scheme, r.direction, r.n_samples == 0) != key)
            .map_or(rows.len(), |k| start + k);
        let curve = &rows[start..end];
        let kind = if key.2 { " analytic" } else { "" };
        let points: Vec<String> = curve
            .iter()
            .map(|r| format!("{}dB:{:.4}", r.beta_db, r.p_success))
            .collect();
        eprintln!(
            "{} {}{}: {} (n={})",
            key.0,
            key.1,
            kind,
            points.join(" "),
            curve[0].n_samples
        );
        start = end;
    }
}

fn summarize_throughput(rows: &[ThroughputRow]) {
    let mut start = 0;
    while start < rows.len() {
        let key = (&rows[start].scheme, rows[start].direction);
        let end = rows[start..]
            .iter()
            .position(|r| (&r.scheme, r.direction) != key)
            .map_or(rows.len(), |k| start + k);
        let points: Vec<String> = rows[start..end]
            .iter()
            .map(|r| format!("{}:{:.4}", r.delta, r.throughput))
            .collect();
        eprintln!("{} {} throughput: {}", key.0, key.1, points.join(" "));
        start = end;
    }
}

fn execute(plan: &Plan, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = &plan.config;
    let params = &cfg.params;
    let io_err = |source| CliError::Io {
        path: "output".into(),
        source,
    };
    match plan.command {
        Command::SweepBeta => {
            let mut rows = Vec::new();
            for &scheme in &plan.schemes {
                let setup = SimSetup {
                    scheme,
                    pairing: cfg.pairing,
                    fallback: cfg.fallback,
                };
                rows.extend(estimate_success(params, &setup, &cfg.beta_db, cfg.direction)?.rows);
            }
            if matches!(plan.preset, Some(Preset::Fig2 | Preset::Fig3)) {
                let points = analytic_curve(
                    params,
                    &cfg.beta_db,
                    cfg.direction,
                    &QuadratureSpec::default(),
                )?;
                rows.extend(
                    points
                        .iter()
                        .map(|p| SuccessRow::from_analytic("comp2flex", p)),
                );
            }
            summarize_success(&rows);
            write_success_csv(&rows, &meta(plan, &[]), out).map_err(io_err)?;
        }
        Command::ComparePairing => {
            let (greedy, edmonds) =
                sweep_greedy_vs_edmonds(params, cfg.scheme, &cfg.beta_db, cfg.direction)?;
            let rows: Vec<SuccessRow> = greedy.rows.into_iter().chain(edmonds.rows).collect();
            summarize_success(&rows);
            write_success_csv(&rows, &meta(plan, &[]), out).map_err(io_err)?;
        }
        Command::SweepDelta => {
            let mut rows = Vec::new();
            for &scheme in &plan.schemes {
                let setup = SimSetup {
                    scheme,
                    pairing: cfg.pairing,
                    fallback: cfg.fallback,
                };
                rows.extend(estimate_throughput(params, &setup, &plan.deltas, cfg.direction)?.rows);
            }
            summarize_throughput(&rows);
            let deltas = plan
                .deltas
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(",");
            let extra = [
                ("deltas", deltas),
                ("throughput_beta_db", THROUGHPUT_THRESHOLD_DB.to_string()),
                ("formula", THROUGHPUT_FORMULA.to_string()),
            ];
            write_throughput_csv(&rows, &meta(plan, &extra), out).map_err(io_err)?;
        }
        Command::BenchPairing => {
            let rows = bench_pairing(params, &TABLE_DENSITIES, plan.repetitions)?;
            for r in &rows {
                eprintln!(
                    "density {}: {:.0} BSs, greedy {:.3e} s, edmonds {:.3e} s",
                    r.density, r.mean_stations, r.greedy_seconds, r.edmonds_seconds
                );
            }
            let meta = meta(
                plan,
                &[
                    ("repetitions", plan.repetitions.to_string()),
                    ("statistic", "median".into()),
                ],
            );
            write_timing_csv(&rows, &meta, out).map_err(io_err)?;
        }
        Command::Analytic => {
            let points = analytic_curve(
                params,
                &cfg.beta_db,
                cfg.direction,
                &QuadratureSpec::default(),
            )?;
            let rows: Vec<SuccessRow> = points
                .iter()
                .map(|p| SuccessRow::from_analytic("comp2flex", p))
                .collect();
            summarize_success(&rows);
            write_success_csv(&rows, &meta(plan, &[]), out).map_err(io_err)?;
        }
        Command::DumpDeployment => {
            let mut rng = stream(params.seed, plan.drop, Purpose::Deployment);
            let dep = sample_deployment(params.lambda_b, params.window_side, &mut rng)?;
            let interior = dep.interior_mask.iter().filter(|&&b| b).count();
            eprintln!(
                "drop {}: {} BSs, {} interior, {} Delaunay edges",
                plan.drop,
                dep.len(),
                interior,
                dep.edges().len()
            );
            writeln!(
                out,
                "# meta: {}",
                meta(plan, &[("drop", plan.drop.to_string())])
            )
            .map_err(io_err)?;
            dep.write_csv(&mut *out).map_err(io_err)?;
        }
    }
    Ok(())
}

fn run_plan(plan: &Plan, out_path: Option<&PathBuf>) -> Result<(), CliError> {
    // Render into memory first so a failed run leaves no partial file.
    let mut buf = Vec::new();
    execute(plan, &mut buf)?;
    match out_path {
        Some(path) => {
            let to_err = |source| CliError::Io {
                path: path.display().to_string(),
                source,
            };
            let mut file = BufWriter::new(File::create(path).map_err(to_err)?);
            file.write_all(&buf).map_err(to_err)?;
            file.flush().map_err(to_err)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(&buf)
                .and_then(|_| lock.flush())
                .map_err(|source| CliError::Io {
                    path: "stdout".into(),
                    source,
                })?;
        }
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs the experiment and
/// returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = resolve(&args).and_then(|plan| match args.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
            pool.install(|| run_plan(&plan, args.out.as_ref()))
        }
        None => run_plan(&plan, args.out.as_ref()),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
