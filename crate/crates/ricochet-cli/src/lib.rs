//! Command-line front end: parses the distribution grammar and flags,
//! dispatches to the estimators and diagnostics, writes CSV tables, run
//! manifests, and SVG time-space diagrams.
//!
//! Exit codes: 0 success, 2 invalid configuration (including a not
//! provably valid distribution pair without `--force`), 3 triple
//! collision, 4 check-suite failure.

mod output;
mod svg;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use ricochet::analysis::{
    check_front_addition, shift_reindex_check, FrontAdditionVerdict, ShiftVerdict,
};
use ricochet::distribution::{validate_pair, DistributionSpec, PairVerdict};
use ricochet::engine::{resolve_truncation, CollisionSink, Engine};
use ricochet::error::SimError;
use ricochet::estimators::{census, theta_hat, vhat_hat, EstimatorError, ThetaEstimate};
use ricochet::kinematics::Tolerance;
use ricochet::verify::{oracle_sweep, random_instance};
use ricochet::ProcessConfig;

use output::{CsvTable, Manifest};

const EXIT_OK: i32 = 0;
const EXIT_CONFIG: i32 = 2;
const EXIT_TRIPLE: i32 = 3;
const EXIT_CHECK_FAILED: i32 = 4;
const EXIT_IO: i32 = 1;

#[derive(Parser)]
#[command(
    name = "ricochet",
    about = "Bullet process simulator: exact collision resolution and Monte Carlo estimators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Velocity distribution (uniform:LO,HI | point:C | exp:RATE |
    /// finite:V1,...,VK[;SIGMA])
    #[arg(long)]
    mu: String,
    /// Delay distribution (same grammar; support must be strictly positive)
    #[arg(long)]
    nu: String,
    /// Master seed (defaults to RICOCHET_SEED, then 0)
    #[arg(long, env = "RICOCHET_SEED", default_value_t = 0)]
    seed: u64,
    /// Accept a distribution pair that is not provably free of triple
    /// collisions
    #[arg(long)]
    force: bool,
    /// Worker threads for replica-parallel runs. Affects wall time only,
    /// never output bytes.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve one realization; write survivors.csv, sn.csv, collisions.csv
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Bullets fired after bullet 0 (n+1 bullets total)
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Skip the collision log (keeps large runs lean)
        #[arg(long)]
        skip_collisions: bool,
    },
    /// Estimate the survival probability of bullet 0 at one velocity or
    /// over a grid; writes theta.csv and prints the critical-velocity
    /// reading for grids
    Theta {
        #[command(flatten)]
        common: Common,
        /// Single velocity for bullet 0
        #[arg(long, conflicts_with = "grid")]
        v: Option<f64>,
        /// Velocity grid LO:HI:STEP (inclusive ends)
        #[arg(long)]
        grid: Option<String>,
        /// Bullets fired after bullet 0 per replica
        #[arg(long)]
        n: usize,
        /// Independent replicas per velocity
        #[arg(long = "N", visible_alias = "replicas")]
        replicas: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Windowed potential-survivor estimate of the critical velocity;
    /// writes vhat_hist.csv
    Vhat {
        #[command(flatten)]
        common: Common,
        /// Bullets fired after bullet 0 (must be even)
        #[arg(long)]
        n: usize,
        /// Histogram bucket width
        #[arg(long, default_value_t = 0.001)]
        bucket: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Survivor census for a finite-support velocity distribution; writes
    /// census.csv
    Census {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the bullets threatening a target; writes threats.csv
    Threats {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// Target bullet index
        #[arg(long)]
        i: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a time-space diagram (time horizontal, distance vertical,
    /// one polyline per bullet truncated at its annihilation)
    Diagram {
        #[command(flatten)]
        common: Common,
        /// Cap on bullets drawn from the sequence
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Time horizon
        #[arg(long)]
        tmax: f64,
        /// Output SVG file
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a conformance sweep; nonzero exit on any failure
    Check {
        /// oracle: engine vs brute-force resolver; lemmas: front-addition
        /// and shift-reindexing laws
        #[arg(long)]
        suite: CheckSuite,
        #[arg(long, default_value_t = 1000)]
        cases: u64,
        #[arg(long, env = "RICOCHET_SEED", default_value_t = 0)]
        seed: u64,
        /// Worker threads; sweep results are order-independent
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CheckSuite {
    Oracle,
    Lemmas,
}

/// Parse argv and execute; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; --help and --version land here too
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

enum CliError {
    Config(String),
    Triple(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Triple(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Triple(_) => EXIT_TRIPLE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::TripleCollision { .. } => CliError::Triple(e.to_string()),
            SimError::Sink(io) => CliError::Io(io),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::Replica { ref source, .. }
                if matches!(source, SimError::TripleCollision { .. }) =>
            {
                CliError::Triple(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

fn parse_spec(s: &str) -> Result<DistributionSpec, CliError> {
    s.parse().map_err(|e| CliError::Config(format!("{e}")))
}

impl Common {
    fn config(&self) -> Result<ProcessConfig, CliError> {
        let mu = parse_spec(&self.mu)?;
        let nu = parse_spec(&self.nu)?;
        if !self.force && validate_pair(&mu, &nu) == PairVerdict::NotProvablyValid {
            return Err(CliError::Config(
                "neither distribution is provably non-atomic; triple collisions are \
                 possible. Pass --force to run anyway."
                    .into(),
            ));
        }
        ProcessConfig::new_unchecked_pair(mu, nu, self.seed)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Run `f` inside a worker pool of the requested size, or on the
    /// default pool. Pool size never changes results, only wall time.
    fn with_pool<R: Send>(&self, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
        match self.workers {
            Some(w) => Ok(rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?
                .install(f)),
            None => Ok(f()),
        }
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Simulate {
            common,
            n,
            out,
            skip_collisions,
        } => simulate(common, n, out, skip_collisions),
        Command::Theta {
            common,
            v,
            grid,
            n,
            replicas,
            out,
        } => theta(common, v, grid, n, replicas, out),
        Command::Vhat {
            common,
            n,
            bucket,
            out,
        } => vhat(common, n, bucket, out),
        Command::Census { common, n, out } => census_cmd(common, n, out),
        Command::Threats { common, n, i, out } => threats(common, n, i, out),
        Command::Diagram {
            common,
            n,
            tmax,
            out,
        } => diagram(common, n, tmax, out),
        Command::Check {
            suite,
            cases,
            seed,
            workers,
        } => check(suite, cases, seed, workers),
    }
}

fn simulate(
    common: Common,
    n: usize,
    out: PathBuf,
    skip_collisions: bool,
) -> Result<i32, CliError> {
    let started = Instant::now();
    let config = common.config()?;
    std::fs::create_dir_all(&out)?;

    let collisions_path = out.join("collisions.csv");
    let sink = if skip_collisions {
        CollisionSink::Count
    } else {
        let mut table = CsvTable::create(&collisions_path)?;
        table.header("back_index,front_index,time,position")?;
        CollisionSink::Csv(Box::new(table.into_writer()))
    };

    let mut engine = Engine::with_sink(sink, Tolerance::exact());
    let mut gen = config.generator(0);
    let mut sn = CsvTable::create(out.join("sn.csv"))?;
    sn.header("k,s_k,is_ps")?;
    for k in 0..=n {
        let bullet = gen.next().expect("generator is infinite");
        let outcome = engine.ingest(bullet)?;
        sn.row(format_args!(
            "{k},{},{}",
            outcome.survivor_count, outcome.is_potential_survivor
        ))?;
    }
    engine.finalize()?;
    sn.finish()?;

    let mut survivors = CsvTable::create(out.join("survivors.csv"))?;
    survivors.header("index,velocity,fire_time")?;
    for b in engine.survivor_bullets() {
        survivors.row(format_args!("{},{},{}", b.index, b.velocity, b.fire_time))?;
    }
    survivors.finish()?;

    let mut outputs = vec!["survivors.csv".into(), "sn.csv".into()];
    if !skip_collisions {
        outputs.push("collisions.csv".into());
    }
    Manifest::new("simulate", &common)
        .arg("n", n)
        .outputs(outputs)
        .counters(n as u64 + 1, engine.confirmed_count(), 0)
        .duration(started.elapsed())
        .write(&out)?;
    println!(
        "simulate: {} bullets, {} collisions, {} survivors -> {}",
        n + 1,
        engine.confirmed_count(),
        engine.survivor_count(),
        out.display()
    );
    Ok(EXIT_OK)
}

fn parse_grid(grid: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = grid.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(CliError::Config(format!(
            "grid must be LO:HI:STEP, got '{grid}'"
        )));
    };
    let parse = |t: &str| {
        t.parse::<f64>()
            .map_err(|e| CliError::Config(format!("bad grid number '{t}': {e}")))
    };
    let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
    if !(step > 0.0 && hi >= lo) {
        return Err(CliError::Config("grid needs hi >= lo and step > 0".into()));
    }
    let mut values = Vec::new();
    let mut i = 0u64;
    loop {
        let v = lo + i as f64 * step;
        if v > hi + step * 1e-9 {
            break;
        }
        values.push(v.min(hi));
        i += 1;
    }
    Ok(values)
}

fn theta(
    common: Common,
    v: Option<f64>,
    grid: Option<String>,
    n: usize,
    replicas: usize,
    out: PathBuf,
) -> Result<i32, CliError> {
    let started = Instant::now();
    let config = common.config()?; // validates pair + delay legality up front
    let (mu, nu) = (config.mu().clone(), config.nu().clone());
    let velocities = match (&v, &grid) {
        (Some(v), None) => vec![*v],
        (None, Some(g)) => parse_grid(g)?,
        (None, None) => {
            return Err(CliError::Config("theta needs --v or --grid".into()));
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    std::fs::create_dir_all(&out)?;

    let estimates: Vec<ThetaEstimate> = common.with_pool(|| {
        velocities
            .iter()
            .map(|&v| theta_hat(v, &mu, &nu, n, replicas, common.seed))
            .collect::<Result<Vec<_>, _>>()
    })??;

    let mut table = CsvTable::create(out.join("theta.csv"))?;
    table.header("v,n,N,successes,theta_hat,ci_lo,ci_hi")?;
    for e in &estimates {
        table.row(format_args!(
            "{},{},{},{},{},{},{}",
            e.v, e.n, e.replicas, e.successes, e.point, e.ci_lo, e.ci_hi
        ))?;
    }
    table.finish()?;

    if grid.is_some() {
        match estimates.iter().find(|e| e.successes >= 1) {
            Some(first) => println!("vc_hat(n={n}, N={replicas}) = {}", first.v),
            None => println!("vc_hat(n={n}, N={replicas}) = inf (no surviving replica)"),
        }
    }

    let bullets = (n as u64 + 1) * replicas as u64 * velocities.len() as u64;
    Manifest::new("theta", &common)
        .arg("n", n)
        .arg("N", replicas)
        .arg_opt("v", v)
        .arg_opt("grid", grid)
        .outputs(vec!["theta.csv".into()])
        .counters(bullets, 0, 0)
        .duration(started.elapsed())
        .write(&out)?;
    Ok(EXIT_OK)
}

fn vhat(common: Common, n: usize, bucket: f64, out: PathBuf) -> Result<i32, CliError> {
    let started = Instant::now();
    let config = common.config()?;
    let est = vhat_hat(config.mu(), config.nu(), n, bucket, common.seed)?;
    std::fs::create_dir_all(&out)?;
    let mut table = CsvTable::create(out.join("vhat_hist.csv"))?;
    table.header("bucket_lo,bucket_hi,count,height")?;
    for b in &est.histogram {
        table.row(format_args!("{},{},{},{}", b.lo, b.hi, b.count, b.height))?;
    }
    table.finish()?;
    match est.max_ps_velocity {
        Some(max) => println!(
            "vhat(n={n}): max potential-survivor velocity in window ({},{}] = {max} ({} potential survivors)",
            n / 2,
            n,
            est.window_ps_count
        ),
        None => println!("vhat(n={n}): no potential survivors in the window"),
    }
    Manifest::new("vhat", &common)
        .arg("n", n)
        .arg("bucket", bucket)
        .outputs(vec!["vhat_hist.csv".into()])
        .counters(n as u64 + 1, 0, 0)
        .duration(started.elapsed())
        .write(&out)?;
    Ok(EXIT_OK)
}

fn census_cmd(common: Common, n: usize, out: PathBuf) -> Result<i32, CliError> {
    let started = Instant::now();
    let config = common.config()?;
    let result = census(config.mu(), config.nu(), n, common.seed)?;
    std::fs::create_dir_all(&out)?;
    let mut table = CsvTable::create(out.join("census.csv"))?;
    table.header("velocity,survivors,potential_survivors")?;
    for bin in &result.bins {
        table.row(format_args!(
            "{},{},{}",
            bin.velocity, bin.survivors, bin.potential_survivors
        ))?;
    }
    table.finish()?;
    println!(
        "census(n={n}): {} survivors, modal velocity {:?} (first survivor there: index {:?})",
        result.total_survivors, result.modal_velocity, result.first_modal_survivor_index
    );
    Manifest::new("census", &common)
        .arg("n", n)
        .outputs(vec!["census.csv".into()])
        .counters(n as u64 + 1, 0, 0)
        .duration(started.elapsed())
        .write(&out)?;
    Ok(EXIT_OK)
}

fn threats(common: Common, n: usize, i: usize, out: PathBuf) -> Result<i32, CliError> {
    let started = Instant::now();
    if i > n {
        return Err(CliError::Config(format!("target {i} exceeds n = {n}")));
    }
    let config = common.config()?;
    let mut gen = config.generator(0);
    let mut engine = Engine::with_sink(CollisionSink::Count, Tolerance::exact());
    let mut threat_indices = Vec::new();
    for _ in 0..=n {
        let bullet = gen.next().expect("generator is infinite");
        let index = bullet.index;
        let outcome = engine.ingest(bullet)?;
        if outcome.insertion_partner == Some(i) {
            threat_indices.push(index);
        }
    }
    std::fs::create_dir_all(&out)?;
    let mut table = CsvTable::create(out.join("threats.csv"))?;
    table.header("target,threat")?;
    for t in &threat_indices {
        table.row(format_args!("{i},{t}"))?;
    }
    table.finish()?;
    println!("threats: bullet {i} is threatened by {} bullets", threat_indices.len());
    Manifest::new("threats", &common)
        .arg("n", n)
        .arg("i", i)
        .outputs(vec!["threats.csv".into()])
        .counters(n as u64 + 1, engine.confirmed_count(), 0)
        .duration(started.elapsed())
        .write(&out)?;
    Ok(EXIT_OK)
}

fn diagram(common: Common, n: usize, tmax: f64, out: PathBuf) -> Result<i32, CliError> {
    let started = Instant::now();
    if !(tmax.is_finite() && tmax > 0.0) {
        return Err(CliError::Config(format!("tmax must be positive, got {tmax}")));
    }
    let config = common.config()?;
    let bullets: Vec<_> = config
        .generator(0)
        .take(n + 1)
        .take_while(|b| b.fire_time <= tmax)
        .collect();
    if bullets.is_empty() {
        return Err(CliError::Config("no bullets fire before tmax".into()));
    }
    let resolution = resolve_truncation(&bullets, Tolerance::exact())?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let drawn = svg::render(&resolution, tmax, &out)?;
    println!(
        "diagram: {} of {} trajectories -> {}",
        drawn,
        bullets.len(),
        out.display()
    );
    let dir = out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    Manifest::new("diagram", &common)
        .arg("n", n)
        .arg("tmax", tmax)
        .outputs(vec![out
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default()])
        .counters(bullets.len() as u64, resolution.collisions.len() as u64, 0)
        .duration(started.elapsed())
        .write(&dir)?;
    Ok(EXIT_OK)
}

fn check(
    suite: CheckSuite,
    cases: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<i32, CliError> {
    let body = || -> Result<i32, CliError> {
        let failures = match suite {
            CheckSuite::Oracle => {
                let failures = oracle_sweep(cases, seed, Tolerance::default());
                println!(
                    "check oracle: {cases} cases, {} failures",
                    failures.len()
                );
                failures
            }
            CheckSuite::Lemmas => {
                let tol = Tolerance::default();
                let mut failures = Vec::new();
                for case in 0..cases {
                    let (bullets, desc) = random_instance(case, seed);
                    match check_front_addition(&bullets, tol) {
                        Ok(FrontAdditionVerdict::Fail { full, suffix }) => failures.push(
                            format!("{desc}: front addition: {full:?} vs {suffix:?}"),
                        ),
                        Err(SimError::TripleCollision { .. }) | Ok(_) => {}
                        Err(e) => failures.push(format!("{desc}: {e}")),
                    }
                    let k = (case as usize) % bullets.len().saturating_sub(1).max(1);
                    match shift_reindex_check(&bullets, k, tol) {
                        Ok(ShiftVerdict::Fail { detail }) => {
                            failures.push(format!("{desc}: shift at {k}: {detail}"))
                        }
                        Err(SimError::TripleCollision { .. }) | Ok(_) => {}
                        Err(e) => failures.push(format!("{desc}: {e}")),
                    }
                }
                println!("check lemmas: {cases} cases, {} failures", failures.len());
                failures
            }
        };
        for f in failures.iter().take(10) {
            eprintln!("  {f}");
        }
        Ok(if failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        })
    };
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(body),
        None => body(),
    }
}
