use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use peakforge::constants::{self, reference_dimensions, table_to_csv, table_to_json};
use peakforge::verify::Suite;
use peakforge::{
    optimize_peaks, solve_ground_state, Config, Dimensions, EnergyConstants, ModelSpec,
    OptimizerConfig,
};

/// Ground states, dimensional constants and peak-location optimization for
/// `-ΔU + U = U^{p-1}`, `p = 2(n+m)/(n+m-2)`.
///
/// Tolerance overrides are read from PEAKFORGE_ODE_RTOL, PEAKFORGE_ODE_ATOL,
/// PEAKFORGE_BISECT_TOL and PEAKFORGE_RMAX; command-line flags take
/// precedence. A run manifest is written next to `--out` as
/// `<out>.manifest.json`, or to stderr when writing to stdout.
#[derive(Parser, Debug)]
#[command(name = "peakforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Shoot for the ground state and write the profile as CSV.
    GroundState(GroundStateArgs),
    /// Compute term1, term2, beta, alpha, gamma and m(E) for (m, n) rows.
    BetaTable(BetaTableArgs),
    /// Run a named self-check suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Maximize the reduced energy of k0 peaks on a model space.
    Optimize(OptimizeArgs),
}

#[derive(Args, Debug, Serialize)]
struct GroundStateArgs {
    /// Base dimension.
    #[arg(long)]
    n: usize,
    /// Fiber dimension.
    #[arg(long)]
    m: usize,
    /// Bisection tolerance on the shooting amplitude.
    #[arg(long)]
    tol: Option<f64>,
    /// Outer radius of the shooting interval.
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
struct BetaTableArgs {
    /// Rows as `m,n;m,n;...` (default: the 20 reference rows, n + m <= 9).
    #[arg(long)]
    rows: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Print CSV values at full precision instead of 5 significant digits.
    #[arg(long)]
    full_precision: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SuiteArg {
    Table1,
    Identities,
    Expansion,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: SuiteArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct OptimizeArgs {
    /// Model description, e.g. {"model":"sphere","n":3,"R":1.0}.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    k0: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    rho: f64,
    /// Base dimension; must match the model.
    #[arg(long)]
    n: usize,
    /// Fiber dimension.
    #[arg(long)]
    m: usize,
    /// Optimizer settings {starts, max_iters, step_init, step_min, seed}.
    #[arg(long)]
    optimizer: Option<PathBuf>,
    /// Overrides the optimizer seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Input(anyhow::Error),
    Compute(anyhow::Error),
    Checks,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Compute(_) => 3,
            Failure::Checks => 1,
        }
    }
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn compute<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Compute(e.into())
}

const ENV_VARS: [&str; 4] = [
    "PEAKFORGE_ODE_RTOL",
    "PEAKFORGE_ODE_ATOL",
    "PEAKFORGE_BISECT_TOL",
    "PEAKFORGE_RMAX",
];

#[derive(Serialize)]
struct Tolerances {
    ode_rel_tol: f64,
    ode_abs_tol: f64,
    bisect_tol: f64,
    r_max: f64,
    env_overrides: Vec<(String, String)>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    parameters: &'a Command,
    tolerances: Tolerances,
    tool_version: &'static str,
    wall_time_seconds: f64,
}

fn shooting_config(tol: Option<f64>, rmax: Option<f64>) -> Result<(Config, Tolerances), Failure> {
    let mut cfg = Config::default();
    let mut seen = Vec::new();
    for var in ENV_VARS {
        let Ok(raw) = std::env::var(var) else { continue };
        let value: f64 = raw
            .trim()
            .parse()
            .map_err(|_| input(anyhow!("{var}={raw} is not a number")))?;
        match var {
            "PEAKFORGE_ODE_RTOL" => cfg.ode_rel_tol = value,
            "PEAKFORGE_ODE_ATOL" => cfg.ode_abs_tol = value,
            "PEAKFORGE_BISECT_TOL" => cfg.bisect_tol = value,
            _ => cfg.r_max = value,
        }
        seen.push((var.to_string(), raw));
    }
    if let Some(t) = tol {
        cfg.bisect_tol = t;
    }
    if let Some(r) = rmax {
        cfg.r_max = r;
    }
    cfg.validate().map_err(input)?;
    let tolerances = Tolerances {
        ode_rel_tol: cfg.ode_rel_tol,
        ode_abs_tol: cfg.ode_abs_tol,
        bisect_tol: cfg.bisect_tol,
        r_max: cfg.r_max,
        env_overrides: seen,
    };
    Ok((cfg, tolerances))
}

fn emit(out: Option<&Path>, body: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, body)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(input),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body).and_then(|_| stdout.flush()).map_err(compute)
        }
    }
}

fn write_manifest(out: Option<&Path>, manifest: &RunManifest) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(manifest).map_err(compute)? + "\n";
    match out {
        Some(path) => {
            let mut name = path.as_os_str().to_owned();
            name.push(".manifest.json");
            fs::write(&name, text)
                .with_context(|| format!("writing {}", PathBuf::from(&name).display()))
                .map_err(input)
        }
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn parse_rows(spec: &str) -> anyhow::Result<Vec<(usize, usize)>> {
    spec.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (m, n) = pair
                .split_once(',')
                .ok_or_else(|| anyhow!("row '{pair}' is not of the form m,n"))?;
            Ok((
                m.trim().parse().with_context(|| format!("bad m in '{pair}'"))?,
                n.trim().parse().with_context(|| format!("bad n in '{pair}'"))?,
            ))
        })
        .collect::<anyhow::Result<Vec<_>>>()
        .and_then(|rows| {
            if rows.is_empty() {
                Err(anyhow!("no rows given"))
            } else {
                Ok(rows)
            }
        })
}

fn ground_state(args: &GroundStateArgs) -> Result<(Vec<u8>, Tolerances), Failure> {
    let dims = Dimensions::new(args.n, args.m).map_err(input)?;
    let (cfg, tol) = shooting_config(args.tol, args.rmax)?;
    if !dims.in_reference_range() {
        eprintln!("warning: n + m = {} lies outside the reference range n + m <= 9", dims.total());
    }
    let profile = solve_ground_state(&dims, &cfg).map_err(compute)?;
    let mut body = Vec::new();
    profile.write_csv(&mut body).map_err(compute)?;
    Ok((body, tol))
}

fn beta_table(args: &BetaTableArgs) -> Result<(Vec<u8>, Tolerances), Failure> {
    let rows = match &args.rows {
        Some(spec) => parse_rows(spec).map_err(input)?,
        None => reference_dimensions(),
    };
    let (cfg, tol) = shooting_config(None, None)?;
    let table = constants::beta_table(&rows, &cfg);
    for entry in &table {
        if let Err(e) = &entry.result {
            eprintln!("row m={}, n={} failed: {e}", entry.m, entry.n);
        }
    }
    if table.iter().all(|e| e.result.is_err()) {
        return Err(compute(anyhow!("every row failed")));
    }
    let body = match args.format {
        Format::Csv => table_to_csv(&table, args.full_precision),
        Format::Json => table_to_json(&table).map_err(compute)? + "\n",
    };
    Ok((body.into_bytes(), tol))
}

fn verify(args: &VerifyArgs) -> Result<(Vec<u8>, Tolerances, bool), Failure> {
    let (cfg, tol) = shooting_config(None, None)?;
    let suite = match args.suite {
        SuiteArg::Table1 => Suite::Table1,
        SuiteArg::Identities => Suite::Identities,
        SuiteArg::Expansion => Suite::Expansion,
    };
    let report = suite.run(&cfg);
    for c in &report.checks {
        eprintln!(
            "{} {}: {:.3e} (tolerance {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance
        );
    }
    let body = serde_json::to_string_pretty(&report).map_err(compute)? + "\n";
    Ok((body.into_bytes(), tol, report.passed))
}

fn optimize(args: &OptimizeArgs) -> Result<(Vec<u8>, Tolerances), Failure> {
    if !(args.eps > 0.0) || !args.eps.is_finite() {
        return Err(input(anyhow!("--eps must be positive, got {}", args.eps)));
    }
    if !(args.rho > 0.0) {
        return Err(input(anyhow!("--rho must be positive, got {}", args.rho)));
    }
    if args.k0 == 0 {
        return Err(input(anyhow!("--k0 must be at least 1")));
    }
    let text = fs::read_to_string(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))
        .map_err(input)?;
    let model = ModelSpec::from_json(&text)
        .and_then(|s| s.build::<f64>())
        .map_err(input)?;
    if model.dim() != args.n {
        return Err(input(anyhow!(
            "model dimension {} does not match --n {}",
            model.dim(),
            args.n
        )));
    }
    let mut opt = match &args.optimizer {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(input)?;
            serde_json::from_str::<OptimizerConfig>(&text).map_err(input)?
        }
        None => OptimizerConfig::default(),
    };
    if let Some(seed) = args.seed {
        opt.seed = seed;
    }
    let dims = Dimensions::new(args.n, args.m).map_err(input)?;
    let (cfg, tol) = shooting_config(None, None)?;
    let (profile, c) = constants::constants_for(&dims, &cfg).map_err(compute)?;
    let center = model.reference_point();
    let result = optimize_peaks(
        &model,
        &EnergyConstants::from(&c),
        &profile,
        args.k0,
        args.eps,
        args.rho,
        &center,
        &opt,
    )
    .map_err(|e| match e {
        peakforge::Error::Domain(_) | peakforge::Error::Config(_) => input(e),
        other => compute(other),
    })?;
    for w in &result.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    #[derive(Serialize)]
    struct Output<'a> {
        #[serde(flatten)]
        record: peakforge::landscape::OptimizationRecord,
        seed: u64,
        optimizer: &'a OptimizerConfig,
    }
    let body = serde_json::to_string_pretty(&Output {
        record: result.record(),
        seed: opt.seed,
        optimizer: &opt,
    })
    .map_err(compute)?
        + "\n";
    Ok((body.into_bytes(), tol))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let start = Instant::now();
    let (name, out, outcome) = match &cli.command {
        Command::GroundState(a) => ("ground-state", a.out.as_deref(), ground_state(a).map(|(b, t)| (b, t, true))),
        Command::BetaTable(a) => ("beta-table", a.out.as_deref(), beta_table(a).map(|(b, t)| (b, t, true))),
        Command::Verify(a) => ("verify", a.out.as_deref(), verify(a)),
        Command::Optimize(a) => ("optimize", a.out.as_deref(), optimize(a).map(|(b, t)| (b, t, true))),
    };
    let (body, tolerances, passed) = outcome?;
    emit(out, &body)?;
    write_manifest(
        out,
        &RunManifest {
            command: name,
            parameters: &cli.command,
            tolerances,
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_time_seconds: start.elapsed().as_secs_f64(),
        },
    )?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(e) | Failure::Compute(e) => eprintln!("error: {e:#}"),
                Failure::Checks => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
