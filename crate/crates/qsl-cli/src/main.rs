//! Command-line runner: theory tables, Monte Carlo sweeps, single search
//! traces, 2D boundary missions, synthetic region generation, strategy
//! comparison grids, and the acceptance checks.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsl::{
    dqs_expected_distance, dqs_expected_error, make_synthetic_region, pqs_error_bound,
    run_experiment, run_search, run_verify, ExperimentKind, ExperimentOutput, ExperimentSpec,
    MissionSpec, PosteriorGrid, QslError, RegionShape, RegionSpec, Result, SearchParams,
    SearchStrategy, StepOracle, StrategyKind, VerifySuite,
};

#[derive(Parser)]
#[command(
    name = "qsl",
    about = "Distance-penalized active learning via quantile search",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print closed-form error, distance, and bound tables as CSV.
    Theory(TheoryArgs),
    /// Run a Monte Carlo sweep experiment.
    Sweep(SweepArgs),
    /// Run a single 1D search and dump its trace.
    Search(SearchArgs),
    /// Run a 2D boundary mission from a JSON spec.
    Mission(MissionArgs),
    /// Synthetic region tools.
    #[command(subcommand)]
    Region(RegionCommand),
    /// Compare the best quantile search against the best proactive
    /// learner over a scenario grid.
    Compare(CompareArgs),
    /// Run acceptance check suites; exits nonzero on any failure.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct TheoryArgs {
    /// Comma-separated search parameters.
    #[arg(long, default_value = "2,3,5,10,20", value_delimiter = ',')]
    m_grid: Vec<f64>,
    /// Comma-separated sample counts.
    #[arg(long, default_value = "1,5,10,20,50", value_delimiter = ',')]
    n_grid: Vec<u32>,
    /// Comma-separated flip probabilities.
    #[arg(long, default_value = "0,0.05,0.1,0.2", value_delimiter = ',')]
    p_grid: Vec<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment spec; overrides every other flag.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "sweep_m")]
    kind: String,
    /// Comma-separated strategy names.
    #[arg(long, default_value = "dqs", value_delimiter = ',')]
    strategies: Vec<String>,
    #[arg(long, default_value_t = 100)]
    theta_grid: usize,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Master seed; mandatory when p > 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "2,3,5,10,20", value_delimiter = ',')]
    m_grid: Vec<f64>,
    #[arg(long, default_value = "0,0.25,0.5,0.75,1", value_delimiter = ',')]
    lambda_grid: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    n_samples: usize,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long, default_value_t = 0.9)]
    stop_mass: f64,
    #[arg(long, default_value_t = 10.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    velocity: f64,
    #[arg(long, default_value_t = 40_000.0)]
    strip_length: f64,
    /// CSV output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional JSON summary file.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value = "dqs")]
    algo: String,
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 2.0)]
    m: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long, default_value_t = 0.9)]
    stop_mass: f64,
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    /// Trace CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MissionArgs {
    /// Mission spec JSON file.
    #[arg(long)]
    spec: PathBuf,
    /// Directory for boundary.csv, polyline.csv, and report.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum RegionCommand {
    /// Generate a synthetic region raster.
    Gen(RegionGenArgs),
}

#[derive(Args)]
struct RegionGenArgs {
    /// Shape family: half_plane, smooth_blob, or two_fragment.
    #[arg(long)]
    shape: String,
    #[arg(long, default_value_t = 400)]
    ncols: usize,
    #[arg(long, default_value_t = 200)]
    nrows: usize,
    #[arg(long, default_value_t = 100.0)]
    cell_size: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    boundary_frac: f64,
    #[arg(long, default_value = "0.5,0.5", value_delimiter = ',')]
    center: Vec<f64>,
    #[arg(long, default_value = "0.35,0.3", value_delimiter = ',')]
    radius: Vec<f64>,
    #[arg(long, default_value_t = 0.06)]
    perturb_amp: f64,
    #[arg(long, default_value_t = 3)]
    perturb_order: u32,
    #[arg(long, default_value_t = 0.1)]
    margin_frac: f64,
    #[arg(long, default_value_t = 0.3)]
    base_frac: f64,
    #[arg(long, default_value_t = 0.2)]
    wiggle_amp: f64,
    /// Raster output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// JSON experiment spec; overrides every other flag.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "1,10,30,60", value_delimiter = ',')]
    gamma_grid: Vec<f64>,
    #[arg(long, default_value = "0.5,1,2,4", value_delimiter = ',')]
    velocity_grid: Vec<f64>,
    #[arg(long, default_value = "2,5,10,20,50", value_delimiter = ',')]
    m_grid: Vec<f64>,
    #[arg(long, default_value = "0,0.25,0.5,0.75,1", value_delimiter = ',')]
    lambda_grid: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    theta_grid: usize,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long, default_value_t = 40_000.0)]
    strip_length: f64,
    /// Cell CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sign-change contour CSV output.
    #[arg(long)]
    contour: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite: theory, equivalence, monotonicity, or all.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// JSON report file; stdout summary is always printed.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Theory(args) => theory(args)?,
        Command::Sweep(args) => sweep(args)?,
        Command::Search(args) => search(args)?,
        Command::Mission(args) => mission(args)?,
        Command::Region(RegionCommand::Gen(args)) => region_gen(args)?,
        Command::Compare(args) => compare(args)?,
        Command::Verify(args) => return verify(args),
    }
    Ok(ExitCode::SUCCESS)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn theory(args: TheoryArgs) -> Result<()> {
    let mut buf = Vec::new();
    writeln!(buf, "# qsl-schema v1")?;
    writeln!(buf, "m,n,p,expected_error,expected_distance,error_bound")?;
    for &m in &args.m_grid {
        if !m.is_finite() || m < 2.0 {
            return Err(QslError::Config(format!("m = {m} must be at least 2")));
        }
        for &n in &args.n_grid {
            for &p in &args.p_grid {
                writeln!(
                    buf,
                    "{},{},{},{},{},{}",
                    m,
                    n,
                    p,
                    dqs_expected_error(m, n),
                    dqs_expected_distance(m),
                    pqs_error_bound(m, p, n)
                )?;
            }
        }
    }
    emit(args.out.as_deref(), &buf)
}

fn spec_from_sweep_args(args: &SweepArgs) -> Result<ExperimentSpec> {
    if let Some(path) = &args.spec {
        return ExperimentSpec::from_json(&fs::read_to_string(path)?);
    }
    let kind = match args.kind.as_str() {
        "sweep_m" => ExperimentKind::SweepM,
        "sweep_lambda" => ExperimentKind::SweepLambda,
        "error_curve" => ExperimentKind::ErrorCurve,
        "distance_curve" => ExperimentKind::DistanceCurve,
        other => {
            return Err(QslError::Config(format!(
                "unknown sweep kind {other}; expected sweep_m, sweep_lambda, error_curve, \
                 or distance_curve"
            )))
        }
    };
    let strategies = args
        .strategies
        .iter()
        .map(|s| StrategyKind::parse(s))
        .collect::<Result<Vec<_>>>()?;
    let spec = ExperimentSpec {
        kind,
        strategies,
        theta_grid: args.theta_grid,
        replicates: args.replicates,
        p: args.p,
        seed: args.seed,
        m_grid: args.m_grid.clone(),
        lambda_grid: args.lambda_grid.clone(),
        n_samples: args.n_samples,
        epsilon: args.epsilon,
        delta: args.delta,
        stop_mass: args.stop_mass,
        gamma_s: args.gamma,
        velocity_mps: args.velocity,
        strip_length_m: args.strip_length,
        ..ExperimentSpec::default()
    };
    spec.validate()?;
    Ok(spec)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let spec = spec_from_sweep_args(&args)?;
    let output = run_experiment(&spec)?;
    let table = match output {
        ExperimentOutput::Table(table) => table,
        _ => {
            return Err(QslError::Config(
                "sweep kinds produce tables; use the mission/verify subcommands otherwise".into(),
            ))
        }
    };
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    emit(args.out.as_deref(), &buf)?;
    if let Some(summary) = &args.summary {
        fs::write(summary, serde_json::to_string_pretty(&table)?)?;
    }
    Ok(())
}

fn search(args: SearchArgs) -> Result<()> {
    if args.p > 0.0 && args.seed.is_none() {
        return Err(QslError::Config(
            "noisy searches require an explicit --seed".into(),
        ));
    }
    let strategy = match args.algo.as_str() {
        "bisection" => SearchStrategy::Bisection,
        "dqs" => SearchStrategy::Dqs { m: args.m },
        "pqs" => SearchStrategy::Pqs { m: args.m },
        "tpqs" => SearchStrategy::Tpqs { m: args.m },
        "proactive" => SearchStrategy::Proactive {
            lambda: args.lambda,
        },
        other => return Err(QslError::Config(format!("unknown algorithm {other}"))),
    };
    let params = SearchParams {
        epsilon: args.epsilon,
        delta: args.delta,
        p: args.p,
        p_update: None,
        stop_mass: args.stop_mass,
        max_steps: None,
    };
    let mut oracle = StepOracle::new(args.theta, args.p, args.seed.unwrap_or(0))?;
    let prior = PosteriorGrid::uniform(args.delta)?;
    let trace = run_search(
        &mut oracle,
        strategy,
        &params,
        args.start,
        None,
        Some(prior),
    )?;
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    writeln!(
        buf,
        "# estimate,{},converged,{},distance,{}",
        trace.estimate,
        trace.converged,
        trace.distance()
    )?;
    emit(args.out.as_deref(), &buf)
}

fn mission(args: MissionArgs) -> Result<()> {
    let spec = MissionSpec::load(&args.spec)?;
    let (estimate, report) = spec.run()?;
    fs::create_dir_all(&args.out_dir)?;
    let mut boundary = Vec::new();
    estimate.write_boundary_csv(&mut boundary)?;
    fs::write(args.out_dir.join("boundary.csv"), boundary)?;
    let mut polyline = Vec::new();
    estimate.write_polyline_csv(&mut polyline)?;
    fs::write(args.out_dir.join("polyline.csv"), polyline)?;
    fs::write(
        args.out_dir.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    println!(
        "mission: {} strips, {} samples, {:.1} m traveled, {:.1} s ({:.3} days)",
        report.strips,
        report.total_samples,
        report.total_distance_m,
        report.total_time_s,
        report.total_time_days
    );
    Ok(())
}

fn region_gen(args: RegionGenArgs) -> Result<()> {
    let shape = match args.shape.as_str() {
        "half_plane" => RegionShape::HalfPlane {
            boundary_frac: args.boundary_frac,
        },
        "smooth_blob" => {
            if args.center.len() != 2 || args.radius.len() != 2 {
                return Err(QslError::Config(
                    "smooth_blob needs --center x,y and --radius x,y".into(),
                ));
            }
            RegionShape::SmoothBlob {
                center_frac: (args.center[0], args.center[1]),
                radius_frac: (args.radius[0], args.radius[1]),
                perturb_amp: args.perturb_amp,
                perturb_order: args.perturb_order,
            }
        }
        "two_fragment" => RegionShape::TwoFragment {
            margin_frac: args.margin_frac,
            base_frac: args.base_frac,
            wiggle_amp: args.wiggle_amp,
        },
        other => return Err(QslError::Config(format!("unknown shape {other}"))),
    };
    let region = make_synthetic_region(&RegionSpec {
        shape,
        ncols: args.ncols,
        nrows: args.nrows,
        cell_size: args.cell_size,
        seed: args.seed,
    })?;
    let mut buf = Vec::new();
    region.write(&mut buf)?;
    emit(args.out.as_deref(), &buf)
}

fn compare(args: CompareArgs) -> Result<()> {
    let spec = if let Some(path) = &args.spec {
        ExperimentSpec::from_json(&fs::read_to_string(path)?)
    } else {
        let spec = ExperimentSpec {
            kind: ExperimentKind::CompareGrid,
            theta_grid: args.theta_grid,
            replicates: args.replicates,
            p: args.p,
            seed: args.seed,
            m_grid: args.m_grid.clone(),
            lambda_grid: args.lambda_grid.clone(),
            epsilon: args.epsilon,
            delta: args.delta,
            strip_length_m: args.strip_length,
            gamma_grid: args.gamma_grid.clone(),
            velocity_grid: args.velocity_grid.clone(),
            ..ExperimentSpec::default()
        };
        spec.validate()?;
        Ok(spec)
    }?;
    let output = run_experiment(&spec)?;
    let grid = match output {
        ExperimentOutput::Compare(grid) => grid,
        _ => return Err(QslError::Config("compare expects a compare_grid spec".into())),
    };
    let mut buf = Vec::new();
    grid.write_csv(&mut buf)?;
    emit(args.out.as_deref(), &buf)?;
    if let Some(contour) = &args.contour {
        let mut buf = Vec::new();
        grid.write_contour_csv(&mut buf)?;
        fs::write(contour, buf)?;
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let suite = VerifySuite::parse(&args.suite)?;
    let report = run_verify(suite, args.seed);
    for check in &report.checks {
        println!(
            "{} {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name
        );
    }
    println!(
        "{}: suite {} with master seed {}",
        if report.passed { "PASSED" } else { "FAILED" },
        report.suite,
        report.master_seed
    );
    let json = report.to_json();
    if let Some(path) = &args.out {
        fs::write(path, &json)?;
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
