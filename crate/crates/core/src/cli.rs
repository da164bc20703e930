//! `stablevar` command line: `simulate`, `analyze`, `estimate`, `verify`.
//!
//! Exit codes: 0 success, 1 verification failed, 2 usage error or unwritable
//! output, 3 unreadable or unparsable input, 4 infeasible configuration,
//! 5 unknown scenario.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::csv_io::{read_series, write_series, CsvError};
use crate::error::Error;
use crate::estimator::{
    block_split, block_statistics, estimate, fixed_c_slice, slice_local_minima, BlockedSeries,
    EstimationResult, EstimatorConfig, GridSpec, M_MIN,
};
use crate::path_sim::{grid_steps, simulate_sde_from, DriftSpec, DEFAULT_FINE_MULTIPLIER};
use crate::rng::RandomStream;
use crate::stable_law::StableParams;
use crate::verify::{run_scenario, Scenario, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_OUTPUT: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_SCENARIO: i32 = 5;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "STABLEVAR_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "stablevar",
    version,
    about = "p-variation statistics and stability-index estimation for SDEs driven by stable Lévy noise",
    after_help = "Set STABLEVAR_THREADS to cap the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate m blocks of dX = cos(X) dt + dL (or dX = dL) and write them as one series.
    Simulate(SimulateArgs),
    /// Print the per-block p-variation of a series.
    Analyze(AnalyzeArgs),
    /// Fit (C, alpha) by minimizing the KS distance to the 1/2-stable reference.
    Estimate(EstimateArgs),
    /// Run a convergence scenario and report the two-sample KS test.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftKind {
    Zero,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    Levels,
    Increments,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Stability index in (0, 2].
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    /// Scale C > 0.
    #[arg(long, default_value_t = 6.35)]
    pub scale: f64,
    /// Skewness in [-1, 1].
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Observations per unit time.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Number of blocks.
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    /// Time span of one block.
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = DriftKind::Cos)]
    pub drift: DriftKind,
    /// Euler steps per observation step.
    #[arg(long, default_value_t = DEFAULT_FINE_MULTIPLIER)]
    pub fine_multiplier: usize,
    /// Initial value.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    /// Write levels (default) or increments.
    #[arg(long, value_enum, default_value_t = InputMode::Levels)]
    pub mode: InputMode,
    /// Output file; standard output if omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Points per block; taken from the input header when omitted, else 200.
    #[arg(long)]
    pub n: Option<usize>,
    /// Interpret values as levels or increments; taken from the header when omitted.
    #[arg(long, value_enum)]
    pub mode: Option<InputMode>,
    /// Subtract each block's mean increment.
    #[arg(long)]
    pub demean: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Power of the variation.
    #[arg(long, default_value_t = 1.5)]
    pub p: f64,
    /// Output file; standard output if omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.8)]
    pub p_min: f64,
    #[arg(long, default_value_t = 3.6)]
    pub p_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub p_step: f64,
    #[arg(long, default_value_t = 0.5)]
    pub c_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub c_max: f64,
    #[arg(long, default_value_t = 0.25)]
    pub c_step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also tabulate p -> D(C, p) at this fixed C.
    #[arg(long)]
    pub slice_c: Option<f64>,
    /// Skip the Nelder–Mead refinement.
    #[arg(long)]
    pub no_refine: bool,
    /// Also write a gnuplot script for the surface and slices.
    #[arg(long)]
    pub gnuplot: bool,
    /// Output directory; only the summary is printed if omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// thm1-sub, thm1-centered, thm3-lipschitz or cor-sde.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub m: usize,
    /// Euler steps per observation step (cor-sde only).
    #[arg(long, default_value_t = DEFAULT_FINE_MULTIPLIER)]
    pub fine_multiplier: usize,
}

/// Everything that determines a simulated series; stored as the JSON header
/// of the files `simulate` writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub scale: f64,
    pub beta: f64,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub seed: u64,
    pub drift: DriftKind,
    pub fine_multiplier: usize,
    pub x0: f64,
    pub mode: InputMode,
}

impl From<&SimulateArgs> for RunConfig {
    fn from(a: &SimulateArgs) -> Self {
        Self {
            alpha: a.alpha,
            scale: a.scale,
            beta: a.beta,
            n: a.n,
            m: a.m,
            horizon: a.horizon,
            seed: a.seed,
            drift: a.drift,
            fine_multiplier: a.fine_multiplier,
            x0: a.x0,
            mode: a.mode,
        }
    }
}

impl RunConfig {
    /// Increments per block.
    pub fn block_len(&self) -> usize {
        grid_steps(self.n, self.horizon)
    }
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn output(path: &Path, e: io::Error) -> Self {
        Self::new(EXIT_OUTPUT, format!("cannot write {}: {e}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SeriesTooShort { .. } => EXIT_INPUT,
            _ => EXIT_INFEASIBLE,
        };
        Self::new(code, e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Levels of `m` consecutive SDE blocks. Block `i` uses stream `i` and starts
/// where block `i - 1` ended, so the output is one continuous path.
pub fn simulate_series(cfg: &RunConfig) -> crate::Result<Vec<f64>> {
    let params = StableParams::new(cfg.alpha, cfg.scale, cfg.beta)?;
    if cfg.m == 0 || cfg.fine_multiplier == 0 {
        return Err(Error::InvalidArgument(
            "m and the fine multiplier must be positive".into(),
        ));
    }
    let drift = match cfg.drift {
        DriftKind::Zero => DriftSpec::Zero,
        DriftKind::Cos => DriftSpec::Cosine,
    };
    let mut levels = vec![cfg.x0];
    for i in 0..cfg.m {
        let start = *levels.last().unwrap();
        let block = simulate_sde_from(
            i as f64 * cfg.horizon,
            start,
            &drift,
            &params,
            cfg.n * cfg.fine_multiplier,
            cfg.n,
            cfg.horizon,
            &RandomStream::new(cfg.seed, i as u64),
        )?;
        levels.extend_from_slice(&block.values()[1..]);
    }
    Ok(levels)
}

fn create_output(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::output(path, e))
}

fn with_output<F>(path: Option<&Path>, write: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let mut out = create_output(p)?;
            write(&mut out)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::output(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
                .map_err(|e| CliError::new(EXIT_OUTPUT, format!("cannot write output: {e}")))
        }
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let cfg = RunConfig::from(args);
    let levels = simulate_series(&cfg)?;
    let values: Vec<f64> = match cfg.mode {
        InputMode::Levels => levels,
        InputMode::Increments => levels.windows(2).map(|w| w[1] - w[0]).collect(),
    };
    with_output(args.output.as_deref(), |out| {
        write_series(out, &cfg, &values)
    })
}

fn load_blocks(args: &SeriesArgs) -> CliResult<BlockedSeries> {
    let file = File::open(&args.input).map_err(|e| {
        CliError::new(
            EXIT_INPUT,
            format!("cannot open {}: {e}", args.input.display()),
        )
    })?;
    let series = read_series(BufReader::new(file)).map_err(|e| {
        let msg = match &e {
            CsvError::Empty => format!("{}: input contains no values", args.input.display()),
            other => format!("{}: {other}", args.input.display()),
        };
        CliError::new(EXIT_INPUT, msg)
    })?;
    let header: Option<RunConfig> = series.config().and_then(|r| r.ok());
    let n = args
        .n
        .or(header.as_ref().map(RunConfig::block_len))
        .unwrap_or(200);
    let mode = args
        .mode
        .or(header.as_ref().map(|h| h.mode))
        .unwrap_or(InputMode::Levels);
    let blocked = match mode {
        InputMode::Levels => BlockedSeries::from_levels(&series.values, n)?,
        InputMode::Increments => block_split(&series.values, n)?,
    };
    Ok(if args.demean {
        blocked.demeaned()
    } else {
        blocked
    })
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let blocked = load_blocks(&args.series)?;
    let stats = block_statistics(&blocked, args.p)?;
    with_output(args.output.as_deref(), |out| {
        writeln!(out, "block,V")?;
        for (i, v) in stats.iter().enumerate() {
            writeln!(out, "{i},{v}")?;
        }
        Ok(())
    })
}

fn estimator_config(args: &EstimateArgs) -> EstimatorConfig {
    let g = &args.grid;
    EstimatorConfig {
        c_grid: GridSpec::new(g.c_min, g.c_max, g.c_step),
        p_grid: GridSpec::new(g.p_min, g.p_max, g.p_step),
        refine: !args.no_refine,
        // demeaning happens while loading
        demean: false,
        m_min: M_MIN,
    }
}

const GNUPLOT_SCRIPT: &str = r#"set datafile separator ","
set key autotitle columnhead
set xlabel "C"
set ylabel "p"
set zlabel "D"
set term pngcairo size 900,700
set output "surface.png"
splot "surface.csv" using 1:2:3 with points pointtype 7 pointsize 0.3 palette notitle
set output "slice_p.png"
set xlabel "p"
set ylabel "D"
plot "slice_p.csv" using 1:3 with lines title "min over C"
"#;

fn write_estimate_outputs(
    dir: &Path,
    args: &EstimateArgs,
    result: &EstimationResult,
    slice: Option<&str>,
) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
    let write_file = |name: &str, f: &dyn Fn(&mut dyn Write) -> io::Result<()>| -> CliResult<()> {
        let path = dir.join(name);
        let mut out = create_output(&path)?;
        f(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| CliError::output(&path, e))
    };
    if let Some(surface) = &result.surface {
        write_file("surface.csv", &|out| surface.write_csv(out))?;
    }
    write_file("result.json", &|out| {
        let mut record = serde_json::to_value(result).map_err(io::Error::other)?;
        if let Some(s) = &result.surface {
            record["local_minima"] =
                serde_json::to_value(&s.local_minima).map_err(io::Error::other)?;
            record["tie_count"] = s.tie_count.into();
        }
        serde_json::to_writer_pretty(&mut *out, &record).map_err(io::Error::other)?;
        writeln!(out)
    })?;
    write_file("slice_p.csv", &|out| {
        writeln!(out, "p,C,D")?;
        for pt in &result.per_p_best {
            writeln!(out, "{},{},{}", pt.p, pt.c, pt.d)?;
        }
        Ok(())
    })?;
    if let Some(text) = slice {
        write_file("slice_c.csv", &|out| out.write_all(text.as_bytes()))?;
    }
    if args.gnuplot {
        let mut script = GNUPLOT_SCRIPT.to_string();
        if slice.is_some() {
            script.push_str("set output \"slice_c.png\"\nplot \"slice_c.csv\" using 2:3 with linespoints title \"fixed C\"\n");
        }
        write_file("plot.gp", &|out| out.write_all(script.as_bytes()))?;
    }
    Ok(())
}

pub fn cmd_estimate(args: &EstimateArgs) -> CliResult<EstimationResult> {
    let blocked = load_blocks(&args.series)?;
    let config = estimator_config(args);
    let result = estimate(&blocked, &config)?;

    let slice = match args.slice_c {
        Some(c) => {
            let points = fixed_c_slice(&blocked, c, &config.p_grid.values()?)?;
            let minima = slice_local_minima(&points);
            let mut text = String::from("C,p,D,local_min\n");
            for pt in &points {
                let flag = minima.iter().any(|m| m.p == pt.p) as u8;
                text.push_str(&format!("{},{},{},{flag}\n", pt.c, pt.p, pt.d));
            }
            Some(text)
        }
        None => None,
    };

    if let Some(dir) = &args.output {
        write_estimate_outputs(dir, args, &result, slice.as_deref())?;
    }
    let b = result.boundary;
    println!(
        "alpha*={:.4} C*={:.4} p*={:.4} D_min={:.4} m={} n={}{}",
        result.alpha_star,
        result.c_star,
        result.p_star,
        result.d_min,
        result.m,
        result.n,
        if b.any() { " (on search boundary)" } else { "" }
    );
    if args.output.is_none() {
        if let Some(text) = &slice {
            print!("{text}");
        }
    }
    Ok(result)
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<bool> {
    let scenario: Scenario = args.scenario.parse().map_err(|_| {
        CliError::new(
            EXIT_SCENARIO,
            format!("unknown scenario {:?}", args.scenario),
        )
    })?;
    let cfg = ScenarioConfig {
        seed: args.seed,
        n: args.n,
        m: args.m,
        fine_multiplier: args.fine_multiplier,
    };
    let report = run_scenario(scenario, &cfg)?;
    println!("{report}");
    Ok(report.passed)
}

/// Installs the global thread pool if `STABLEVAR_THREADS` is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            CliError::new(
                EXIT_OUTPUT,
                format!("{THREADS_ENV} must be a positive integer, got {value:?}"),
            )
        })?;
    // a pool may already exist when embedded; keep it
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_OUTPUT } else { EXIT_OK };
        }
    };
    let outcome = configure_threads().and_then(|_| match &cli.command {
        Command::Simulate(a) => cmd_simulate(a).map(|_| EXIT_OK),
        Command::Analyze(a) => cmd_analyze(a).map(|_| EXIT_OK),
        Command::Estimate(a) => cmd_estimate(a).map(|_| EXIT_OK),
        Command::Verify(a) => cmd_verify(a).map(|ok| if ok { EXIT_OK } else { EXIT_FAILED }),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("stablevar: {}", e.message);
            e.code
        }
    }
}
