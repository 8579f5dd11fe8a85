//! Command-line front end: dataset generation, solver runs and benchmark
//! suites over the HTNS/CSV formats in [`crate::io`].
//!
//! One binary, three subcommands (`generate`, `solve`, `bench`). Errors go
//! to standard error as single-line messages prefixed with a stable error
//! code. Exit codes: 0 success (solve: converged), 2 solve hit the
//! iteration cap without converging, 1 any error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hankel::make_plan;
use crate::io::{parse_suite, read_tensor, trace_to_csv, write_tensor};
use crate::metrics::run_trials;
use crate::signals::{gen_dirac_fourier, gen_linear_events, gen_spectral, DiracParams, SampleMask};
use crate::solvers::{self, SolverOptions, Variant};

#[derive(Parser, Debug)]
#[command(name = "cadzow", version, about = "Structured low-rank signal denoising and recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset and print a JSON manifest.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Run a solver on an HTNS tensor file.
    Solve(SolveArgs),
    /// Run a benchmark suite from a key=value config file.
    Bench(BenchArgs),
}

#[derive(Subcommand, Debug)]
enum GenerateKind {
    /// Spectrally sparse signal of Hankel rank `--rank`.
    Spectral {
        /// Extents, `x`-separated (e.g. 4096 or 64x64).
        #[arg(long)]
        dims: String,
        #[arg(long, visible_alias = "r")]
        rank: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Dirac stream: writes `<out>.fourier.htns` and `<out>.time.htns`.
    Dirac {
        #[arg(long, visible_alias = "rank")]
        r: usize,
        /// Odd bandwidth B; N = B time samples.
        #[arg(long)]
        bandwidth: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Output path prefix.
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Seismic-style volume of linear events (time axis first).
    LinearEvents {
        /// Spatial extents, `x`-separated (e.g. 8x8).
        #[arg(long)]
        dims: String,
        /// Time samples per trace.
        #[arg(long)]
        time: usize,
        #[arg(long)]
        events: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Input HTNS tensor file.
    input: PathBuf,
    #[arg(long)]
    variant: String,
    #[arg(long)]
    rank: usize,
    /// Relative-change tolerance, or `none` for a fixed iteration count.
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// HTNS file of 0/1 entries marking observed samples.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Ground truth HTNS file; enables the per-iteration MSE column.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Per-iteration trace CSV path.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(short = 'o', long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Suite config file (key=value blocks; see `io::parse_suite`).
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for trials.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output path prefix for the per-experiment CSV/JSON tables.
    #[arg(short = 'o', long, default_value = "bench")]
    output: PathBuf,
}

/// Entry point for the binary: parses `args` (excluding argv[0]) and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(
        std::iter::once(std::ffi::OsString::from("cadzow")).chain(args.into_iter().map(Into::into)),
    ) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version output is not an error.
            if e.use_stderr() {
                eprintln!("E_ARG: {}", first_line(&e.to_string()));
                return 1;
            }
            print!("{e}");
            return 0;
        }
    };
    let result = match cli.command {
        Command::Generate { kind } => cmd_generate(kind).map(|_| 0),
        Command::Solve(args) => cmd_solve(&args),
        Command::Bench(args) => cmd_bench(&args).map(|_| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}: {}", e.code(), first_line(&e.to_string()));
            1
        }
    }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("").to_string()
}

fn parse_dims(s: &str) -> Result<Vec<usize>> {
    s.split('x')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("invalid extents `{s}`")))
        })
        .collect()
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s: u64 = rand::thread_rng().gen();
        eprintln!("seed: {s}");
        s
    })
}

fn cmd_generate(kind: GenerateKind) -> Result<()> {
    let manifest = match kind {
        GenerateKind::Spectral { dims, rank, seed, output } => {
            let dims = parse_dims(&dims)?;
            let seed = resolve_seed(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (truth, _) = gen_spectral(&dims, rank, &mut rng)?;
            write_tensor(&output, &truth)?;
            serde_json::json!({
                "kind": "spectral",
                "params": { "dims": dims, "rank": rank },
                "seed": seed,
                "paths": [output],
            })
        }
        GenerateKind::Dirac { r, bandwidth, seed, output } => {
            let seed = resolve_seed(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let params = DiracParams::sample(r, bandwidth, &mut rng)?;
            let (fourier, time) = gen_dirac_fourier(&params)?;
            let fourier_path = with_suffix(&output, "fourier.htns");
            let time_path = with_suffix(&output, "time.htns");
            write_tensor(&fourier_path, &fourier)?;
            write_tensor(&time_path, &time)?;
            serde_json::json!({
                "kind": "dirac",
                "params": { "r": r, "bandwidth": bandwidth, "samples": bandwidth },
                "seed": seed,
                "paths": [fourier_path, time_path],
            })
        }
        GenerateKind::LinearEvents { dims, time, events, seed, output } => {
            let spatial = parse_dims(&dims)?;
            let seed = resolve_seed(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (truth, _) = gen_linear_events(&spatial, time, events, &mut rng)?;
            write_tensor(&output, &truth)?;
            serde_json::json!({
                "kind": "linear-events",
                "params": { "spatial_dims": spatial, "time": time, "events": events },
                "seed": seed,
                "paths": [output],
            })
        }
    };
    println!("{}", serde_json::to_string_pretty(&manifest).expect("manifest serializes"));
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let y = read_tensor(&args.input)?;
    let variant: Variant = args.variant.parse()?;
    let tol = match args.tol.as_deref() {
        None => Some(1e-6),
        Some(s) if s.eq_ignore_ascii_case("none") => None,
        Some(s) => Some(
            s.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("invalid tol `{s}`")))?,
        ),
    };
    let mut opts = SolverOptions::new(variant, args.rank).with_tol(tol);
    if let Some(m) = args.max_iter {
        opts = opts.with_max_iter(m);
    }
    if let Some(a) = args.alpha {
        opts = opts.with_alpha(a);
    }
    let mask = match &args.mask {
        None => None,
        Some(p) => Some(load_mask(p, y.dims())?),
    };
    let truth = match &args.truth {
        None => None,
        Some(p) => Some(read_tensor(p)?),
    };
    let plan = make_plan(y.dims(), None)?;
    let run = solvers::run(&y, &plan, &opts, mask.as_ref(), truth.as_ref())?;
    write_tensor(&args.output, &run.z)?;
    if let Some(trace_path) = &args.trace {
        fs::write(trace_path, trace_to_csv(&run))?;
    }
    println!(
        "{} iterations={} converged={} wall_time_seconds={:.6}",
        variant, run.iterations, run.converged, run.wall_time_seconds
    );
    Ok(if run.converged { 0 } else { 2 })
}

fn load_mask(path: &Path, dims: &[usize]) -> Result<SampleMask> {
    let t = read_tensor(path)?;
    if t.dims() != dims {
        return Err(Error::Shape(format!(
            "mask extents {:?} do not match input extents {:?}",
            t.dims(),
            dims
        )));
    }
    Ok(SampleMask::from_tensor(&t))
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    if args.jobs == 0 {
        return Err(Error::InvalidArgument("--jobs must be positive".into()));
    }
    let text = fs::read_to_string(&args.config)?;
    let configs = parse_suite(&text)?;
    let seed = resolve_seed(args.seed);
    for config in &configs {
        let table = run_trials(config, seed, args.jobs)?;
        let csv_path = with_suffix(&args.output, &format!("{}.csv", config.name));
        let json_path = with_suffix(&args.output, &format!("{}.json", config.name));
        fs::write(&csv_path, table.to_csv())?;
        fs::write(&json_path, table.to_json())?;
        println!("experiment {} ({} trials, seed {seed})", config.name, config.trials);
        for &variant in &config.variants {
            let mse = table
                .mean_mse(variant)
                .map(|m| format!("{m:.4e}"))
                .unwrap_or_else(|| "n/a".into());
            let iters = table
                .mean_iterations(variant)
                .map(|m| format!("{m:.1}"))
                .unwrap_or_else(|| "n/a".into());
            let secs = table
                .mean_wall_time(variant)
                .map(|m| format!("{m:.3}"))
                .unwrap_or_else(|| "n/a".into());
            let pos = table
                .positive_portion(variant)
                .map(|p| format!("{p:.2}"))
                .unwrap_or_else(|| "n/a".into());
            println!(
                "  {variant} r={} mean_mse={mse} mean_iterations={iters} mean_seconds={secs} positive_portion={pos}",
                config.rank
            );
        }
    }
    Ok(())
}
