//! Command-line front end.
//!
//! ```text
//! robustcs bench   (--preset NAME | --config FILE) [overrides] [--output-dir DIR]
//! robustcs recover --matrix A.csv --obs y.csv --k K [--method M | --c C] [--output-dir DIR]
//! robustcs presets
//! ```
//!
//! Config files are TOML with the field names of [`ExperimentConfig`].

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::report::write_trials_csv;
use crate::bench::{
    experiment_presets, find_preset, run_experiment, ExperimentConfig, Method, NoisePoint, PAPER_TRIALS,
};
use crate::error::{Error, Result};
use crate::estimators::IterationControl;
use crate::io::{load_problem, RecoveryOutput};
use crate::noise::NoiseFamily;

#[derive(Debug, Parser)]
#[command(name = "robustcs", version, about = "Robust sparse signal recovery with Huber iterative hard thresholding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte-Carlo experiment and write its reports.
    Bench(BenchArgs),
    /// Recover a sparse signal from a matrix file and an observation file.
    Recover(RecoverArgs),
    /// List the built-in experiment presets.
    Presets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

/// `NxP`, e.g. `512x256`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub p: usize,
}

impl FromStr for Dims {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (n, p) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NxP, got `{s}`"))?;
        let n = n.trim().parse().map_err(|_| format!("bad row count in `{s}`"))?;
        let p = p.trim().parse().map_err(|_| format!("bad column count in `{s}`"))?;
        Ok(Dims { n, p })
    }
}

fn parse_family(s: &str) -> std::result::Result<NoiseFamily, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Built-in preset name (see `robustcs presets`).
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of Monte-Carlo trials per grid point.
    #[arg(long, conflicts_with = "paper_scale")]
    pub trials: Option<usize>,
    /// Use the original study's 2000 trials.
    #[arg(long)]
    pub paper_scale: bool,
    /// Comma-separated SNR values in dB.
    #[arg(long, value_delimiter = ',')]
    pub snr: Vec<f64>,
    /// Noise family: gaussian, laplace or student-t.
    #[arg(long, value_parser = parse_family)]
    pub family: Option<NoiseFamily>,
    /// Comma-separated Student-t degrees of freedom.
    #[arg(long, value_delimiter = ',')]
    pub dof: Vec<f64>,
    /// Compare IHT against Huber IHT with this threshold only.
    #[arg(long, conflicts_with = "methods")]
    pub c: Option<f64>,
    /// Comma-separated methods: iht, hiht-c1, hiht-c2, hiht:<c>.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<Method>,
    /// Sparsity level K.
    #[arg(long)]
    pub k: Option<usize>,
    /// Master seed.
    #[arg(long, env = "ROBUSTCS_SEED")]
    pub seed: Option<u64>,
    /// Dimensions as NxP (measurements x signal length).
    #[arg(long)]
    pub dims: Option<Dims>,
    /// Keep one measurement matrix for all trials.
    #[arg(long)]
    pub fixed_matrix: bool,
    /// Worker threads, 0 = one per core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    pub format: OutputFormat,
    /// Defaults to ./results/<timestamp>-<seed>.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RecoverArgs {
    /// Measurement matrix CSV (header row, n rows of p values).
    #[arg(long)]
    pub matrix: PathBuf,
    /// Observation CSV (header row, n values).
    #[arg(long)]
    pub obs: PathBuf,
    #[arg(long, default_value = "hiht-c1", value_parser = parse_method, conflicts_with = "c")]
    pub method: Method,
    /// Huber threshold; implies a Huber IHT run.
    #[arg(long)]
    pub c: Option<f64>,
    /// Sparsity level K.
    #[arg(long)]
    pub k: usize,
    /// Rescale matrix columns to unit norm after loading.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    /// Defaults to ./results/<timestamp>-recover.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit status. Diagnostics go to stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("robustcs: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench(args) => bench(&args),
        Command::Recover(args) => recover(&args),
        Command::Presets => {
            print!("{}", presets_listing());
            Ok(())
        }
    }
}

pub fn presets_listing() -> String {
    let mut out = String::from("name                  n    p    K  amplitude  trials  grid\n");
    for p in experiment_presets() {
        out.push_str(&format!(
            "{:<20} {:>4} {:>4} {:>3} {:>10} {:>7} {:>5}\n    {}\n",
            p.name,
            p.n,
            p.p,
            p.k,
            p.amplitude,
            p.num_trials,
            p.noise.len(),
            p.description
        ));
    }
    out.push_str(&format!("\nUse --paper-scale for the original {PAPER_TRIALS} trials per grid point.\n"));
    out
}

/// Resolves the experiment from preset or config file plus overrides.
pub fn resolve_experiment(args: &BenchArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), _) => find_preset(name)?,
        (None, Some(path)) => load_config(path)?,
        (None, None) => return Err(Error::Config("either --preset or --config is required".into())),
    };
    if let Some(t) = args.trials {
        cfg.num_trials = t;
    }
    if args.paper_scale {
        cfg.num_trials = PAPER_TRIALS;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(d) = args.dims {
        cfg.n = d.n;
        cfg.p = d.p;
    }
    if args.fixed_matrix {
        cfg.fixed_matrix = true;
    }
    if let Some(c) = args.c {
        cfg.methods = vec![Method::Iht, Method::Hiht { c }];
    }
    if !args.methods.is_empty() {
        cfg.methods = args.methods.clone();
    }
    if args.family.is_some() || !args.dof.is_empty() || !args.snr.is_empty() {
        cfg.noise = override_grid(&cfg.noise, args.family, &args.dof, &args.snr)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn override_grid(
    grid: &[NoisePoint],
    family: Option<NoiseFamily>,
    dofs: &[f64],
    snrs: &[f64],
) -> Result<Vec<NoisePoint>> {
    let mut pairs: Vec<(NoiseFamily, Option<f64>)> = Vec::new();
    match family {
        Some(NoiseFamily::StudentT) => {
            if dofs.is_empty() {
                return Err(Error::Config("--family student-t needs --dof".into()));
            }
            pairs.extend(dofs.iter().map(|&d| (NoiseFamily::StudentT, Some(d))));
        }
        Some(f) => {
            if !dofs.is_empty() {
                return Err(Error::Config(format!("--dof does not apply to {f} noise")));
            }
            pairs.push((f, None));
        }
        None if !dofs.is_empty() => {
            if grid.iter().any(|p| p.family != NoiseFamily::StudentT) {
                return Err(Error::Config("--dof without --family needs a student-t grid".into()));
            }
            pairs.extend(dofs.iter().map(|&d| (NoiseFamily::StudentT, Some(d))));
        }
        None => {
            for p in grid {
                if !pairs.contains(&(p.family, p.dof)) {
                    pairs.push((p.family, p.dof));
                }
            }
        }
    }
    let snr_values: Vec<f64> = if snrs.is_empty() {
        let mut v = Vec::new();
        for p in grid {
            if !v.contains(&p.snr_db) {
                v.push(p.snr_db);
            }
        }
        v
    } else {
        snrs.to_vec()
    };
    Ok(snr_values
        .iter()
        .flat_map(|&snr_db| pairs.iter().map(move |&(family, dof)| NoisePoint { family, dof, snr_db }))
        .collect())
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
}

fn timestamp() -> String {
    chrono::Local::now().format("%Y%m%dT%H%M%S").to_string()
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    started_at: String,
    wall_time_secs: f64,
    threads: usize,
    config: &'a C,
    artifacts: Vec<String>,
}

fn write_manifest<C: Serialize>(
    dir: &Path,
    command: &'static str,
    config: &C,
    started_at: String,
    wall: f64,
    threads: usize,
    artifacts: Vec<String>,
) -> Result<()> {
    let manifest = Manifest {
        tool: "robustcs",
        version: env!("CARGO_PKG_VERSION"),
        command,
        started_at,
        wall_time_secs: wall,
        threads,
        config,
        artifacts,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let cfg = resolve_experiment(args)?;
    let started_at = timestamp();
    let dir = args
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("results").join(format!("{started_at}-{}", cfg.master_seed)));
    fs::create_dir_all(&dir)?;

    let output = run_experiment(&cfg, args.threads)?;
    let mut artifacts = Vec::new();
    if matches!(args.format, OutputFormat::Json | OutputFormat::Both) {
        fs::write(dir.join("report.json"), output.report.to_json()? + "\n")?;
        artifacts.push("report.json".to_string());
    }
    if matches!(args.format, OutputFormat::Csv | OutputFormat::Both) {
        write_trials_csv(&output.trials, fs::File::create(dir.join("trials.csv"))?)?;
        artifacts.push("trials.csv".to_string());
    }
    write_manifest(&dir, "bench", &cfg, started_at, output.wall_time_secs, args.threads, artifacts)?;

    println!("{} ({} trials per point, seed {})", cfg.name, cfg.num_trials, cfg.master_seed);
    for point in &output.report.points {
        let dof = point.dof.map(|d| format!(" dof={d}")).unwrap_or_default();
        for m in &point.methods {
            let mse = m.mse_db.map(|v| format!("{v:8.2}")).unwrap_or_else(|| "    -inf".into());
            println!(
                "{:<10}{:<10} snr={:>5.1} dB  {:<9} PER={:.3}  MSE={} dB",
                point.family.name(),
                dof,
                point.snr_db,
                m.method.to_string(),
                m.per_rate,
                mse
            );
        }
    }
    println!("wrote {}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct RecoverConfig<'a> {
    matrix: &'a Path,
    obs: &'a Path,
    method: String,
    c: Option<f64>,
    normalize: bool,
    control: IterationControl,
}

fn recover(args: &RecoverArgs) -> Result<()> {
    let started_at = timestamp();
    let start = Instant::now();
    let method = match args.c {
        Some(c) => Method::Hiht { c },
        None => args.method,
    };
    let control = IterationControl {
        sparsity: args.k,
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        ..IterationControl::new(args.k)
    };
    control.validate()?;
    let (matrix, y) = load_problem(&args.matrix, &args.obs, args.normalize)?;
    let result = method.run(&matrix, y.view(), &control)?;
    let output = RecoveryOutput::new(method.to_string(), method.threshold(), args.k, &result);

    let dir = args.output_dir.clone().unwrap_or_else(|| PathBuf::from("results").join(format!("{started_at}-recover")));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("recovery.json"), serde_json::to_string_pretty(&output)? + "\n")?;
    let cfg = RecoverConfig {
        matrix: &args.matrix,
        obs: &args.obs,
        method: method.to_string(),
        c: method.threshold(),
        normalize: args.normalize,
        control,
    };
    write_manifest(&dir, "recover", &cfg, started_at, start.elapsed().as_secs_f64(), 1, vec!["recovery.json".into()])?;

    println!(
        "{}: support {:?}, sigma_hat {:.6}, {} iterations ({:?})",
        output.method, output.support, output.sigma_hat, output.iterations, output.stop_reason
    );
    println!("wrote {}", dir.display());
    Ok(())
}
