//! `freqseg`: generate sequence corpora, run the engine on one sequence with
//! state montages, and evaluate predictions over a corpus.

mod commands;
mod render;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::Settings;

/// Exit status classes: 1 usage, 2 I/O or format, 3 numerical consistency.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<freqseg::Error> for CliError {
    fn from(e: freqseg::Error) -> Self {
        use freqseg::Error as E;
        match e {
            E::NumericalConsistency(_) | E::InvalidMotionField { .. } => {
                CliError::Numerical(e.to_string())
            }
            E::Io(_)
            | E::Image(_)
            | E::Json(_)
            | E::BadMagic(_)
            | E::VersionMismatch(_)
            | E::Truncated(_)
            | E::Format(_)
            | E::EmptySource(_) => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "freqseg", version, about = "Fourier-domain motion segmentation and video prediction")]
struct Cli {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base RNG seed for generated data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (a file for `generate`, a directory otherwise).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override any config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a sequence container.
    Generate(GenerateArgs),
    /// Roll the engine out on one sequence and render state montages.
    Run(RunArgs),
    /// Score predictions over a corpus and write JSON and text reports.
    Eval(EvalArgs),
}

#[derive(Args, Debug, Default)]
struct DataArgs {
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    size: Option<usize>,
    /// toroidal or bounce
    #[arg(long)]
    motion: Option<String>,
    /// fourier or bilinear
    #[arg(long)]
    placement: Option<String>,
    /// black, texture or high-texture
    #[arg(long)]
    background: Option<String>,
    #[arg(long)]
    max_speed: Option<f64>,
    /// Directory of glyph rasters (e.g. exported MNIST digits).
    #[arg(long, value_name = "DIR")]
    sprite_dir: Option<PathBuf>,
    /// Directory of background rasters (e.g. STL-10 images).
    #[arg(long, value_name = "DIR")]
    background_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Sequence container to read.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Closed-loop steps after the seed frames.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    seed_frames: Option<usize>,
    /// Disable the phase-difference averaging filter.
    #[arg(long)]
    no_phase_filter: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Sequence container to score; generated from the config when absent.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    seed_frames: Option<usize>,
    /// Feed ground truth as predictions (harness self-check).
    #[arg(long)]
    oracle: bool,
    /// Evaluate with and without the phase filter, side by side.
    #[arg(long)]
    ablate_phase_filter: bool,
    /// Disable the phase-difference averaging filter.
    #[arg(long)]
    no_phase_filter: bool,
    /// Check state invariants after every engine step.
    #[arg(long)]
    check_invariants: bool,
}

fn apply_data(s: &mut Settings, d: &DataArgs) -> Result<(), CliError> {
    let pairs: [(&str, Option<String>); 9] = [
        ("count", d.count.map(|v| v.to_string())),
        ("frames", d.frames.map(|v| v.to_string())),
        ("size", d.size.map(|v| v.to_string())),
        ("motion", d.motion.clone()),
        ("placement", d.placement.clone()),
        ("background", d.background.clone()),
        ("max_speed", d.max_speed.map(|v| v.to_string())),
        ("sprite_dir", d.sprite_dir.as_ref().map(|p| p.display().to_string())),
        ("background_dir", d.background_dir.as_ref().map(|p| p.display().to_string())),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            s.set(k, &v)?;
        }
    }
    Ok(())
}

fn settings_for(cli: &Cli) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    if let Some(path) = &cli.config {
        s.apply_file(path)?;
    }
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        s.set(k, v)?;
    }
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    match &cli.command {
        Command::Generate(a) => apply_data(&mut s, &a.data)?,
        Command::Run(a) => {
            if let Some(h) = a.horizon {
                s.predict_frames = h;
            }
            if let Some(n) = a.seed_frames {
                s.seed_frames = n;
            }
            if a.no_phase_filter {
                s.enable_phase_filter = false;
            }
        }
        Command::Eval(a) => {
            apply_data(&mut s, &a.data)?;
            if let Some(h) = a.horizon {
                s.predict_frames = h;
            }
            if let Some(n) = a.seed_frames {
                s.seed_frames = n;
            }
            if a.no_phase_filter {
                s.enable_phase_filter = false;
            }
            if a.check_invariants {
                s.check_invariants = true;
            }
        }
    }
    Ok(s)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("FREQSEG_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("FREQSEG_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = settings_for(&cli)?;
    let out = cli
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("--out is required".into()))?;
    let pool = thread_pool()?;
    pool.install(|| match &cli.command {
        Command::Generate(_) => commands::generate(&settings, &out),
        Command::Run(a) => commands::run(&settings, &a.input, a.index, &out),
        Command::Eval(a) => commands::eval(
            &settings,
            a.input.as_deref(),
            &out,
            commands::EvalMode {
                oracle: a.oracle,
                ablate_phase_filter: a.ablate_phase_filter,
            },
        ),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("freqseg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
