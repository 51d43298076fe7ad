//! Command-line front end. Each subcommand runs one pipeline stage and
//! communicates with the others only through files in a run directory.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{CommandFactory, Parser, Subcommand};

pub use manifest::{config_hash, RenderEntry, RunManifest, MANIFEST_NAME};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_RENDER: i32 = 3;
pub const EXIT_PAIRING: i32 = 4;
pub const EXIT_NO_FEATURES: i32 = 5;
pub const EXIT_NO_GT: i32 = 6;
pub const EXIT_USAGE: i32 = 64;

/// A failure carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub msg: String,
}

impl CliError {
    pub fn new(code: i32, msg: impl Into<String>) -> CliError {
        CliError { code, msg: msg.into() }
    }

    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::new(EXIT_USAGE, msg)
    }

    /// Maps a library error raised by a stage whose own failures use `code`.
    /// Argument errors are always usage errors.
    pub fn stage(code: i32) -> impl Fn(Error) -> CliError {
        move |e| match e {
            Error::InvalidArgument(_) => CliError::usage(e.to_string()),
            _ => CliError::new(code, e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "symplane", version, about = "Reflective symmetry plane detection for triangle meshes")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Worker threads (default: SYMPLANE_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// key=value file supplying defaults for the subcommand's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Render a mesh from many viewpoints into PNG images and fragment buffers.
    Render(commands::RenderArgs),
    /// Attach per-view patch features to mesh vertices.
    Backproject(commands::BackprojectArgs),
    /// Detect symmetry planes from backprojected features.
    Detect(commands::DetectArgs),
    /// Score detected planes against ground truth.
    Evaluate(commands::EvaluateArgs),
    /// Run the feature invariance ablation grid over a corpus.
    Invariance(commands::InvarianceArgs),
    /// Export a synthetic test shape with its ground truth.
    Synth(commands::SynthArgs),
}

/// Inserts `--key value` pairs from a config file right after the
/// subcommand name, so flags given on the command line win. Keys the
/// subcommand does not know are ignored.
fn splice_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let path = match strs.iter().position(|a| a == "--config") {
        Some(i) => strs.get(i + 1).cloned().ok_or_else(|| CliError::usage("--config needs a path"))?,
        None => match strs.iter().find_map(|a| a.strip_prefix("--config=")) {
            Some(p) => p.to_string(),
            None => return Ok(args),
        },
    };
    let cmd = Cli::command();
    let Some((pos, sub)) = strs
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| cmd.find_subcommand(a).map(|s| (i, s.clone())))
    else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::usage(format!("cannot read config {path}: {e}")))?;
    let mut extra: Vec<OsString> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("{path}:{}: expected key=value", ln + 1)))?;
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(k.as_str())) else {
            log::debug!("config key `{k}` not used by `{}`", sub.get_name());
            continue;
        };
        if arg.get_action().takes_values() {
            extra.push(format!("--{k}").into());
            extra.push(v.into());
        } else if matches!(v, "true" | "1" | "yes") {
            extra.push(format!("--{k}").into());
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, extra);
    Ok(out)
}

fn thread_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("SYMPLANE_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::usage(format!("SYMPLANE_THREADS=`{v}` is not a number")))?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::usage("thread count must be at least 1"));
    }
    Ok(n)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cli.threads)? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Render(a) => commands::render(a),
        Command::Backproject(a) => commands::backproject(a),
        Command::Detect(a) => commands::detect(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Invariance(a) => commands::invariance(a),
        Command::Synth(a) => commands::synth(a),
    })
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match splice_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            return e.code;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::from_default_env().filter_level(level).try_init();
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}
