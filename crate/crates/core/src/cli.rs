//! The `relaybeam` command line.
//!
//! ```text
//! relaybeam {run|sweep|validate} [--config PATH] [--out DIR] [--seed N] [--key value ...]
//! ```
//!
//! Any `--key value` pair that is not one of the flags above is applied as a
//! config override after the file is loaded. Exit codes: 0 success, 1 a failed
//! validation check, 2 a usage or configuration error, 3 a numerical failure.

use std::io::Write;
use std::path::PathBuf;

use chrono::Utc;

use crate::config::ScenarioConfig;
use crate::report::write_outputs;
use crate::simulator::{run_experiment, Sweep, SweepAxis};
use crate::validate::{format_table, run_checks, Fault};
use crate::Error;

pub const THREADS_ENV: &str = "RELAYBEAM_THREADS";

pub const USAGE: &str = "\
usage: relaybeam <command> [options]

commands:
  run        simulate the sweep stored in the config
  sweep      simulate a sweep given by --axis and --grid
  validate   run the self-check suite

options:
  --config PATH          scenario file (key = value lines)
  --out DIR              output directory (default: out)
  --seed N               master seed
  --axis NAME            sweep axis: pt_dbw, snr_db or snapshots
  --grid SPEC            start:stop:step or a comma list
  --inject-fault NAME    validate only: corrupt a stage (projector)
  --KEY VALUE            override any config key, e.g. --trials 50

environment:
  RELAYBEAM_THREADS      worker threads for trials
";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Sweep,
    Validate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub axis: Option<String>,
    pub grid: Option<String>,
    pub fault: Option<String>,
    pub overrides: Vec<(String, String)>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(Error::Numerical { .. }) => 3,
            CliError::Run(Error::Io(_)) => 1,
            CliError::Run(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

pub fn parse_args<I: IntoIterator<Item = String>>(args: I) -> Result<Invocation, CliError> {
    let mut args = args.into_iter();
    let command = match args.next().as_deref() {
        Some("run") => Command::Run,
        Some("sweep") => Command::Sweep,
        Some("validate") => Command::Validate,
        Some(other) => return Err(CliError::Usage(format!("unknown command `{other}`"))),
        None => return Err(CliError::Usage("missing command".into())),
    };
    let mut inv = Invocation {
        command,
        config_path: None,
        out: PathBuf::from("out"),
        seed: None,
        axis: None,
        grid: None,
        fault: None,
        overrides: Vec::new(),
    };
    while let Some(flag) = args.next() {
        let Some(key) = flag.strip_prefix("--") else {
            return Err(CliError::Usage(format!("unexpected argument `{flag}`")));
        };
        let value = args
            .next()
            .ok_or_else(|| CliError::Usage(format!("--{key} needs a value")))?;
        match key {
            "config" => inv.config_path = Some(value.into()),
            "out" => inv.out = value.into(),
            "seed" => {
                let seed = value
                    .parse()
                    .map_err(|_| CliError::Usage(format!("seed: `{value}` is not an unsigned integer")))?;
                inv.seed = Some(seed);
            }
            "axis" => inv.axis = Some(value),
            "grid" => inv.grid = Some(value),
            "inject-fault" => inv.fault = Some(value),
            _ => inv.overrides.push((key.to_owned(), value)),
        }
    }
    Ok(inv)
}

/// Loads the file (or the default scenario) and applies seed and overrides.
pub fn load_config(inv: &Invocation) -> Result<ScenarioConfig, CliError> {
    let mut config = match &inv.config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("config: cannot read {}: {e}", path.display()))
            })?;
            ScenarioConfig::parse(&text)?
        }
        None => ScenarioConfig::default(),
    };
    for (key, value) in &inv.overrides {
        config.set(key, value)?;
    }
    if let Some(seed) = inv.seed {
        config.seed = seed;
    }
    if inv.command == Command::Sweep {
        let axis = match &inv.axis {
            Some(a) => a
                .parse::<SweepAxis>()
                .map_err(|m| CliError::Run(Error::config("sweep_axis", m)))?,
            None => config.sweep.axis,
        };
        let grid = match &inv.grid {
            Some(g) => Sweep::parse_grid(g).map_err(|m| CliError::Run(Error::config("sweep_grid", m)))?,
            None => return Err(CliError::Usage("sweep: --grid is required".into())),
        };
        config.sweep = Sweep::new(axis, grid);
    }
    config.validate()?;
    Ok(config)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}: `{value}` is not a positive integer")))?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("{THREADS_ENV}: {e}")))
}

fn execute(inv: &Invocation, out: &mut dyn Write) -> Result<i32, CliError> {
    let config = load_config(inv)?;
    let io = |e: std::io::Error| CliError::Run(Error::Io(e));
    match inv.command {
        Command::Run | Command::Sweep => {
            if inv.fault.is_some() {
                return Err(CliError::Usage("--inject-fault only applies to validate".into()));
            }
            let started = Utc::now();
            let report = thread_pool()?.install(|| run_experiment(&config, &config.sweep))?;
            let manifest = write_outputs(&report, &inv.out, started)?;
            for path in &manifest.outputs {
                writeln!(out, "wrote {}", path.display()).map_err(io)?;
            }
            Ok(0)
        }
        Command::Validate => {
            let fault = inv
                .fault
                .as_deref()
                .map(str::parse::<Fault>)
                .transpose()
                .map_err(CliError::Usage)?;
            let results = thread_pool()?.install(|| run_checks(&config, fault));
            write!(out, "{}", format_table(&results)).map_err(io)?;
            Ok(if results.iter().all(|r| r.passed) { 0 } else { 1 })
        }
    }
}

/// Runs one invocation, printing results to stdout and errors to stderr.
pub fn run_cli<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let result = parse_args(args).and_then(|inv| execute(&inv, &mut std::io::stdout()));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("relaybeam: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprint!("\n{USAGE}");
            }
            e.exit_code()
        }
    }
}
