//! Command-line front end: parameter sweeps, optimisation scans and oracle
//! experiments, written as CSV (with a `#` provenance header) or JSON.

pub mod commands;
pub mod config;
pub mod sweep;
pub mod table;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use config::{names, parse_assignment, parse_config, ConfigError, Kind, KeySpec, Settings};
use sweep::{grid, SweepAxis, SweepError};
use table::{render_csv, render_json, Cell, Header, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("--set expects key=value (got {0:?})")]
    Override(String),
    #[error("invalid value for `{key}`: {value:?}")]
    Reserved { key: &'static str, value: String },
    #[error("grid point {index}: {message}")]
    Point { index: usize, message: String },
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "telesense", version, about = "Sensitivity sweeps, optimisation scans and oracle experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Key-value configuration file (`key = value`, `#` comments).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Sweep axis `name:min:max:points:log|lin`; repeatable.
    #[arg(long = "sweep", value_name = "AXIS", global = true)]
    pub sweeps: Vec<String>,
    #[arg(long, env = "ZENO_SEED", global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Worker threads (0: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// delta omega from the closed form, the channel pipeline and Monte-Carlo.
    Sensitivity {
        /// Floor the repetition count N = T L / (t M) to an integer.
        #[arg(long)]
        floor_repetitions: bool,
    },
    /// Regime optima, break-even scan, Ramsey ratios and the high-frequency contour.
    Optimize,
    /// Environment-trajectory envelopes against the quadrature oracle.
    Env,
    /// SWAP transport fidelity and phase logs.
    Swap,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sensitivity { .. } => "sensitivity",
            Command::Optimize => "optimize",
            Command::Env => "env",
            Command::Swap => "swap",
        }
    }

    pub fn keys(&self) -> &'static [KeySpec] {
        match self {
            Command::Sensitivity { .. } => commands::sensitivity::KEYS,
            Command::Optimize => commands::optimize::KEYS,
            Command::Env => commands::env::KEYS,
            Command::Swap => commands::swap::KEYS,
        }
    }
}

/// Fully resolved run: the RunConfig of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub settings: Settings,
    pub sweeps: Vec<SweepAxis>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: usize,
}

const RESERVED: [&str; 4] = ["seed", "out", "format", "jobs"];

impl RunConfig {
    /// Precedence: flags (and ZENO_SEED) over the config file over defaults.
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let mut file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
                    path: path.clone(),
                    source,
                })?;
                parse_config(&text)?
            }
            None => Default::default(),
        };
        let reserved: BTreeMap<&str, String> = RESERVED
            .iter()
            .filter_map(|&k| file.values.remove(k).map(|v| (k, v)))
            .collect();
        let mut overrides = BTreeMap::new();
        for o in &cli.overrides {
            let (k, v) = parse_assignment(o)
                .filter(|(k, _)| !k.is_empty())
                .ok_or_else(|| CliError::Override(o.clone()))?;
            overrides.insert(k.to_string(), v.to_string());
        }
        let spec = cli.command.keys();
        let settings = Settings::resolve(spec, &[&file.values, &overrides])?;
        let mut sweeps = file.sweeps;
        for s in &cli.sweeps {
            sweeps.push(s.parse()?);
        }
        for axis in &sweeps {
            let ok = spec
                .iter()
                .any(|k| k.name == axis.name && k.kind != Kind::Text);
            if !ok {
                return Err(SweepError::UnknownName {
                    name: axis.name.clone(),
                    valid: names(spec, |k| k.kind != Kind::Text),
                }
                .into());
            }
        }
        let reserved_parse = |key: &'static str| -> Result<Option<u64>, CliError> {
            reserved
                .get(key)
                .map(|v| {
                    v.parse().map_err(|_| CliError::Reserved {
                        key,
                        value: v.clone(),
                    })
                })
                .transpose()
        };
        let format = match (cli.format, reserved.get("format").map(String::as_str)) {
            (Some(f), _) => f,
            (None, None | Some("csv")) => Format::Csv,
            (None, Some("json")) => Format::Json,
            (None, Some(other)) => {
                return Err(CliError::Reserved {
                    key: "format",
                    value: other.to_string(),
                })
            }
        };
        Ok(Self {
            command: cli.command,
            settings,
            sweeps,
            seed: cli.seed.or(reserved_parse("seed")?).unwrap_or(0),
            out: cli.out.clone().or(reserved.get("out").map(PathBuf::from)),
            format,
            jobs: cli
                .jobs
                .or(reserved_parse("jobs")?.map(|j| j as usize))
                .unwrap_or(0),
        })
    }

    /// Settings of every grid point, in grid order.
    pub fn points(&self) -> Vec<Settings> {
        let spec = self.command.keys();
        grid(&self.sweeps)
            .into_iter()
            .map(|point| {
                let mut s = self.settings.clone();
                for (name, v) in point {
                    let int = spec.iter().any(|k| k.name == name && k.kind == Kind::Int);
                    let text = if int {
                        format!("{}", v.round().max(0.0) as u64)
                    } else {
                        format!("{v}")
                    };
                    s.set(&name, text);
                }
                s
            })
            .collect()
    }

    /// Runs `f` on every grid point in parallel and keeps grid order.
    pub fn map_points<T: Send>(
        &self,
        f: impl Fn(usize, &Settings) -> Result<T, CliError> + Sync,
    ) -> Result<Vec<T>, CliError> {
        self.points()
            .par_iter()
            .enumerate()
            .map(|(i, s)| f(i, s))
            .collect()
    }

    pub fn header(&self) -> Header {
        Header {
            command: self.command.name().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            settings: self
                .settings
                .values()
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            sweeps: self.sweeps.iter().map(ToString::to_string).collect(),
        }
    }
}

/// Rendered output plus the flagged rows that make the exit code nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub table: Table,
    pub flags: Vec<(usize, String)>,
}

/// Per-point RNG seed: the run seed mixed with the grid index.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn execute(run: &RunConfig) -> Result<Report, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.jobs)
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    let table = pool.install(|| match run.command {
        Command::Sensitivity { floor_repetitions } => commands::sensitivity::run(run, floor_repetitions),
        Command::Optimize => commands::optimize::run(run),
        Command::Env => commands::env::run(run),
        Command::Swap => commands::swap::run(run),
    })?;
    let header = run.header();
    let text = match run.format {
        Format::Csv => render_csv(&header, &table),
        Format::Json => render_json(&header, &table),
    };
    Ok(Report {
        flags: table.flags(),
        text,
        table,
    })
}

/// Builds a cell row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$($crate::table::Cell::from($v)),*] };
}

pub(crate) fn point_error(index: usize, e: impl std::fmt::Display) -> CliError {
    CliError::Point {
        index,
        message: e.to_string(),
    }
}

pub(crate) fn empty() -> Cell {
    Cell::Empty
}
