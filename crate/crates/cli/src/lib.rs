//! Config parsing and command dispatch for the `distid` binary.
//!
//! A run is described by a TOML document (see [`RunConfig`]); command-line
//! flags override the matching keys.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use distid_core::dist::DEFAULT_SEED;
use distid_core::graphlemma::FACTS_MAX_K;
use distid_core::report::{
    to_json, write_bounds_csv, write_exponent_csv, write_lemma_csv, write_mc_csv, write_trend_csv,
    LemmaRow,
};
use distid_core::{
    identifiability_verdict, make_family, verify_facts, verify_lemma, BoundReport,
    FamilySequenceSpec, FamilySpec, FinitePmf, McEngine, McEstimate, Seed, WeightedCompleteGraph,
};

pub const DEFAULT_SIMULATE_TRIALS: u64 = 10_000;
pub const DEFAULT_EXPONENT_TRIALS: u64 = 100_000;
pub const DEFAULT_LEMMA_TRIALS: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Bounds,
    Simulate,
    Lemma,
    Exponent,
    Sweep,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Bounds => "bounds",
            Command::Simulate => "simulate",
            Command::Lemma => "lemma",
            Command::Exponent => "exponent",
            Command::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Edge weights for `lemma` graphs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// i.i.d. uniform on `[0, 1)`, seeded per `(k, r, trial)`.
    #[default]
    Random,
    /// Every edge weight 1 (the equality case).
    Equal,
}

/// Everything one run needs. Keys not listed here are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional in files; the subcommand fills it in.
    pub command: Option<Command>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output file; standard output when absent.
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Monte Carlo threads; 0 means one per core.
    #[serde(default)]
    pub workers: usize,

    /// `bounds`, `simulate`.
    pub family: Option<FamilySpec>,
    /// Single blocklength, shorthand for `n_grid = [n]`.
    pub n: Option<usize>,
    /// `bounds`, `simulate`, `exponent`.
    pub n_grid: Option<Vec<usize>>,
    /// Monte Carlo trials per point, or graphs per `(k, r)` for `lemma`.
    pub trials: Option<u64>,

    /// `exponent`: the pair of distributions.
    pub p: Option<FinitePmf>,
    pub q: Option<FinitePmf>,

    /// `lemma`: graph sizes and cycle lengths (default `2..=k`).
    pub k: Option<Vec<usize>>,
    pub r: Option<Vec<usize>>,
    #[serde(default)]
    pub weights: WeightMode,
    /// `lemma`: also emit the four counting-fact rows for even `r`, `k <= 6`.
    #[serde(default)]
    pub facts: bool,

    /// `sweep`.
    pub sequence: Option<FamilySequenceSpec>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("empty config is valid")
    }
}

#[derive(Debug)]
pub enum RunError {
    /// Unparseable or incomplete configuration (exit 2).
    Config(String),
    /// A library precondition failed (exit 3).
    Precondition(distid_core::Error),
    /// Reading or writing a file failed (exit 4).
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Precondition(_) => 3,
            RunError::Io(_) => 4,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "config error: {msg}"),
            RunError::Precondition(e) => write!(f, "{e}"),
            RunError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<distid_core::Error> for RunError {
    fn from(e: distid_core::Error) -> Self {
        match e {
            distid_core::Error::Io(msg) => RunError::Io(msg),
            other => RunError::Precondition(other),
        }
    }
}

fn config_error(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

/// Parses and validates a TOML run config.
pub fn parse_config(text: &str) -> Result<RunConfig, RunError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| config_error(e.to_string()))?;
    config.validate_fields()?;
    Ok(config)
}

fn check_grid(name: &str, grid: &[usize]) -> Result<(), RunError> {
    if grid.is_empty() {
        return Err(config_error(format!("{name} is empty")));
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config_error(format!(
            "{name} must be strictly increasing blocklengths >= 1, got {grid:?}"
        )));
    }
    Ok(())
}

impl RunConfig {
    fn validate_fields(&self) -> Result<(), RunError> {
        if self.n.is_some() && self.n_grid.is_some() {
            return Err(config_error("set either n or n_grid, not both"));
        }
        if let Some(grid) = &self.n_grid {
            check_grid("n_grid", grid)?;
        }
        if let Some(seq) = &self.sequence {
            check_grid("sequence.n_grid", &seq.n_grid)?;
        }
        if self.trials == Some(0) {
            return Err(config_error("trials must be >= 1"));
        }
        Ok(())
    }

    fn grid(&self) -> Result<Vec<usize>, RunError> {
        match (self.n, &self.n_grid) {
            (Some(n), None) => {
                check_grid("n", &[n])?;
                Ok(vec![n])
            }
            (None, Some(grid)) => Ok(grid.clone()),
            _ => Err(config_error(format!(
                "`{}` needs n or n_grid",
                self.command.map(|c| c.to_string()).unwrap_or_default()
            ))),
        }
    }

    fn family(&self) -> Result<&FamilySpec, RunError> {
        self.family
            .as_ref()
            .ok_or_else(|| config_error("this command needs a [family] table"))
    }
}

/// One `simulate` row: the estimate and the bounds at the same `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRow {
    pub estimate: McEstimate,
    pub bounds: BoundReport,
}

/// Runs the configured command and returns the rendered output.
pub fn render(config: &RunConfig) -> Result<String, RunError> {
    config.validate_fields()?;
    let command = config
        .command
        .ok_or_else(|| config_error("no command given"))?;
    let seed = Seed(config.seed);
    let mut buf = Vec::new();
    match command {
        Command::Bounds => {
            let family = make_family(config.family()?)?;
            let reports = config
                .grid()?
                .into_iter()
                .map(|n| BoundReport::compute(&family, n))
                .collect::<Result<Vec<_>, _>>()?;
            emit(config.format, &mut buf, &reports, |b| {
                write_bounds_csv(b, &reports)
            })?;
        }
        Command::Simulate => {
            let family = make_family(config.family()?)?;
            let trials = config.trials.unwrap_or(DEFAULT_SIMULATE_TRIALS);
            let engine = McEngine::new(config.workers)?;
            let mut rows = Vec::new();
            for n in config.grid()? {
                rows.push(SimulateRow {
                    estimate: engine.estimate_error_prob(
                        &family,
                        n,
                        trials,
                        seed.derive(n as u64),
                    )?,
                    bounds: BoundReport::compute(&family, n)?,
                });
            }
            emit(config.format, &mut buf, &rows, |b| {
                let estimates: Vec<McEstimate> = rows.iter().map(|r| r.estimate.clone()).collect();
                let bounds: Vec<BoundReport> = rows.iter().map(|r| r.bounds).collect();
                write_mc_csv(b, &estimates, Some(&bounds))
            })?;
        }
        Command::Lemma => {
            let rows = lemma_rows(config, seed)?;
            emit(config.format, &mut buf, &rows, |b| {
                write_lemma_csv(b, &rows)
            })?;
        }
        Command::Exponent => {
            let (p, q) = match (&config.p, &config.q) {
                (Some(p), Some(q)) => (p, q),
                _ => return Err(config_error("`exponent` needs both p and q")),
            };
            let trials = config.trials.unwrap_or(DEFAULT_EXPONENT_TRIALS);
            let engine = McEngine::new(config.workers)?;
            let fit = engine.pairwise_error_exponent(p, q, &config.grid()?, trials, seed)?;
            emit(config.format, &mut buf, &fit, |b| {
                write_exponent_csv(b, &fit)
            })?;
        }
        Command::Sweep => {
            let spec = config
                .sequence
                .as_ref()
                .ok_or_else(|| config_error("`sweep` needs a [sequence] table"))?;
            let trend = identifiability_verdict(spec)?;
            emit(config.format, &mut buf, &trend, |b| {
                write_trend_csv(b, &trend)
            })?;
        }
    }
    String::from_utf8(buf).map_err(|e| RunError::Io(e.to_string()))
}

fn emit<T: Serialize>(
    format: Format,
    buf: &mut Vec<u8>,
    value: &T,
    csv: impl FnOnce(&mut Vec<u8>) -> distid_core::Result<()>,
) -> Result<(), RunError> {
    match format {
        Format::Csv => csv(buf)?,
        Format::Json => {
            buf.extend_from_slice(to_json(value)?.as_bytes());
            buf.push(b'\n');
        }
    }
    Ok(())
}

fn lemma_rows(config: &RunConfig, seed: Seed) -> Result<Vec<LemmaRow>, RunError> {
    let ks = config
        .k
        .as_ref()
        .ok_or_else(|| config_error("`lemma` needs k"))?;
    let trials = config.trials.unwrap_or(DEFAULT_LEMMA_TRIALS);
    let mut rows = Vec::new();
    for &k in ks {
        let rs: Vec<usize> = match &config.r {
            Some(rs) => rs.iter().copied().filter(|&r| r <= k).collect(),
            None => (2..=k).collect(),
        };
        for r in rs {
            let stream = seed.derive(k as u64).derive(r as u64);
            for trial in 0..trials {
                let graph = match config.weights {
                    WeightMode::Random => WeightedCompleteGraph::random(k, stream.derive(trial))?,
                    WeightMode::Equal => WeightedCompleteGraph::uniform(k, 1.0)?,
                };
                rows.push(LemmaRow::lemma(trial, &verify_lemma(&graph, r)?));
            }
            if config.facts && r % 2 == 0 && k <= FACTS_MAX_K {
                rows.extend(LemmaRow::facts(0, &verify_facts(k, r, stream)?));
            }
        }
    }
    Ok(rows)
}

/// Renders and writes to `config.out`, or standard output.
pub fn run(config: &RunConfig) -> Result<(), RunError> {
    let text = render(config)?;
    let io_error = |e: io::Error| RunError::Io(e.to_string());
    match &config.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
        }
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(io_error),
    }
}
