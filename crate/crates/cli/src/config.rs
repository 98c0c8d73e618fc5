//! Flag parsing, the flat `key = value` config file, and resolution of both
//! into a validated [`RunConfig`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mpent_core::analysis::{g_grid, BlockAveraging, Refinement, DEFAULT_BINS};
use mpent_core::solver::{SolverChoice, SolverOptions, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};

pub const THREADS_ENV: &str = "MPENT_THREADS";

#[derive(Debug, thiserror::Error)]
#[error("config error in '{field}': {msg}")]
pub struct ConfigError {
    pub field: String,
    pub msg: String,
}

fn bad(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError { field: field.to_string(), msg: msg.into() }
}

#[derive(Parser, Debug)]
#[command(name = "mpent", version, about = "Participation-number distributions of the transverse-field Ising chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Ground,
    Dist,
    Sweep,
    Scaling,
    Baseline,
    Blocks,
    Verify,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ground state energy, gap and residual
    Ground(Flags),
    /// Participation number of every bipartition of one state
    Dist(Flags),
    /// μ and σ along a grid in g, with located maxima
    Sweep(Flags),
    /// Sweeps for several chain lengths plus the finite-size fits
    Scaling(Flags),
    /// Haar-random state ensemble
    Baseline(Flags),
    /// Block entanglement entropy against block length
    Blocks(Flags),
    /// Oracle and invariant checks
    Verify(Flags),
}

impl Command {
    pub fn split(self) -> (CommandKind, Flags) {
        match self {
            Command::Ground(f) => (CommandKind::Ground, f),
            Command::Dist(f) => (CommandKind::Dist, f),
            Command::Sweep(f) => (CommandKind::Sweep, f),
            Command::Scaling(f) => (CommandKind::Scaling, f),
            Command::Baseline(f) => (CommandKind::Baseline, f),
            Command::Blocks(f) => (CommandKind::Blocks, f),
            Command::Verify(f) => (CommandKind::Verify, f),
        }
    }
}

/// Every flag is optional so that config-file values can fill the gaps.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// Flat `key = value` file; keys are flag names without dashes
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of sites
    #[arg(long)]
    pub n: Option<usize>,
    /// Chain lengths for `scaling`, comma separated
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long = "g-min")]
    pub g_min: Option<f64>,
    #[arg(long = "g-max")]
    pub g_max: Option<f64>,
    #[arg(long = "g-step")]
    pub g_step: Option<f64>,
    /// Refinement step around each coarse maximum (0 disables)
    #[arg(long = "refine-step")]
    pub refine_step: Option<f64>,
    #[arg(long = "refine-width")]
    pub refine_width: Option<f64>,
    /// Longitudinal field ε
    #[arg(long)]
    pub eps: Option<f64>,
    /// balanced | contiguous:<L> | file:<path>
    #[arg(long)]
    pub partitions: Option<String>,
    /// dense | lanczos | auto
    #[arg(long)]
    pub solver: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output stem: writes <stem>.csv and/or <stem>.json
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// ghz | plus | file:<path>
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long = "state-file")]
    pub state_file: Option<PathBuf>,
    /// Also compute the von Neumann entropy of each cut
    #[arg(long)]
    pub entropy: bool,
    /// Include amplitudes in the `ground` output
    #[arg(long)]
    pub amplitudes: bool,
    /// Write the ground state in the plain-text state format
    #[arg(long = "export-state")]
    pub export_state: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long = "max-len")]
    pub max_len: Option<usize>,
    /// interior | all
    #[arg(long)]
    pub averaging: Option<String>,
    /// Random cases per oracle check in `verify`
    #[arg(long)]
    pub cases: Option<usize>,
}

const KNOWN_KEYS: &[&str] = &[
    "n", "n-list", "g", "g-min", "g-max", "g-step", "refine-step", "refine-width", "eps",
    "partitions", "solver", "tol", "max-iter", "seed", "bins", "threads", "out", "state",
    "state-file", "entropy", "amplitudes", "export-state", "samples", "max-len", "averaging",
    "cases",
];

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad("config", format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad("config", format!("line {}: expected key = value", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(bad(&key, "unknown config key"));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

struct Resolver {
    file: BTreeMap<String, String>,
}

impl Resolver {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| bad(key, format!("'{v}': {e}"))))
            .transpose()
    }

    fn flag(&self, set: bool, key: &str) -> Result<bool, ConfigError> {
        Ok(set || self.get::<bool>(None, key)?.unwrap_or(false))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateSource {
    Ground,
    Ghz,
    Plus,
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PartitionSpec {
    Balanced,
    Contiguous { max_len: usize },
    File { path: PathBuf },
}

impl FromStr for PartitionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "balanced" {
            Ok(Self::Balanced)
        } else if let Some(l) = s.strip_prefix("contiguous:") {
            l.parse()
                .map(|max_len| Self::Contiguous { max_len })
                .map_err(|e| format!("bad block length '{l}': {e}"))
        } else if let Some(p) = s.strip_prefix("file:") {
            Ok(Self::File { path: p.into() })
        } else {
            Err(format!("expected balanced | contiguous:<L> | file:<path>, got '{s}'"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

/// Fully resolved, validated parameters of one invocation.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub n: usize,
    pub g: f64,
    pub epsilon: f64,
    pub grid: GridSpec,
    pub refine: Option<Refinement>,
    pub n_list: Vec<usize>,
    pub partitions: PartitionSpec,
    pub solver: SolverOptions,
    pub seed: u64,
    pub bins: usize,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub state: StateSource,
    pub entropy: bool,
    pub amplitudes: bool,
    pub export_state: Option<PathBuf>,
    pub samples: usize,
    pub max_len: Option<usize>,
    pub averaging: BlockAveraging,
    pub cases: usize,
}

impl RunConfig {
    pub fn grid_values(&self) -> Vec<f64> {
        g_grid(self.grid.min, self.grid.max, self.grid.step).unwrap_or_default()
    }
}

fn range<T: PartialOrd + std::fmt::Display>(field: &str, v: T, lo: T, hi: T) -> Result<T, ConfigError> {
    if v >= lo && v <= hi {
        Ok(v)
    } else {
        Err(bad(field, format!("{v} outside [{lo}, {hi}]")))
    }
}

fn parse_list(field: &str, s: &str) -> Result<Vec<usize>, ConfigError> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| bad(field, format!("'{t}': {e}"))))
        .collect()
}

/// Merges flags over the config file over defaults and validates every
/// numeric range before anything runs.
pub fn resolve(command: CommandKind, flags: Flags) -> Result<RunConfig, ConfigError> {
    let file = match &flags.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let r = Resolver { file };

    let n = range("n", r.get(flags.n, "n")?.unwrap_or(10), 2, 20)?;
    let g = range("g", r.get(flags.g, "g")?.unwrap_or(0.5), 0.0, 1.0)?;
    let epsilon = range("eps", r.get(flags.eps, "eps")?.unwrap_or(0.0), 0.0, 1.0)?;

    let grid = GridSpec {
        min: range("g-min", r.get(flags.g_min, "g-min")?.unwrap_or(0.01), 0.0, 0.99)?,
        max: range("g-max", r.get(flags.g_max, "g-max")?.unwrap_or(0.99), 0.0, 0.99)?,
        step: r.get(flags.g_step, "g-step")?.unwrap_or(0.01),
    };
    if !(grid.step > 0.0) {
        return Err(bad("g-step", "must be positive"));
    }
    if matches!(command, CommandKind::Sweep | CommandKind::Scaling) && grid.max < grid.min {
        return Err(bad("g-max", format!("empty grid: g-max {} < g-min {}", grid.max, grid.min)));
    }

    let refine_step = r.get(flags.refine_step, "refine-step")?.unwrap_or(0.002);
    let refine_width = r.get(flags.refine_width, "refine-width")?.unwrap_or(0.03);
    if refine_step < 0.0 || !(refine_width > 0.0) {
        return Err(bad("refine-step", "refinement step must be ≥ 0 and width > 0"));
    }
    let refine = (refine_step > 0.0).then_some(Refinement { step: refine_step, half_width: refine_width });

    let n_list = match r.get(flags.n_list, "n-list")? {
        Some(s) => parse_list("n-list", &s)?,
        None => (7..=11).collect(),
    };
    if n_list.is_empty() {
        return Err(bad("n-list", "empty"));
    }
    for &m in &n_list {
        range("n-list", m, 7, 16)?;
    }

    let partitions = r
        .get::<String>(flags.partitions, "partitions")?
        .map(|s| s.parse::<PartitionSpec>().map_err(|e| bad("partitions", e)))
        .transpose()?
        .unwrap_or(PartitionSpec::Balanced);
    if let PartitionSpec::Contiguous { max_len } = partitions {
        range("partitions", max_len, 1, n / 2)?;
    }

    let choice = r
        .get::<String>(flags.solver, "solver")?
        .map(|s| s.parse::<SolverChoice>().map_err(|e| bad("solver", e.to_string())))
        .transpose()?
        .unwrap_or_default();
    let tolerance = r.get(flags.tol, "tol")?.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance > 0.0) {
        return Err(bad("tol", "must be positive"));
    }
    let max_iter = range("max-iter", r.get(flags.max_iter, "max-iter")?.unwrap_or(DEFAULT_MAX_ITER), 1, 100_000)?;
    let seed = r.get(flags.seed, "seed")?.unwrap_or(0x5eed);
    let solver = SolverOptions { choice, tolerance, max_iter, seed, ..SolverOptions::default() };
    if choice == SolverChoice::Dense && n > solver.dense_cap && command != CommandKind::Verify {
        return Err(bad("solver", format!("n = {n} exceeds the dense cap {}; use --solver lanczos", solver.dense_cap)));
    }

    let bins = range("bins", r.get(flags.bins, "bins")?.unwrap_or(DEFAULT_BINS), 1, 100_000)?;
    let threads = match r.get(flags.threads, "threads")? {
        Some(t) => Some(t),
        None => std::env::var(THREADS_ENV)
            .ok()
            .map(|v| v.parse::<usize>().map_err(|e| bad("threads", format!("{THREADS_ENV}='{v}': {e}"))))
            .transpose()?,
    };
    if let Some(t) = threads {
        range("threads", t, 1, 4096)?;
    }

    let state_file = r.get(flags.state_file, "state-file")?;
    let state = match (r.get::<String>(flags.state, "state")?, state_file) {
        (Some(_), Some(_)) => return Err(bad("state", "give either --state or --state-file")),
        (None, Some(path)) => StateSource::File { path },
        (None, None) => StateSource::Ground,
        (Some(s), None) => match s.as_str() {
            "ghz" => StateSource::Ghz,
            "plus" => StateSource::Plus,
            "ground" => StateSource::Ground,
            other => match other.strip_prefix("file:") {
                Some(p) => StateSource::File { path: p.into() },
                None => return Err(bad("state", format!("expected ghz | plus | file:<path>, got '{other}'"))),
            },
        },
    };

    let samples = range("samples", r.get(flags.samples, "samples")?.unwrap_or(200), 1, 10_000_000)?;
    let max_len = r.get(flags.max_len, "max-len")?;
    if let Some(l) = max_len {
        range("max-len", l, 1, n / 2)?;
    }
    let averaging = r
        .get::<String>(flags.averaging, "averaging")?
        .map(|s| s.parse::<BlockAveraging>().map_err(|e| bad("averaging", e.to_string())))
        .transpose()?
        .unwrap_or_default();
    let cases = range("cases", r.get(flags.cases, "cases")?.unwrap_or(100), 1, 1_000_000)?;

    Ok(RunConfig {
        command,
        n,
        g,
        epsilon,
        grid,
        refine,
        n_list,
        partitions,
        solver,
        seed,
        bins,
        threads,
        out: r.get(flags.out, "out")?,
        state,
        entropy: r.flag(flags.entropy, "entropy")?,
        amplitudes: r.flag(flags.amplitudes, "amplitudes")?,
        export_state: r.get(flags.export_state, "export-state")?,
        samples,
        max_len,
        averaging,
        cases,
    })
}
