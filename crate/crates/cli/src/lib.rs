//! Command-line driver: resolves a [`config::RunConfig`], runs one
//! subcommand and writes its CSV and JSON artifacts.

pub mod commands;
pub mod config;
pub mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use config::{ConfigError, RunConfig};

pub const FORMAT_VERSION: u32 = 1;

pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const VERIFY: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Input {
        context: String,
        #[source]
        source: mpent_core::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Compute(#[from] mpent_core::Error),
    #[error("{failed} verification check(s) failed")]
    Verification { failed: usize },
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => exit::CONFIG,
            Self::Input { .. } | Self::Io(_) | Self::Compute(mpent_core::Error::Io(_)) => exit::IO,
            Self::Compute(_) => exit::SOLVER,
            Self::Verification { .. } => exit::VERIFY,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Where a command's artifacts go: `<stem>.csv` / `<stem>.json` when an
/// output stem is set, standard output otherwise.
pub struct Sink {
    stem: Option<PathBuf>,
}

impl Sink {
    pub fn new(stem: Option<PathBuf>) -> Self {
        Self { stem }
    }

    fn path(&self, ext: &str) -> Option<PathBuf> {
        self.stem.as_ref().map(|s| {
            let mut p = s.clone().into_os_string();
            p.push(".");
            p.push(ext);
            PathBuf::from(p)
        })
    }

    fn open(path: &Path) -> CliResult<BufWriter<File>> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        Ok(BufWriter::new(File::create(path)?))
    }

    /// Header plus rows. Without an output stem the table goes to stdout.
    pub fn csv(&self, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
        let out: Box<dyn Write> = match self.path("csv") {
            Some(p) => Box::new(Self::open(&p)?),
            None => Box::new(io::stdout().lock()),
        };
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the JSON document to `<stem>.json`, or to stdout when
    /// `stdout_fallback` is set and no stem was given.
    pub fn json(&self, doc: &Value, stdout_fallback: bool) -> CliResult<()> {
        let text = serde_json::to_string_pretty(doc)?;
        match self.path("json") {
            Some(p) => {
                let mut f = Self::open(&p)?;
                writeln!(f, "{text}")?;
                f.flush()?;
            }
            None if stdout_fallback => println!("{text}"),
            None => {}
        }
        Ok(())
    }
}

/// `{"format_version": 1, "config": …, …body}`.
pub fn document(cfg: &RunConfig, body: impl Serialize) -> CliResult<Value> {
    let mut map = Map::new();
    map.insert("format_version".into(), FORMAT_VERSION.into());
    map.insert("config".into(), serde_json::to_value(cfg)?);
    match serde_json::to_value(body)? {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("result".into(), other);
        }
    }
    Ok(Value::Object(map))
}

fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| io::Error::other(e.to_string()))?;
    }
    Ok(())
}

/// Runs a parsed command line and returns the process exit code. Diagnostics
/// go to stderr.
pub fn run(cli: config::Cli) -> i32 {
    let (kind, flags) = cli.command.split();
    let outcome = config::resolve(kind, flags)
        .map_err(CliError::from)
        .and_then(|cfg| {
            configure_threads(cfg.threads)?;
            commands::execute(cfg)
        });
    match outcome {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
