//! Batch front end: loads a TOML config, runs per-seat sweeps and writes CSV
//! reports, run metadata and SVG plots.

use std::fmt;
use std::path::PathBuf;

use cabin_vlc::analysis::Combiner;
use cabin_vlc::optics::ReceiverKind;
use cabin_vlc::scene::RowSpan;

pub mod plot;
pub mod report;
pub mod run;

pub use plot::plot;
pub use run::{run, simulate, RunOutput, SeatResult};

/// Exit status for an unreadable or invalid config.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for anything that fails after the config was accepted.
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateChoice {
    /// `link.bit_rate_gbps` from the config.
    FromConfig,
    /// Fixed operating rate, Gb/s.
    Fixed(f64),
    /// Search the rate grid for the largest rate meeting `link.target_ber`.
    FindMax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub config: PathBuf,
    pub rows: RowSpan,
    /// `None` takes `receiver.kind` from the config.
    pub receivers: Option<Vec<ReceiverKind>>,
    pub combiners: Vec<Combiner>,
    pub rate: RateChoice,
    pub dump_ir: bool,
    pub out: PathBuf,
    /// Worker threads; `None` lets rayon decide. Results do not depend on it.
    pub threads: Option<usize>,
}

impl RunSpec {
    pub fn new(config: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            config: config.into(),
            rows: RowSpan::new(0, 4),
            receivers: None,
            combiners: vec![Combiner::Sc, Combiner::Mrc],
            rate: RateChoice::FromConfig,
            dump_ir: false,
            out: out.into(),
            threads: None,
        }
    }
}

/// Parses `A..B` (half-open, 0-based).
pub fn parse_rows(text: &str) -> Result<RowSpan, String> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {text:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad row start {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad row end {b:?}"))?;
    if b <= a {
        return Err(format!("empty row span {a}..{b}"));
    }
    Ok(RowSpan::new(a, b))
}

#[derive(Debug)]
pub enum CliError {
    /// Config missing, unreadable or failing validation.
    Config(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}
