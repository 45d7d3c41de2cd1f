use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty row span {start}..{end}")]
    EmptySpan { start: usize, end: usize },
    #[error("row span {start}..{end} exceeds the {rows} configured rows")]
    SpanOutOfRange { start: usize, end: usize, rows: usize },
    #[error("`{field}` must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("`{field}` must lie in [0, 1], got {value}")]
    OutOfUnitRange { field: &'static str, value: f64 },
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("unsupported seat layout {0:?}; only 3-4-3 is supported")]
    UnsupportedLayout(Vec<usize>),
    #[error("semi-angle {0} deg outside (0, 90)")]
    SemiAngle(f64),
    #[error("negative incidence angle {0}")]
    NegativeAngle(f64),
    #[error("direction is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("impulse response carries no power")]
    ZeroPower,
    #[error("SINR undefined: zero noise and zero interference")]
    ZeroDenominator,
    #[error("empty branch list")]
    NoBranches,
    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
