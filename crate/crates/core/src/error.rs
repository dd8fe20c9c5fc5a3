use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("region error: {0}")]
    Region(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("branch assertion failed: {0}")]
    Branch(String),
    #[error("exact arithmetic capacity exceeded (2j = {0})")]
    Overflow(i64),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("selection rule violated: {0}")]
    Selection(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("empty wavepacket")]
    EmptyPacket,
    #[error("lobe tracking failed: {0}")]
    Tracking(String),
}

pub type Result<T> = std::result::Result<T, Error>;
