use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pulse grid needs an odd number of samples, got {0}")]
    EvenSampleCount(usize),
    #[error("half width must be positive, got {0}")]
    BadHalfWidth(f64),
    #[error("cannot truncate {len}-sample pulse to {target} samples")]
    BadTruncation { len: usize, target: usize },
    #[error("pulses do not share a sampling grid")]
    GridMismatch,
    #[error("transform size {size} is smaller than pulse length {len}")]
    TransformTooSmall { size: usize, len: usize },
    #[error("spectrum never falls below {0} dB")]
    NoSpectralEdge(f64),
    #[error("roll-off factor must lie in [0, 1], got {0}")]
    BadRollOff(f64),
    #[error("unsupported constellation {kind} with M = {order}")]
    UnsupportedConstellation { kind: String, order: usize },
    #[error("invalid lookup table parameters n = {n}, k = {k}")]
    BadTable { n: usize, k: usize },
    #[error("expected {expected} bits, got {got}")]
    BitLength { expected: usize, got: usize },
    #[error("scheme needs k = {expected} active pulses, table has k = {got}")]
    WrongActiveCount { expected: usize, got: usize },
    #[error("pulse selection {0:?} is not a row of the lookup table")]
    UnknownSelection(Vec<usize>),
    #[error("symbol {0} is not a constellation point")]
    UnknownSymbol(num_complex::Complex64),
    #[error("pulse set has {have} pulses but the table needs {need}")]
    PulseCount { have: usize, need: usize },
    #[error("{bits} bits per message exceeds the enumeration cap of {cap}")]
    EnumerationCap { bits: usize, cap: usize },
    #[error("number of antennas must be a power of two, got {0}")]
    AntennaCount(usize),
    #[error("curve has no points to write")]
    EmptyCurve,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
