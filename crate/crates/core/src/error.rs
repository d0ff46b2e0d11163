use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Validation and domain errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("transmission {value} at channel {index} is outside [0, 1]")]
    InvalidTransmission { index: usize, value: f64 },

    #[error("saturation {value} at channel {index} is outside (0, 1]")]
    InvalidSaturation { index: usize, value: f64 },

    #[error("decomposition model needs at least one channel")]
    EmptyModel,

    #[error("total conductance is zero; the Fano factor is undefined")]
    ZeroConductance,

    #[error("conductance {0} G0 is negative")]
    NegativeConductance(f64),

    #[error("conductance {g} G0 exceeds model capacity {capacity} G0")]
    CapacityExceeded { g: f64, capacity: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("temperature {0} K is negative or not finite")]
    InvalidTemperature(f64),

    #[error("voltage {0} V is not finite")]
    InvalidVoltage(f64),

    #[error("voltage must be positive, got {0} V")]
    NonPositiveVoltage(f64),

    #[error("both voltage and temperature are zero; the yield normalization vanishes")]
    ZeroBias,

    #[error("at least {min} attempts are required, got {got}")]
    TooFewAttempts { got: u64, min: u64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid band [{lo}, {hi}] eV: need 0 < lo < hi")]
    InvalidBand { lo: f64, hi: f64 },

    #[error("band [{lo}, {hi}] eV does not overlap the energy grid")]
    EmptyBandOverlap { lo: f64, hi: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: row does not match the energy grid ({message})")]
    GridMismatch { line: usize, message: String },

    #[error("line {line}: step {step} does not increase on the previous step")]
    NonMonotoneStep { line: usize, step: u64 },

    #[error("normalization window holds {found} points, need at least {required}")]
    InsufficientWindowPoints { found: usize, required: usize },

    #[error("record {index} has zero current (conductance {g} G0)")]
    ZeroCurrent { index: usize, g: f64 },

    #[error("normalization constant {0} is not positive")]
    NonPositiveNormalization(f64),

    #[error("fit needs at least {required} points with g > {threshold} G0, found {found}")]
    InsufficientFitPoints {
        found: usize,
        required: usize,
        threshold: f64,
    },

    #[error("invalid bounds [{lo}, {hi}]: need 0 < lo < hi")]
    InvalidBounds { lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
