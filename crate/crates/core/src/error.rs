use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("geometry mismatch between operands")]
    GeometryMismatch,
    #[error("cube level {level} outside the supported range {min}..={max}")]
    LevelOutOfRange { level: i32, min: i32, max: i32 },
    #[error("invalid weight: value {value} at cell {cell} is below the floor {floor}")]
    WeightFloor { cell: usize, value: f64, floor: f64 },
    #[error("non-finite value at cell {0}")]
    NonFinite(usize),
    #[error("value array has length {got}, geometry needs {expected}")]
    Length { expected: usize, got: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no admissible cube: {0}")]
    NoCube(String),
    #[error("zero weight mass on cube")]
    ZeroMass,
    #[error("calibration did not converge after {0} doublings")]
    Calibration(u32),
    #[error("regime rejected: {0}")]
    Regime(String),
    #[error("kernel verification failed: {0}")]
    Kernel(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
