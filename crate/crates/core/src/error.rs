//! Error types, one enum per stage plus a crate-level wrapper.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("no zero-Doppler crossing inside the search window")]
    NoCrossing,
    #[error("{0} zero-Doppler crossings inside the search window")]
    Ambiguous(usize),
    #[error("target is above the sensor horizon")]
    TargetAboveSensor,
    #[error("slant range {0:.3} m does not intersect the reference surface")]
    NoIntersection(f64),
    #[error("ground range {0:.3} m is outside the visible swath")]
    GroundRangeOutOfDomain(f64),
    #[error("invalid geometry parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("invalid chirp parameters: {0}")]
    InvalidParams(String),
    #[error("signal has {signal} samples, shorter than the {replica}-sample replica")]
    LengthMismatch { signal: usize, replica: usize },
    #[error("incidence angle {0} deg is degenerate")]
    DegenerateIncidence(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("target {index} echo falls outside the range window")]
    TargetOutOfWindow { index: usize },
    #[error("target {index} is never inside the antenna footprint")]
    BeamMiss { index: usize },
    #[error("invalid collection plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FocusError {
    #[error("processed Doppler bandwidth {bandwidth:.1} Hz exceeds 0.9 x PRF ({prf:.1} Hz)")]
    DopplerOverflow { bandwidth: f64, prf: f64 },
    #[error("range-Doppler focusing does not support {0} mode")]
    ModeUnsupported(String),
    #[error("output grid lies outside the collection")]
    GridOutsideCollection,
    #[error("invalid focusing configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProductError {
    #[error("requested spacing {spacing:.3} m is unreachable: {reason}")]
    SpacingUnreachable { spacing: f64, reason: String },
    #[error("{fraction:.5} of pixels clip during int16 quantization")]
    SaturationExceeded { fraction: f64 },
    #[error("SLC was formed from a range-windowed image")]
    WindowedInput,
    #[error("product carries no calibration constant")]
    MissingCalibration,
    #[error("invalid product configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("antenna gain {gain:.2e} at pixel is below the compensation domain")]
    PatternOutOfDomain { gain: f64 },
    #[error("reflector background {level_db:.1} dB relative to peak is too high")]
    BackgroundTooHigh { level_db: f64 },
    #[error("{0} reflectors given, at least 3 are needed")]
    TooFewReflectors(usize),
    #[error("correction {0} is not invertible")]
    NonInvertible(String),
    #[error("noise region fails the Gaussian kurtosis test (ratio {ratio:.3})")]
    RegionContaminated { ratio: f64 },
    #[error("invalid calibration input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QualityError {
    #[error("peak lies too close to the image edge")]
    PeakOnEdge,
    #[error("a secondary peak above -10 dB was found in the chip")]
    MultiplePeaks,
    #[error("no sidelobe found beyond the first null")]
    NoSidelobeFound,
    #[error("mainlobe is clipped by the chip boundary")]
    MainlobeClipped,
    #[error("integration span exceeds the chip")]
    SpanExceedsChip,
    #[error("oversampling factor {0} is below the minimum of 16")]
    OversampleTooLow(usize),
    #[error("image is empty")]
    EmptyImage,
    #[error("{0} reports given, at least 2 are needed")]
    TooFew(usize),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Focus(#[from] FocusError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Quality(#[from] QualityError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}
