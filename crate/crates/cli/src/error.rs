use sar_core::error::{CalibrationError, Error as CoreError, FocusError, ProductError, QualityError, SimError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("simulate: {0}")]
    Simulation(String),
    #[error("focus: {0}")]
    Focus(String),
    #[error("product: {0}")]
    Product(String),
    #[error("quality: {0}")]
    Quality(String),
    #[error("io: {0}")]
    Io(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Simulation(_) => 3,
            PipelineError::Focus(_) => 4,
            PipelineError::Product(_) => 5,
            PipelineError::Quality(_) => 6,
            PipelineError::Io(_) => 7,
        }
    }

    /// Machine-readable code written to the manifest.
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Config(_) => "CONFIG",
            PipelineError::Simulation(_) => "SIMULATION",
            PipelineError::Focus(_) => "FOCUSING",
            PipelineError::Product(_) => "PRODUCT",
            PipelineError::Quality(_) => "QUALITY",
            PipelineError::Io(_) => "IO",
        }
    }

    pub fn message(&self) -> String {
        match self {
            PipelineError::Config(m)
            | PipelineError::Simulation(m)
            | PipelineError::Focus(m)
            | PipelineError::Product(m)
            | PipelineError::Quality(m)
            | PipelineError::Io(m) => m.clone(),
        }
    }
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        PipelineError::Io(e.to_string())
    }
}

impl From<SimError> for PipelineError {
    fn from(e: SimError) -> Self {
        PipelineError::Simulation(e.to_string())
    }
}

impl From<FocusError> for PipelineError {
    fn from(e: FocusError) -> Self {
        PipelineError::Focus(e.to_string())
    }
}

impl From<ProductError> for PipelineError {
    fn from(e: ProductError) -> Self {
        PipelineError::Product(e.to_string())
    }
}

impl From<CalibrationError> for PipelineError {
    fn from(e: CalibrationError) -> Self {
        PipelineError::Quality(e.to_string())
    }
}

impl From<QualityError> for PipelineError {
    fn from(e: QualityError) -> Self {
        PipelineError::Quality(e.to_string())
    }
}

impl From<CoreError> for PipelineError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(e) => e.into(),
            CoreError::Format(m) => PipelineError::Io(m),
            CoreError::Sim(e) => e.into(),
            CoreError::Focus(e) => e.into(),
            CoreError::Product(e) => e.into(),
            CoreError::Calibration(e) => e.into(),
            CoreError::Quality(e) => e.into(),
            e @ (CoreError::Geometry(_) | CoreError::Signal(_)) => PipelineError::Config(e.to_string()),
        }
    }
}
