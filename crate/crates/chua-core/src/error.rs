use thiserror::Error;

/// Errors produced by the simulation and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A voltage/current argument was NaN or infinite.
    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    /// Two op-amp cells with equal knees cannot form a five-segment diode.
    #[error("degenerate diode model: {0}")]
    DegenerateDiode(String),

    /// A state component left the physical range during integration.
    #[error("trajectory diverged at t = {t:.6e} s")]
    Divergence { t: f64 },

    /// Regime classification evidence was contradictory; a longer window may help.
    #[error("inconclusive classification: {0}")]
    Inconclusive(String),

    /// Synthesized audio had no signal content.
    #[error("degenerate audio: peak {peak:.3e} V is below the silence threshold")]
    DegenerateAudio { peak: f64 },

    /// A metrics or decimation window contained no samples.
    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse category used by the CLI to pick an exit code.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParam(_)
                | Error::NonFinite(_)
                | Error::DegenerateDiode(_)
                | Error::EmptyWindow(_)
        )
    }
}
