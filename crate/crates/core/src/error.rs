use thiserror::Error;

/// Errors raised across the crate.
///
/// Divergence-type variants are "soft": they carry whatever partial value
/// was accumulated so callers can tell a function outside the space from a
/// grid that is merely too small.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad grid, bad parameter, malformed manifest.
    #[error("configuration error: {0}")]
    Config(String),
    /// NaN/Inf samples, mismatched grids, wrong lengths.
    #[error("input error: {0}")]
    Input(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    /// Operation not defined at this point (e.g. ω = 0 boundary values).
    #[error("domain error: {0}")]
    Domain(String),
    #[error("divergence: {message} (partial = {partial:e})")]
    Divergence { message: String, partial: f64 },
    #[error("spectral collision: |λ - eig| = {distance:e}")]
    SpectralCollision { distance: f64 },
    #[error("contour passes within {distance:e} of the spectrum (minimum {required:e})")]
    ContourProximity { distance: f64, required: f64 },
    #[error("range error: {0}")]
    Range(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("fit verification failed: max spot-check error {max_error:e} > {tolerance:e}")]
    FitVerification { max_error: f64, tolerance: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn divergence(message: impl Into<String>, partial: f64) -> Self {
        Error::Divergence {
            message: message.into(),
            partial,
        }
    }
}
