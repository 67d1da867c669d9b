use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("unphysical covariance matrix: {0}")]
    Physicality(String),

    #[error("degenerate measurement: {0}")]
    DegenerateMeasurement(String),

    #[error("Fock truncation error: {0}")]
    Truncation(String),

    #[error("numerical accuracy error: {0}")]
    Accuracy(String),

    #[error("estimation failure: {0}")]
    Estimation(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by reading or writing external data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Csv(_) | Error::Json(_))
    }
}

/// Fails with a parameter error unless `lo <= value <= hi`.
pub(crate) fn check_range(name: &str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {value} outside [{lo}, {hi}]")))
    }
}
