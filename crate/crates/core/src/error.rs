use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {wavelength_nm} nm outside model window [{min_nm}, {max_nm}] nm")]
    OutOfWindow {
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("invalid poling period {0} nm")]
    InvalidPeriod(f64),

    #[error("no sign change of the GVM mismatch in [{lo}, {hi}] nm")]
    NoRoot { lo: f64, hi: f64 },

    #[error("phase matching impossible: k_p - k_s - k_i = {0} rad/nm is not positive")]
    PhaseMatchingImpossible(f64),

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("PMF grid [{lo}, {hi}] rad/nm does not cover k = {k} rad/nm")]
    Coverage { k: f64, lo: f64, hi: f64 },

    #[error("k = 0 is an excluded point of the PMF grid")]
    ExcludedPoint,

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("quadrature did not converge after {doublings} doublings: last values {previous:e} and {last:e}")]
    Convergence {
        doublings: usize,
        previous: f64,
        last: f64,
    },

    #[error("non-finite values at (row, col) {}", format_indices(.0))]
    NonFinite(Vec<(usize, usize)>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("config {field}: {message}")]
    Config { field: String, message: String },

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

fn format_indices(idx: &[(usize, usize)]) -> String {
    const SHOWN: usize = 16;
    let mut s: Vec<String> = idx
        .iter()
        .take(SHOWN)
        .map(|(r, c)| format!("({r}, {c})"))
        .collect();
    if idx.len() > SHOWN {
        s.push(format!("... {} more", idx.len() - SHOWN));
    }
    s.join(", ")
}
