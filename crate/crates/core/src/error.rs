use std::fmt;

use thiserror::Error;

/// A single violated parameter invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct InvalidParam {
    pub field: &'static str,
    pub reason: String,
}

impl fmt::Display for InvalidParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<InvalidParam>),

    #[error("spectrum is marginal: max Re(lambda) = {max_real_part:e} within tolerance {tol:e}")]
    MarginalSpectrum { max_real_part: f64, tol: f64 },

    #[error("eigenvalue solver did not converge")]
    EigenFailure,

    #[error("resolvent is numerically singular (condition estimate {condition:e})")]
    SingularResolvent { condition: f64 },

    #[error("cavity response R(omega) vanishes at omega = {omega}")]
    SingularResponse { omega: f64 },

    #[error("ambiguous eigenvalue continuation between k = {k_from} and k = {k_to}")]
    TrackingAmbiguity { k_from: f64, k_to: f64 },

    #[error("thermal energy undefined at omega = 0 and zero temperature")]
    ZeroFrequency,

    #[error("band gap {gap:e} below floor at grid point ({u}, {v})")]
    BandDegeneracy { u: f64, v: f64, gap: f64 },

    #[error("Hermitian eigensolver did not converge at ({u}, {v})")]
    NonConvergedEigen { u: f64, v: f64 },

    #[error("gap window [{lo}, {hi}] contains no usable frequency samples")]
    EmptyGapWindow { lo: f64, hi: f64 },

    #[error("bad grid: {0}")]
    BadGrid(String),

    #[error("invalid sweep spec: {0}")]
    SpecInvalid(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("missing required key `{key}`")]
    MissingRequired { key: String },

    #[error("nothing to write: {0}")]
    EmptyResult(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(errs: &[InvalidParam]) -> String {
    errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
