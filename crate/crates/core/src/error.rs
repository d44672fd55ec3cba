use std::path::PathBuf;

use thiserror::Error;

use crate::params::ConfigViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", format_violations(.0))]
    InvalidConfig(Vec<ConfigViolation>),

    #[error("no admissible conjugate channel for probe order {probe_order}")]
    EmptyGrid { probe_order: u32 },

    #[error("channel n = {n} is not part of the mode grid")]
    UnknownChannel { n: u32 },

    #[error("dipole table has no entry for channel n = {n}")]
    TableMissingChannel { n: u32 },

    #[error("dipole model: {0}")]
    InvalidDipoleModel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not an arrow matrix: nonzero entry at ({row}, {col})")]
    NotArrowMatrix { row: usize, col: usize },

    #[error("coupling matrix is defective or ill-conditioned (eigenvector condition {condition:.3e})")]
    DefectiveMatrix { condition: f64 },

    #[error("moments of order {order} are not supported (maximum 4)")]
    UnsupportedOrder { order: usize },

    #[error("variance has imaginary residue {imag:.3e} (real part {real:.3e})")]
    NonRealVariance { real: f64, imag: f64 },

    #[error("shot-noise variance is zero")]
    ZeroSnl,

    #[error("Fock truncation too small: tail mass {tail_mass:.3e} exceeds {limit:.1e}")]
    TruncationInsufficient { tail_mass: f64, limit: f64 },

    #[error("truncated Fock oracle supports at most {max} modes, got {found}")]
    TooManyModes { max: usize, found: usize },

    #[error("Wigner quadratic form is singular")]
    SingularQuadraticForm,

    #[error("invalid sweep specification: {0}")]
    InvalidSweep(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

fn format_violations(v: &[ConfigViolation]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}
