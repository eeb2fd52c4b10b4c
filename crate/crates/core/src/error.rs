use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// |E²| fell below the exceptional-point threshold; the two eigenvectors coalesce.
    #[error("exceptional point: |E^2| = {magnitude:.3e} below threshold {threshold:.1e}")]
    ExceptionalPoint { magnitude: f64, threshold: f64 },

    /// hx² + hy² vanishes, so the complex azimuthal angle is undefined.
    #[error("azimuthal angle undefined: |hx^2 + hy^2| = {magnitude:.3e}")]
    BranchPole { magnitude: f64 },

    #[error("band continuation lost at k = {k:.6}: {reason}")]
    BandTrackingLost { k: f64, reason: String },

    #[error("phase unwrap ambiguous at sample {index}: jump {jump:.4} exceeds {limit:.4}")]
    UnwrapAmbiguous { index: usize, jump: f64, limit: f64 },

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("long-time averaged texture vanishes (|<sx>|, |<sy>| < 1e-9)")]
    DegenerateAverage,

    #[error("metric positivity lost at t = {t:.6}: min eig(M - I) = {min_eig:.3e} (raise eta0)")]
    PositivityLost { t: f64, min_eig: f64 },

    #[error("dilated generator not Hermitian: anti-Hermitian residue {residue:.3e} at t = {t:.6}")]
    NonHermitianResidual { t: f64, residue: f64 },

    #[error("ancilla |0> projection weight {weight:.3e} too small")]
    EmptyProjection { weight: f64 },

    #[error("single band in signal: amplitude ratio {ratio:.3e}")]
    SingleBandDegenerate { ratio: f64 },

    #[error("eigenstate texture vanishes; azimuth undefined")]
    DegenerateTexture,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Numerical failures (as opposed to bad input or configuration).
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidInput(_) | Error::Config(_) | Error::Io(_) | Error::LengthMismatch { .. }
        )
    }

    /// Short machine-readable tag, used in scan status columns.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::ExceptionalPoint { .. } => "exceptional_point",
            Error::BranchPole { .. } => "branch_pole",
            Error::BandTrackingLost { .. } => "band_tracking_lost",
            Error::UnwrapAmbiguous { .. } => "unwrap_ambiguous",
            Error::NotConverged(_) => "not_converged",
            Error::DegenerateAverage => "degenerate_average",
            Error::PositivityLost { .. } => "positivity_lost",
            Error::NonHermitianResidual { .. } => "non_hermitian_residual",
            Error::EmptyProjection { .. } => "empty_projection",
            Error::SingleBandDegenerate { .. } => "single_band_degenerate",
            Error::DegenerateTexture => "degenerate_texture",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidInput(_) => "invalid_input",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
