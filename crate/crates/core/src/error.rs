use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. The variant name is what the
/// command-line front end prints, so keep the names stable.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("InvalidLaw: {0}")]
    InvalidLaw(String),
    #[error("NonPositiveMass: R+ = {r_plus}, R- = {r_minus}")]
    NonPositiveMass { r_plus: f64, r_minus: f64 },
    #[error("NoConvergence: {0}")]
    NoConvergence(String),
    #[error("NegativeAlpha4: alpha4 = {0} (capillary slope too large for the phase laws)")]
    NegativeAlpha4(f64),
    #[error("StableParameters: beta1*beta4 - beta2*beta3 = {0} is not negative")]
    StableParameters(f64),
    #[error("OutOfRegime: r = {r} outside the {regime} regime (threshold {threshold})")]
    OutOfRegime {
        r: f64,
        regime: &'static str,
        threshold: f64,
    },
    #[error("GridMismatch: {0}")]
    GridMismatch(String),
    #[error("GridTooCoarse: {0}")]
    GridTooCoarse(String),
    #[error("UndefinedAtZero: multiplier is not finite at the zero mode and no zero-mode rule was given")]
    UndefinedAtZero,
    #[error("StepTooLarge: dt = {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("NoEscape: final time {t_end} reached before the threshold {threshold}")]
    NoEscape { t_end: f64, threshold: f64 },
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
    #[error("FieldFormat: {0}")]
    FieldFormat(String),
    #[error("Io: {0}")]
    Io(String),
}

impl Error {
    /// Bare variant name, e.g. `"NegativeAlpha4"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidLaw(_) => "InvalidLaw",
            Error::NonPositiveMass { .. } => "NonPositiveMass",
            Error::NoConvergence(_) => "NoConvergence",
            Error::NegativeAlpha4(_) => "NegativeAlpha4",
            Error::StableParameters(_) => "StableParameters",
            Error::OutOfRegime { .. } => "OutOfRegime",
            Error::GridMismatch(_) => "GridMismatch",
            Error::GridTooCoarse(_) => "GridTooCoarse",
            Error::UndefinedAtZero => "UndefinedAtZero",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::NoEscape { .. } => "NoEscape",
            Error::InvalidInput(_) => "InvalidInput",
            Error::FieldFormat(_) => "FieldFormat",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
