use thiserror::Error;

/// Errors raised while validating parameters or constructing an equilibrium.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} out of range (got {value})")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("no mixed equilibrium at the {state} state: {reason}")]
    NoMixedEquilibrium { state: &'static str, reason: String },

    #[error("invalid mixture: flexible = {flexible}, half = {half}")]
    InvalidMixture { flexible: f64, half: f64 },

    #[error("threshold out of range: u(1/2) = {u_half}, W(1) = {w_one}")]
    ThresholdOutOfRange { u_half: f64, w_one: f64 },

    #[error("no admissible two-action root at alpha = {alpha} (candidates {roots:?})")]
    NoAdmissibleRoot { alpha: f64, roots: Vec<f64> },

    #[error("no sign change of the three-action residual at alpha = {alpha}")]
    BracketNotFound { alpha: f64 },

    #[error("at alpha = {alpha}: {source}")]
    AtState {
        alpha: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Stable snake-case identifier used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NoMixedEquilibrium { .. } => "no_mixed_equilibrium",
            Error::InvalidMixture { .. } => "invalid_mixture",
            Error::ThresholdOutOfRange { .. } => "threshold_out_of_range",
            Error::NoAdmissibleRoot { .. } => "no_admissible_root",
            Error::BracketNotFound { .. } => "bracket_not_found",
            Error::AtState { source, .. } => source.kind(),
            Error::Config(_) => "config",
        }
    }

    pub(crate) fn at(self, alpha: f64) -> Error {
        match self {
            e @ Error::AtState { .. } => e,
            e => Error::AtState {
                alpha,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
