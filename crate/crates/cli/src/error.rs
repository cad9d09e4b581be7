use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: files, flags, or values outside a documented domain.
    #[error("{0}")]
    Input(String),
    /// The input was well formed but the numerics could not produce a result.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<rpv_core::Error> for CliError {
    fn from(e: rpv_core::Error) -> Self {
        use rpv_core::Error as E;
        let msg = e.to_string();
        match e {
            E::NonFinite { .. }
            | E::InvalidParameter { .. }
            | E::Domain { .. }
            | E::LengthMismatch { .. }
            | E::WeightKind { .. }
            | E::EmptyCollection
            | E::DuplicatePolicy(_)
            | E::MixedGeometry
            | E::DataDependentWeights(_) => CliError::Input(msg),
            E::DegenerateDenominator(_)
            | E::DegenerateSample { .. }
            | E::InsufficientResamples { .. }
            | E::CorrelationGuard(_)
            | E::NotPositiveSemidefinite(_)
            | E::NegativeCriticalValue(_)
            | E::EmptyIntersection(_)
            | E::AllUndefined
            | E::UndefinedEstimate
            | E::OutOfRange { .. } => CliError::Numeric(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
