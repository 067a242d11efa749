use std::path::PathBuf;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error:\n{0}")]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Core(#[from] cascade_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 I/O, 2 configuration, 3 blow-up, 4 CG/linear-solve failure,
    /// 5 eigensolver failure.
    pub fn exit_code(&self) -> i32 {
        use cascade_core::Error as E;
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                E::NumericalBlowup { .. } => 3,
                E::ConvergenceFailure { .. } | E::NumericalFailure(_) => 4,
                E::EigensolverFailure { .. } => 5,
                E::InvalidArgument(_)
                | E::DimensionMismatch { .. }
                | E::LevelMismatch(_)
                | E::EllipticityViolation { .. }
                | E::UnsupportedGeometry(_)
                | E::OutOfDomain { .. } => 2,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cascade_core::Error as E;

    #[test]
    fn exit_codes_are_distinct_per_class() {
        let codes = [
            CliError::io("x", std::io::Error::other("boom")).exit_code(),
            CliError::Config(ConfigError(vec![])).exit_code(),
            CliError::Core(E::NumericalBlowup { stage: "s", level: 1 }).exit_code(),
            CliError::Core(E::ConvergenceFailure { iterations: 3, relative_residual: 1.0 }).exit_code(),
            CliError::Core(E::EigensolverFailure { sweeps: 3 }).exit_code(),
        ];
        assert_eq!(codes, [1, 2, 3, 4, 5]);
    }
}
