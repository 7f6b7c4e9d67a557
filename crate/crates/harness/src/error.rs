use polyscat_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("parse error at line {line}, column {column}, field `{field}`: {message}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },

    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },

    #[error("{field}: {source}")]
    Field { field: String, source: CoreError },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("refused: {0}")]
    Refused(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl HarnessError {
    pub(crate) fn field(field: String, source: CoreError) -> Self {
        HarnessError::Field { field, source }
    }

    /// 1 for invalid input and refusals, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Parse { .. } | HarnessError::Read { .. } | HarnessError::Refused(_) => 1,
            HarnessError::Write { .. } | HarnessError::Numerical(_) => 2,
            HarnessError::Field { source, .. } | HarnessError::Core(source) => {
                if is_numerical(source) {
                    2
                } else {
                    1
                }
            }
        }
    }
}

fn is_numerical(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::Quadrature { .. }
            | CoreError::LinearSolve(_)
            | CoreError::SingularMode(_)
            | CoreError::GridMismatch
            | CoreError::OnInterface { .. }
            | CoreError::BranchCut { .. }
            | CoreError::AtSource
    )
}
