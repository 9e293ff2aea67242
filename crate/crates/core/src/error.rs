//! Error type shared by every module in the crate.

use thiserror::Error;

/// All fallible operations in this crate return `Result<T, M2dError>`.
#[derive(Error, Debug)]
pub enum M2dError {
    /// Shapes do not line up (matmul inner dims, broadcast, field extents...).
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An argument is outside its mathematical domain (delta <= 0, N = 0...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation produced NaN/Inf or otherwise left the representable range.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A file or payload does not match one of the on-disk formats.
    #[error("format error: {0}")]
    Format(String),

    /// An API contract was violated (mismatched forward/backward pair, non-scalar
    /// backward root...).
    #[error("contract error: {0}")]
    Contract(String),

    /// A model or run configuration is inconsistent.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, M2dError>;

impl M2dError {
    /// Stable process exit code for the CLI: 0 ok, 1 verification failure,
    /// 2 numeric failure, 3 format error, 4 usage/domain error.
    pub fn exit_code(&self) -> i32 {
        match self {
            M2dError::Numeric(_) => 2,
            M2dError::Format(_) | M2dError::Io(_) => 3,
            M2dError::Domain(_) | M2dError::Config(_) | M2dError::Dimension(_) => 4,
            M2dError::Contract(_) => 4,
        }
    }
}
