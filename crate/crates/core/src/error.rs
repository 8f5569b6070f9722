use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tensor data contains non-finite values")]
    NonFinite,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid index grouping ({0}, {1}): only adjacent indices can be merged")]
    InvalidGrouping(usize, usize),

    #[error("singular value decomposition did not converge")]
    SvdNoConvergence,

    #[error("truncation rank {k} out of range 1..={max}")]
    RankOutOfRange { k: usize, max: usize },

    #[error("input tensor or matrix is identically zero")]
    ZeroInput,

    #[error("dimensions {0:?} do not satisfy any supported regime")]
    Regime([usize; 4]),

    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
