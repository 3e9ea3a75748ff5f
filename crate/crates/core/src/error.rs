use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation tail {tail:.3e} exceeds tolerance at cutoff {cutoff}")]
    TailTooLarge { tail: f64, cutoff: usize },
    #[error("modes {0} and {1} have different cutoffs")]
    CutoffMismatch(usize, usize),
    #[error("beam splitter leaked {0:.3e} of the norm out of the truncated space")]
    TruncationLeakage(f64),
    #[error("projection has zero probability")]
    ZeroProbability,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("mode {mode} out of range for a {modes}-mode state")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("mode {0} has support above one photon")]
    ModeNotSingleRail(usize),
    #[error("coherent basis collapses: normalization diverges")]
    DegenerateBasis,
    #[error("coherent-basis operators use different amplitudes ({0} vs {1})")]
    BasisMismatch(f64, f64),
    #[error("numeric backend supports alpha <= {max}, got {alpha}")]
    BackendOverflow { alpha: f64, max: f64 },
    #[error("no closed form for direction {0}")]
    UnsupportedDirection(String),
    #[error("quadrature not converged: {coarse} vs {fine} with {nodes} nodes")]
    NonConvergent { coarse: f64, fine: f64, nodes: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
