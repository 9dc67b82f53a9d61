use thiserror::Error;

pub type Result<T> = std::result::Result<T, IlcError>;

#[derive(Debug, Error)]
pub enum IlcError {
    #[error("dimension mismatch in {what}{}: expected {expected}, found {found}", at_sample(*.sample))]
    Dimension {
        what: String,
        sample: Option<usize>,
        expected: String,
        found: String,
    },

    #[error("algebraic loop at sample {sample}: I + D_c D_p is singular")]
    AlgebraicLoop { sample: usize },

    #[error(
        "lifted problem of size {size} exceeds the dense size cap {cap}; \
         use the LQT solver or a shorter horizon"
    )]
    SizeCap { size: usize, cap: usize },

    #[error("normal matrix J'W_ec J + W_fc + W_dfc is singular: {reason}")]
    SingularNormalMatrix { reason: String },

    #[error("input-change weight W_dfc is not positive definite at sample {sample}")]
    InputChangeWeightNotPd { sample: usize },

    #[error("Riccati stage matrix is not positive definite at sample {sample}")]
    RiccatiBreakdown { sample: usize },

    #[error("non-finite value in {stage} at sample {sample}")]
    NonFinite { stage: &'static str, sample: usize },

    #[error("contour: {0}")]
    Contour(String),

    #[error("weights: {0}")]
    Weights(String),

    #[error("iteration {j} is outside the per-iteration weight table of length {len}")]
    IterationOutOfRange { j: usize, len: usize },

    #[error("need at least {needed} iterations, history has {got}")]
    InsufficientIterations { needed: usize, got: usize },

    #[error("convergence conditions violated at iteration {j}: {reasons}")]
    ConvergenceViolation { j: usize, reasons: String },

    #[error("iteration {j}: {source}")]
    Iteration {
        j: usize,
        #[source]
        source: Box<IlcError>,
    },

    #[error("invalid input: {0}")]
    Invalid(String),
}

fn at_sample(sample: Option<usize>) -> String {
    match sample {
        Some(k) => format!(" at sample {k}"),
        None => String::new(),
    }
}

impl IlcError {
    pub(crate) fn dim(
        what: impl Into<String>,
        sample: Option<usize>,
        expected: impl std::fmt::Display,
        found: impl std::fmt::Display,
    ) -> Self {
        IlcError::Dimension {
            what: what.into(),
            sample,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn at_iteration(self, j: usize) -> Self {
        match self {
            e @ IlcError::Iteration { .. } => e,
            e => IlcError::Iteration {
                j,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with iteration wrappers removed.
    pub fn root(&self) -> &IlcError {
        match self {
            IlcError::Iteration { source, .. } => source.root(),
            e => e,
        }
    }
}
