use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {n} too large for {what} (max {max})")]
    DimensionTooLarge {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("question is not in S^n: x ^ y ^ z != 0")]
    InvalidQuestion,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{0} must be nonempty")]
    Empty(&'static str),

    #[error(
        "no constraint system with Y ∩ W = {{0}} after {attempts} attempts (t = {t}, |Y| = {y_size})"
    )]
    RetryCapExhausted {
        attempts: usize,
        t: usize,
        y_size: usize,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, unwrapping stage context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for refusals driven by problem size rather than malformed input.
    pub fn is_resource_refusal(&self) -> bool {
        matches!(self.root(), Error::DimensionTooLarge { .. })
    }
}

pub(crate) fn check_dim(what: &'static str, n: usize, max: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid(format!("{what}: dimension must be at least 1")));
    }
    if n > max {
        return Err(Error::DimensionTooLarge { what, n, max });
    }
    Ok(())
}
