use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            position,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("Kh applied to non-propositional formula `{0}`")]
    KhScope(String),
    #[error("Kh at byte {position} applied to non-propositional formula `{argument}`")]
    KhScopeAt { position: usize, argument: String },
    #[error("expected a propositional formula, got `{0}`")]
    NotPropositional(String),
    #[error("formula must not contain {0}")]
    Fragment(&'static str),
    #[error("model has no worlds")]
    EmptyWorlds,
    #[error("duplicate world id `{0}`")]
    DuplicateWorld(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("the empty state does not induce a model")]
    EmptyState,
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
