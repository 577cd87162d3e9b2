use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A variable name that the graph does not know.
    #[error("unknown variable `{0}`")]
    Name(String),

    /// Inputs that violate an operation's precondition (overlapping sets, latent targets, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An expression whose binders are malformed.
    #[error("malformed expression: {0}")]
    Structure(String),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("graph error: {0}")]
    Graph(String),

    /// A rule whose d-separation side condition fails. `witness` is an active trail
    /// between the two separated sets.
    #[error("{rule} not applicable: active trail {}", witness.join(" - "))]
    NotApplicable { rule: String, witness: Vec<String> },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("conditioning event has probability zero")]
    UndefinedConditional,

    #[error("candidate enumeration exceeded {0} subsets")]
    CapExceeded(usize),

    #[error("invalid CPT: {0}")]
    Cpt(String),

    #[error("invalid policy: {0}")]
    Policy(String),

    #[error("io: {0}")]
    Io(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
