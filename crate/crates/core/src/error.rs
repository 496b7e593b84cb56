use alloc::string::String;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("path endpoints do not compose")]
    CompositionMismatch,
    #[error("operation requires a non-empty path")]
    EmptyPath,
    #[error("path uses edges that are not in the graph")]
    ForeignPath,
    #[error("operands are automata over different graphs")]
    GraphMismatch,
    #[error("transition {0} does not respect the vertex labelling")]
    LabelMismatch(String),
    #[error("word is not a padded convolution: {0}")]
    InvalidPaddedWord(&'static str),
    #[error("table entry for `{0}` does not start at the window's source")]
    EndpointViolation(String),
    #[error("sliding window table has no entry for window {0}")]
    MissingWindow(String),
    #[error("sliding window inverse is invalid: {0}")]
    InvalidSwi(String),
    #[error("window simulations desynchronised: {0}")]
    Desynchronised(String),
    #[error("semigroupoid violates its axioms: {0}")]
    InvalidSemigroupoid(String),
    #[error("no loop arrow at object `{0}`")]
    NoLocalSemigroup(String),
    #[error("element `{0}` is not an arrow of the semigroupoid")]
    UnknownElement(String),
    #[error("Rees matrix data invalid: {0}")]
    InvalidRees(String),
    #[error("row cross-section witness invalid: {0}")]
    InvalidWitness(String),
    #[error("structure precondition failed: {0}")]
    Precondition(String),
    #[error("no representative found within bound {bound} for {what}")]
    SearchExhausted { what: String, bound: usize },
    #[error("unsupported case: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;
