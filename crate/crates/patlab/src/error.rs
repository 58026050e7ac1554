use thiserror::Error;

/// Errors raised by constructors, builders and parsers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("no image for variable `{0}`")]
    MissingImage(String),
    #[error("constraint variable `{0}` must occur in α (the pattern)")]
    ConstraintVariableNotInPattern(String),
    #[error("pattern must be nonempty")]
    EmptyPattern,
    #[error("alphabet: {0}")]
    Alphabet(String),
    #[error("letter {0:?} is not in the alphabet")]
    ForeignLetter(char),
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("invalid inequality: {0}")]
    InvalidInequality(String),
    #[error("DNF expansion exceeds {0} disjuncts")]
    DnfTooLarge(usize),
    #[error("regex syntax: {0}")]
    RegexSyntax(String),
    #[error("formula syntax: {0}")]
    FormulaSyntax(String),
    #[error("morphism undefined on symbol {0}")]
    UndefinedSymbol(String),
    #[error("zero-test violation: state {state}, c{counter}=0 with r{counter}=-1")]
    ZeroTestViolation { state: usize, counter: u8 },
    #[error("automaton: {0}")]
    Automaton(String),
    #[error("invalid computation: {0}")]
    InvalidComputation(String),
    #[error("decode: {0}")]
    Decode(String),
    #[error("namespace collision on `{0}`")]
    NamespaceCollision(String),
    #[error("unknown predicate index {0}")]
    UnknownPredicate(usize),
    #[error("instance: {0}")]
    Instance(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
