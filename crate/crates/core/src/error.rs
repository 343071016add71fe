use thiserror::Error;

use crate::name::Name;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WellFormedError {
    #[error("binder `{0}` is used more than once")]
    DuplicateBinder(Name),
    #[error("name `{0}` is both bound and free")]
    BoundAndFree(Name),
    #[error("binder `{0}` shadows an enclosing binder")]
    Shadowed(Name),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Why a permutation fails to be a symmetry relation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymmetryError {
    #[error("permutation is not a bijection on its support (at `{0}`)")]
    NotBijective(Name),
    #[error("permutation touches the forbidden name `{0}`")]
    TouchesForbiddenName(Name),
    #[error("permutation composed {degree} times is not the identity")]
    WrongDegree { degree: usize },
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("cycle name `{0}` is repeated or already in the support")]
    CycleOverlap(Name),
    #[error("cycle length {len} does not divide degree {degree}")]
    CycleLength { len: usize, degree: usize },
    #[error("malformed permutation literal: {0}")]
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("ill-formed term: {0}")]
    IllFormed(#[from] WellFormedError),
    #[error("universe is missing the free name `{0}`")]
    UniverseMissing(Name),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("restricted name `{0}` is not free in the base process")]
    RestrictionNotFree(Name),
    #[error("restricted name `{0}` is listed twice")]
    DuplicateRestriction(Name),
    #[error("restriction is not closed under the symmetry relation at `{0}`")]
    RestrictionNotClosed(Name),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error("denoted network is ill-formed: {0}")]
    IllFormed(#[from] WellFormedError),
    #[error("component index {0} is out of range")]
    IndexOutOfRange(usize),
    #[error("component index {0} is replaced twice")]
    DuplicateIndex(usize),
}

/// Failures of the symmetric-execution machinery.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecutionError {
    #[error("base process uses mixed choice")]
    NotSeparate,
    #[error("transition does not belong to the network: {0}")]
    ForeignTransition(String),
    #[error("input object `{0}` is moved by the symmetry relation")]
    InputObjectNotFixed(Name),
    #[error("could not close a symmetric round: {0}")]
    Defect(String),
    #[error("invalid subdivision: {0}")]
    Subdivision(String),
    #[error("recorded execution does not replay: {0}")]
    Replay(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("channel `{0}` is bound in the term")]
    ChannelBound(Name),
    #[error("expected {expected} top-level components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("term uses mixed choice")]
    NotSeparate,
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}
