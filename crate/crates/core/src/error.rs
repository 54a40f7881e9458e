use crate::users::UserSet;
use crate::Rational;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DofError {
    #[error("CSIT profile has no users")]
    EmptyProfile,
    #[error("CSIT profile has {0} users; at most {max} are supported", max = crate::users::MAX_USERS)]
    TooManyUsers(usize),
    #[error("CSIT exponent of user {user} is {value}, outside [0, 1]")]
    AlphaOutOfRange { user: usize, value: Rational },
    #[error("expected a tuple of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("point lies outside the DoF region; violated subsets: {violated:?}")]
    Outside { violated: Vec<UserSet> },
    #[error("point has a negative coordinate at user {0}")]
    NegativeCoordinate(usize),
    #[error("the zero tuple has no boundary scaling")]
    ZeroTuple,
    #[error("user {0} has zero DoF; reduce the support first")]
    ZeroCoordinate(usize),
    #[error("subset must be non-empty")]
    EmptySubset,
    #[error("subset {subset} references users beyond K = {k}")]
    SubsetOutOfRange { subset: UserSet, k: usize },
    #[error("cannot remove a user from a single-user profile")]
    SingleUser,
    #[error("user index {user} out of range for K = {k}")]
    UserOutOfRange { user: usize, k: usize },
    #[error("point is not on facet {0}")]
    NotOnFacet(UserSet),
    #[error("level b = {} outside [{}, {}]", .0.b, .0.lo, .0.hi)]
    LevelOutOfRange(Box<LevelRange>),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("vertex enumeration refused: K = {k} exceeds guard {guard} ({systems} linear systems)")]
    GuardExceeded { k: usize, guard: usize, systems: u128 },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

/// Payload of [`DofError::LevelOutOfRange`], boxed to keep the error small.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRange {
    pub b: Rational,
    pub lo: Rational,
    pub hi: Rational,
}

pub type Result<T, E = DofError> = std::result::Result<T, E>;
