use thiserror::Error;

use crate::group::Element;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("word problem budget exhausted")]
    BudgetExhausted,
    #[error("elements belong to different groups")]
    MixedGroups,
    #[error("enumeration exceeded the size limit of {0}")]
    SizeLimit(usize),
    #[error("unknown generator symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid pattern set: {0}")]
    InvalidPatternSet(String),
    #[error("support is not covered by the patch")]
    SupportNotCovered,
    #[error("periodic configuration is inconsistent at {0:?}")]
    InconsistentPeriod(Element),
    #[error("cell {0:?} could not be resolved")]
    CoverageGap(Element),
    #[error("group is not multi-ended at the requested radii")]
    NotMultiEnded,
    #[error("truncation radius too small: {0}")]
    TruncationTooSmall(String),
    #[error("ball translates are not disjoint")]
    DisjointnessFailure,
    #[error("seed patch too small to force a repeated window")]
    NeedLargerPatch,
    #[error("constructed configuration failed verification: {0}")]
    VerificationFailed(String),
    #[error(
        "map is not {bound}-Lipschitz at {at:?} along generator {generator} (distance {distance})"
    )]
    LipschitzViolation {
        at: Element,
        generator: usize,
        distance: usize,
        bound: usize,
    },
    #[error("integral depends on the path at {at:?}: {first:?} vs {second:?}")]
    PathDependent {
        at: Element,
        first: Vec<usize>,
        second: Vec<usize>,
    },
    #[error("word problem could not be decided")]
    WordProblemUnknown,
    #[error("no preimage within the quasi-surjectivity bound for {0:?}")]
    NotQuasiSurjective(Element),
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration is not periodic under the given element: {0}")]
    NotPeriodic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
