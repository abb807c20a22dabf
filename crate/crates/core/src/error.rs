use thiserror::Error;

use crate::subdivision::fan::FanReport;
use crate::tropical_curve::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("stable range requires n >= 3, got n = {n}")]
    UnstableRange { n: usize },

    #[error("contact order sums to {sum}, expected 0")]
    NonZeroSum { sum: i64 },

    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("no edge with index {0}")]
    NoSuchEdge(usize),

    #[error("no leg labelled {0}")]
    NoSuchLeg(u32),

    #[error("no vertex with id {0}")]
    NoSuchVertex(u32),

    #[error("invalid tree: {0}")]
    InvalidTree(ValidationReport),

    #[error("invalid piecewise-linear function: {0}")]
    InvalidFunction(String),

    #[error("operation needs target dimension {expected}, map has {found}")]
    TargetDimension { expected: usize, found: usize },

    #[error("two-pointed maps are classified by self-maps, not by the moduli complex")]
    TwoPointed,

    #[error("fan is not complete")]
    IncompleteFan,

    #[error("invalid fan: {0}")]
    InvalidFan(FanReport),

    #[error("completeness check is only implemented in dimension <= 2, got {0}")]
    UnsupportedDimension(usize),

    #[error("coordinate `{0}` is not declared")]
    UndeclaredCoordinate(String),

    #[error("parse error: {0}")]
    Parse(String),
}
