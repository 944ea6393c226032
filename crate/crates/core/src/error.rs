use std::fmt;

use thiserror::Error;

/// A position-annotated failure while reading the `L(d, m0, m^n, ...)` text form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub input: String,
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} at column {}", self.message, self.position + 1)?;
        writeln!(f, "  {}", self.input)?;
        write!(f, "  {}^", " ".repeat(self.position))
    }
}

impl std::error::Error for ParseError {}

/// Which entry of a system an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Degree,
    Point(usize),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Degree => write!(f, "degree"),
            Slot::Point(i) => write!(f, "p{i}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("negative entry {value} at {slot}")]
    NegativeEntry { slot: Slot, value: i64 },

    #[error("slot {slot} out of range for a system with {points} points")]
    SlotOutOfRange { slot: usize, points: usize },

    #[error("slots must be pairwise distinct, got {0:?}")]
    RepeatedSlot(Vec<usize>),

    #[error("line through p{i} and p{j} is not a fixed component (d - mi - mj = {excess})")]
    NotFixed { i: usize, j: usize, excess: i64 },

    #[error("D^2 + D.K = {0} is odd; class data is corrupted")]
    GenusParity(i64),

    #[error("{0} is not quasi-homogeneous")]
    NotQuasiHomogeneous(String),

    #[error("invalid configuration base: {0}")]
    InvalidConfigurationBase(String),

    #[error("degeneration parameters out of range: {0}")]
    DegenerationRange(String),

    #[error("key-lemma input inconsistent: {0}")]
    KeyLemma(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("oracle: {0}")]
    Oracle(String),

    #[error("splitting did not terminate within {0} steps")]
    NonTermination(usize),

    #[error("table: {0}")]
    Table(String),

    #[error("certificate rejected: {0}")]
    Certificate(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
