//! Outcomes of dimension computations together with the evidence behind them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cremona::Move;
use crate::neg_curves::SplittingWitness;
use crate::system::LinearSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", content = "ell", rename_all = "snake_case")]
pub enum Status {
    Empty,
    Regular(i64),
    SpecialKnown(i64),
    Unknown,
}

impl Status {
    /// The projective dimension this status asserts, `-1` for empty.
    pub fn ell(&self) -> Option<i64> {
        match *self {
            Status::Empty => Some(-1),
            Status::Regular(l) | Status::SpecialKnown(l) => Some(l),
            Status::Unknown => None,
        }
    }

    pub fn is_decided(&self) -> bool {
        !matches!(self, Status::Unknown)
    }

    /// Classifies a known dimension against the expected one.
    pub fn from_ell(ell: i64, expected: i64) -> Status {
        if ell < 0 {
            Status::Empty
        } else if ell > expected {
            Status::SpecialKnown(ell)
        } else {
            Status::Regular(ell)
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Empty => write!(f, "Empty"),
            Status::Regular(l) => write!(f, "Regular({l})"),
            Status::SpecialKnown(l) => write!(f, "SpecialKnown({l})"),
            Status::Unknown => write!(f, "Unknown"),
        }
    }
}

/// Published results under which a system in standard form is known to be non-special.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Citation {
    /// At most nine base points (Harbourne).
    AtMostNinePoints,
    /// Homogeneous of multiplicity at most 12 (Ciliberto–Miranda).
    HomogeneousUpTo12,
    /// Quasi-homogeneous of multiplicity at most 3 (Ciliberto–Miranda).
    QuasiHomogeneousUpTo3,
    /// Quasi-homogeneous of multiplicity 4 (Seibert; Laface).
    QuasiHomogeneous4,
    /// Quasi-homogeneous of multiplicity 5 (Laface).
    QuasiHomogeneous5,
    /// All multiplicities at most 6 (Yang).
    MultiplicitiesUpTo6,
}

impl Citation {
    pub const ALL: [Citation; 6] = [
        Citation::AtMostNinePoints,
        Citation::HomogeneousUpTo12,
        Citation::QuasiHomogeneousUpTo3,
        Citation::QuasiHomogeneous4,
        Citation::QuasiHomogeneous5,
        Citation::MultiplicitiesUpTo6,
    ];

    /// Whether `l` lies in the class covered by this result. Any slot may play `p0`.
    pub fn covers(self, l: &LinearSystem) -> bool {
        let mut nonzero: Vec<i64> = l.mults().filter(|&m| m > 0).collect();
        nonzero.sort_unstable();
        match self {
            Citation::AtMostNinePoints => nonzero.len() <= 9,
            Citation::HomogeneousUpTo12 => {
                nonzero.windows(2).all(|w| w[0] == w[1]) && nonzero.last().is_none_or(|&m| m <= 12)
            }
            Citation::QuasiHomogeneousUpTo3 => quasi_homogeneous_tail(&nonzero).is_some_and(|m| m <= 3),
            Citation::QuasiHomogeneous4 => quasi_homogeneous_tail(&nonzero) == Some(4),
            Citation::QuasiHomogeneous5 => quasi_homogeneous_tail(&nonzero) == Some(5),
            Citation::MultiplicitiesUpTo6 => nonzero.last().is_none_or(|&m| m <= 6),
        }
    }
}

/// For a sorted list of positive multiplicities, the common value `m` of a
/// shape `(m0, m^n)`; when two readings exist the smaller tail value is returned.
fn quasi_homogeneous_tail(sorted: &[i64]) -> Option<i64> {
    match sorted {
        [] => Some(0),
        [m] => Some(*m),
        _ => {
            let first = sorted[0];
            let last = sorted[sorted.len() - 1];
            let head_uniform = sorted[..sorted.len() - 1].iter().all(|&m| m == first);
            let tail_uniform = sorted[1..].iter().all(|&m| m == last);
            match (head_uniform, tail_uniform) {
                (true, true) if sorted.len() == 2 => Some(first),
                (true, _) => Some(first),
                (_, true) => Some(last),
                _ => None,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    /// Some multiplicity exceeds the degree.
    MultiplicityExceedsDegree { slot: usize },
    Cited { citation: Citation },
}

/// Which degeneration lemma a node applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    /// `v <= -1`: non-special restrictions, empty kernels, `v_hat_P <= v` give emptiness.
    Emptiness,
    /// `v >= -1`: non-special restrictions, `v_P, v_F >= -1`, `v - 1 >= l_hat_P + l_hat_F` give regularity.
    NonSpeciality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Trace {
    /// Removal of (-1)-curves from the fixed part. `L` and the residual have the
    /// same dimension, so a certified verdict on the residual settles `L`.
    Splitting {
        witness: SplittingWitness,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        residual: Option<Box<DimVerdict>>,
    },
    /// Cremona moves and line splittings down to a system settled by `basis`.
    Reduction { transcript: Vec<Move>, reduced: LinearSystem, basis: Basis },
    /// A `(k,b)`-degeneration; `parts` are the verdicts on `L_P`, `L_F`, `hatL_P`, `hatL_F`.
    Degeneration { k: i64, b: usize, lemma: Lemma, parts: Vec<DimVerdict> },
    /// Maximal-rank reading of the interpolation matrix over a prime field.
    Oracle { prime: u64, seed: u64, trials: usize, ell: i64 },
    /// Search gave up; `reason` says where.
    Exhausted { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimVerdict {
    pub system: LinearSystem,
    #[serde(flatten)]
    pub status: Status,
    pub trace: Trace,
}

impl DimVerdict {
    pub fn ell(&self) -> Option<i64> {
        self.status.ell()
    }

    /// Number of nodes in the trace tree.
    pub fn node_count(&self) -> usize {
        1 + match &self.trace {
            Trace::Degeneration { parts, .. } => parts.iter().map(DimVerdict::node_count).sum(),
            Trace::Splitting { residual: Some(r), .. } => r.node_count(),
            _ => 0,
        }
    }
}
